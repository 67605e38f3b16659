#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "vmauction/auction.hpp"
#include "vmauction/reference.hpp"

using namespace vmauction;

namespace {

const ProviderSupply kSingleType{{5}, {1}};

}  // namespace

TEST_CASE("bid validation") {
  CHECK_NOTHROW(validate_bid({{1, 0}, 3}, 2));
  CHECK_THROWS_AS(validate_bid({{1}, 3}, 2), std::invalid_argument);      // arity
  CHECK_THROWS_AS(validate_bid({{0, 0}, 3}, 2), std::invalid_argument);   // empty bundle
  CHECK_THROWS_AS(validate_bid({{1, 0}, 0}, 2), std::invalid_argument);   // zero price
  CHECK_THROWS_AS(validate_supply({{1}, {0}}), std::invalid_argument);    // zero weight
  CHECK_THROWS_AS(validate_supply({{1, 1}, {1}}), std::invalid_argument); // arity
}

TEST_CASE("weighted size") {
  const std::vector<std::uint32_t> weights{1, 2};
  CHECK(weighted_size(std::vector<std::uint32_t>{2, 1}, weights) == 4);
  CHECK(weighted_size(std::vector<std::uint32_t>{0, 0}, weights) == 0);
}

TEST_CASE("bid density pairs") {
  const std::vector<std::uint32_t> unit{1};
  auto [p, s] = bid_density({{4}, 10}, unit);
  CHECK(p == 10);
  CHECK(s == 4);
  // Zero price is a legal zero-density bid; an all-zero bundle is not.
  CHECK(bid_density({{4}, 0}, unit).first == 0);
  CHECK_THROWS_AS(bid_density({{0}, 5}, unit), std::invalid_argument);
}

TEST_CASE("bid serialization round trip") {
  const Bid bid{{3, 0, 7}, 123456789};
  const auto bytes = serialize_bid(bid);
  const Bid back = deserialize_bid(bytes);
  CHECK(back.bundle == bid.bundle);
  CHECK(back.price == bid.price);
  // Truncated input is rejected.
  CHECK_THROWS_AS(deserialize_bid(std::span<const std::uint8_t>(bytes.data(), bytes.size() - 1)),
                  std::invalid_argument);
  // Serialization is canonical: same bid, same bytes.
  CHECK(serialize_bid(bid) == bytes);
}

TEST_CASE("worked single-type auction") {
  // Capacity 5; bids: 4 units at 10 (density 5), 2 at 3 (~2.12), 1 at 3 (3).
  const std::vector<Bid> bids{{{4}, 10}, {{2}, 3}, {{1}, 3}};
  const AuctionOutcome out = run_auction_kernel(bids, kSingleType);

  CHECK(out.order == std::vector<std::uint32_t>{0, 2, 1});
  CHECK(out.won == std::vector<std::uint8_t>{1, 0, 1});
  // Winner 0 is critically constrained by bidder 1: floor(sqrt(9*4/2)) = 4.
  CHECK(out.price == std::vector<Coin>{4, 0, 0});
  CHECK(out.critical == std::vector<std::int32_t>{1, -1, -1});
}

TEST_CASE("density ties break by bidder index") {
  const ProviderSupply supply{{2}, {1}};
  const std::vector<Bid> bids{{{2}, 6}, {{2}, 6}};
  const AuctionOutcome out = run_auction_kernel(bids, supply);
  CHECK(out.won == std::vector<std::uint8_t>{1, 0});
  // The loser is exactly critical: the winner pays its full equal bid.
  CHECK(out.price == std::vector<Coin>{6, 0});
  CHECK(out.critical == std::vector<std::int32_t>{1, -1});
}

TEST_CASE("single bidder wins and pays zero") {
  const AuctionOutcome out = run_auction_kernel(std::vector<Bid>{{{2}, 7}}, kSingleType);
  CHECK(out.won == std::vector<std::uint8_t>{1});
  CHECK(out.price == std::vector<Coin>{0});
  CHECK(out.critical == std::vector<std::int32_t>{-1});
}

TEST_CASE("empty instance") {
  const AuctionOutcome out = run_auction_kernel(std::vector<Bid>{}, kSingleType);
  CHECK(out.won.empty());
  CHECK(out.price.empty());
  const RefOutcome ref = reference_allocate_price(std::vector<Bid>{}, kSingleType);
  CHECK(ref.won.empty());
}

TEST_CASE("two-type example with a zero-charge winner") {
  // Capacities (3,2), weights (1,2); winners pay 8 and 0.
  const ProviderSupply supply{{3, 2}, {1, 2}};
  const std::vector<Bid> bids{{{2, 1}, 12}, {{1, 1}, 6}, {{0, 2}, 8}, {{3, 0}, 3}};
  const AuctionOutcome out = run_auction_kernel(bids, supply);
  CHECK(out.won == std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK(out.price == std::vector<Coin>{8, 0, 0, 0});
  CHECK(out.critical == std::vector<std::int32_t>{2, -1, -1, -1});
}

TEST_CASE("engine matches reference on the worked examples") {
  const ProviderSupply two{{3, 2}, {1, 2}};
  const std::vector<std::vector<Bid>> cases{
      {{{4}, 10}, {{2}, 3}, {{1}, 3}},
      {{{2}, 6}, {{2}, 6}},
      {{{2}, 7}},
  };
  for (const auto& bids : cases) {
    const AuctionOutcome eng = run_auction_kernel(bids, kSingleType);
    const RefOutcome ref = reference_allocate_price(bids, kSingleType);
    CHECK(eng.won == ref.won);
    CHECK(eng.price == ref.price);
    CHECK(eng.critical == ref.critical);
  }
  const std::vector<Bid> multi{{{2, 1}, 12}, {{1, 1}, 6}, {{0, 2}, 8}, {{3, 0}, 3}};
  const AuctionOutcome eng = run_auction_kernel(multi, two);
  const RefOutcome ref = reference_allocate_price(multi, two);
  CHECK(eng.won == ref.won);
  CHECK(eng.price == ref.price);
  CHECK(eng.critical == ref.critical);
}

TEST_CASE("denied bidders pay nothing even when denser than winners") {
  // A big dense bundle that cannot fit loses; smaller bids win.
  const ProviderSupply supply{{2}, {1}};
  const std::vector<Bid> bids{{{3}, 30}, {{1}, 4}, {{1}, 3}};
  const AuctionOutcome out = run_auction_kernel(bids, supply);
  CHECK(out.won == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(out.price[0] == 0);
}
