#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vmauction/exact.hpp"
#include "vmauction/ledger.hpp"

namespace vmauction {

// A bid asks for a bundle (count per VM type) at an all-or-nothing price.
struct Bid {
  std::vector<std::uint32_t> bundle;
  Coin price = 0;
};

struct ProviderSupply {
  std::vector<std::uint32_t> capacities;
  std::vector<std::uint32_t> weights;
};

// Throws std::invalid_argument on malformed input (wrong arity, empty bundle,
// zero price, zero weight, out-of-range magnitudes).
void validate_bid(const Bid& bid, std::size_t types);
void validate_supply(const ProviderSupply& supply);

// Weighted bundle size sum(k_i * w_i); throws if it reaches 2^32.
Coin weighted_size(std::span<const std::uint32_t> bundle, std::span<const std::uint32_t> weights);

// Exact density of a bid as the pair (price, weighted size): the numeric
// value is price / sqrt(size), compared without rounding by
// compare_density. A zero price is a legal zero-density bid; an all-zero
// bundle is not (throws std::invalid_argument).
std::pair<Coin, Coin> bid_density(const Bid& bid, std::span<const std::uint32_t> weights);

std::vector<std::uint8_t> serialize_bid(const Bid& bid);
Bid deserialize_bid(std::span<const std::uint8_t> bytes);

// Flat view of one bid for the kernels. `tie` orders equal densities:
// lower tie wins first (callers pass the rank of the bidder's address).
struct BidderView {
  Coin price = 0;
  Coin size = 0;
  const std::uint32_t* bundle = nullptr;
  std::uint32_t tie = 0;
};

// The kernels are allocation-free so that exhaustive sweeps can run millions
// of instances; all outputs and scratch live in caller storage.

// Fill `order` with bidder indices sorted by descending density, ties by
// ascending `tie`.
void rank_by_density(std::span<const BidderView> bids, std::span<std::uint32_t> order);

// Greedy admission in `order`: a bidder wins iff its whole bundle still fits
// the remaining capacity in every type. `used` is scratch of size types.
void allocate_greedy(std::span<const BidderView> bids, std::span<const std::uint32_t> order,
                     std::span<const std::uint32_t> capacities, std::span<std::uint8_t> won,
                     std::span<std::uint32_t> used);

// Critical-value prices. For each winner j: rerun the admission without j;
// the critical bidder is the first originally-denied bidder that gets in,
// and j pays its own size priced at that bidder's density,
// floor(crit_price / sqrt(crit_size) * sqrt(size_j)). No such bidder: price
// 0. Losers: price 0, critical -1. `used` is scratch of size types.
void price_critical(std::span<const BidderView> bids, std::span<const std::uint32_t> order,
                    std::span<const std::uint32_t> capacities, std::span<const std::uint8_t> won,
                    std::span<Coin> price, std::span<std::int32_t> critical,
                    std::span<std::uint32_t> used);

struct AuctionOutcome {
  std::vector<std::uint32_t> order;   // bidder indices, best density first
  std::vector<std::uint8_t> won;      // x_j
  std::vector<Coin> price;            // charge per bidder (0 for losers)
  std::vector<std::int32_t> critical; // critical bidder index or -1
};

// Convenience wrapper over the kernels; bidder i gets tie value i, so pass
// bidders already sorted by the deterministic address order.
AuctionOutcome run_auction_kernel(std::span<const Bid> bids, const ProviderSupply& supply);

}  // namespace vmauction
