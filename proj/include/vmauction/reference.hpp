#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vmauction/auction.hpp"

namespace vmauction {

// Serial reference implementation of allocation and pricing, kept separate
// from the engine on purpose: it follows the definitions literally (full
// fresh admission rerun per winner, winner-set difference to find the
// critical bidder) with its own comparator and integer sqrt, and is the
// equivalence oracle the engine is checked against.

struct RefBidder {
  Coin price = 0;
  const std::uint32_t* bundle = nullptr;
};

struct RefScratch {
  std::vector<Coin> size;
  std::vector<std::uint32_t> order;
  std::vector<std::uint8_t> won_without;
  std::vector<std::uint32_t> used;
  std::vector<RefBidder> rebid;
  void resize(std::size_t bidders, std::size_t types) {
    size.resize(bidders);
    order.resize(bidders);
    won_without.resize(bidders);
    used.resize(types);
    rebid.resize(bidders);
  }
};

void reference_core(std::span<const RefBidder> bids, std::span<const std::uint32_t> capacities,
                    std::span<const std::uint32_t> weights, std::span<std::uint8_t> won,
                    std::span<Coin> price, std::span<std::int32_t> critical, RefScratch& scratch);

// Does bidder `who` win when bidding `new_price` instead, everything else
// unchanged? Full rerun.
bool reference_rebid_wins(std::span<const RefBidder> bids,
                          std::span<const std::uint32_t> capacities,
                          std::span<const std::uint32_t> weights, std::size_t who, Coin new_price,
                          RefScratch& scratch);

struct RefOutcome {
  std::vector<std::uint8_t> won;
  std::vector<Coin> price;
  std::vector<std::int32_t> critical;
};

// Above this many bidders the full-rerun pricing and the per-winner
// minimal-bid search get slow; a warning goes to stderr but the call runs.
inline constexpr std::size_t kReferenceSoftLimit = 8;

// Allocation and prices with an extra self-check: for every winner, a binary
// search over full reruns finds the smallest integer bid that still wins and
// asserts it is the critical value or critical value + 1.
RefOutcome reference_allocate_price(std::span<const Bid> bids, const ProviderSupply& supply);

}  // namespace vmauction
