#pragma once

#include <cstdint>
#include <string>

namespace vmauction {

// Bounds of an exhaustive instance grid. Bidders are enumerated as multisets
// of (bundle, price) configurations: both the engine and the reference break
// density ties by bidder index, so relabeling bidders permutes both results
// identically and one canonical order per multiset covers the space.
struct SweepLimits {
  std::uint32_t max_bidders = 5;
  std::uint32_t max_types = 2;
  std::uint32_t max_capacity = 3;   // capacities range 1..max_capacity
  std::uint64_t max_price = 6;      // prices range 1..max_price
  std::uint32_t max_bundle_entry = 2;  // per-type counts 0..max, not all zero
};

struct SweepResult {
  std::uint64_t instances = 0;
  std::uint64_t winners = 0;          // allocations with a positive charge
  std::uint64_t allocation_mismatches = 0;
  std::uint64_t price_mismatches = 0;
  std::uint64_t rebid_win_failures = 0;   // charge + 1 did not win
  std::uint64_t rebid_lose_failures = 0;  // charge - 1 did not lose
  std::string first_failure;  // human-readable description of the first bad instance

  bool clean() const {
    return allocation_mismatches == 0 && price_mismatches == 0 && rebid_win_failures == 0 &&
           rebid_lose_failures == 0;
  }
  void merge(const SweepResult& other);
};

// Run engine and reference over every instance in the grid, compare winner
// sets and charges exactly, and check for every winner with a positive
// charge that rebidding charge+1 wins and charge-1 loses (full reference
// reruns). `parallel` distributes instance blocks across OpenMP threads when
// OpenMP is available; counter totals are identical either way (only which
// failure lands in `first_failure` can vary with thread interleaving).
SweepResult run_grid_sweep(const SweepLimits& limits, bool parallel);

// Same checks on `count` pseudo-random instances drawn from `seed`: up to 3
// VM types with non-unit weights, up to 6 bidders, prices 0..50. Fully
// deterministic for a given (seed, count).
SweepResult run_fuzz_sweep(std::uint64_t seed, std::uint64_t count);

std::string format_sweep(const SweepResult& result);

}  // namespace vmauction
