#include "vmauction/sweep.hpp"

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "vmauction/auction.hpp"
#include "vmauction/reference.hpp"

namespace vmauction {

namespace {

// Fixed kernel bounds so one instance lives entirely on the stack.
constexpr std::size_t kMaxN = 8;
constexpr std::size_t kMaxM = 4;

struct Config {
  std::array<std::uint32_t, kMaxM> bundle{};
  Coin price = 0;
  Coin size = 0;  // weighted size under the instance's weights
};

struct Instance {
  std::size_t n = 0;
  std::size_t m = 0;
  std::array<std::uint32_t, kMaxM> capacities{};
  std::array<std::uint32_t, kMaxM> weights{};
  std::array<Config, kMaxN> bidder{};
};

std::string describe(const Instance& ins) {
  std::ostringstream os;
  os << "types=" << ins.m << " caps=";
  for (std::size_t t = 0; t < ins.m; ++t) os << (t ? "," : "") << ins.capacities[t];
  os << " weights=";
  for (std::size_t t = 0; t < ins.m; ++t) os << (t ? "," : "") << ins.weights[t];
  os << " bidders=";
  for (std::size_t i = 0; i < ins.n; ++i) {
    os << (i ? " " : "") << "[";
    for (std::size_t t = 0; t < ins.m; ++t) os << (t ? "," : "") << ins.bidder[i].bundle[t];
    os << "@" << ins.bidder[i].price << "]";
  }
  return os.str();
}

void check_instance(const Instance& ins, SweepResult& out, RefScratch& scratch) {
  std::array<BidderView, kMaxN> views;
  std::array<RefBidder, kMaxN> refs;
  for (std::size_t i = 0; i < ins.n; ++i) {
    views[i] = BidderView{ins.bidder[i].price, ins.bidder[i].size, ins.bidder[i].bundle.data(),
                          static_cast<std::uint32_t>(i)};
    refs[i] = RefBidder{ins.bidder[i].price, ins.bidder[i].bundle.data()};
  }
  std::array<std::uint32_t, kMaxN> order;
  std::array<std::uint8_t, kMaxN> won;
  std::array<std::uint8_t, kMaxN> ref_won;
  std::array<Coin, kMaxN> price;
  std::array<Coin, kMaxN> ref_price;
  std::array<std::int32_t, kMaxN> critical;
  std::array<std::int32_t, kMaxN> ref_critical;
  std::array<std::uint32_t, kMaxM> used;

  const std::span<const BidderView> bids(views.data(), ins.n);
  const std::span<const std::uint32_t> caps(ins.capacities.data(), ins.m);
  rank_by_density(bids, {order.data(), ins.n});
  allocate_greedy(bids, {order.data(), ins.n}, caps, {won.data(), ins.n}, {used.data(), ins.m});
  price_critical(bids, {order.data(), ins.n}, caps, {won.data(), ins.n}, {price.data(), ins.n},
                 {critical.data(), ins.n}, {used.data(), ins.m});

  const std::span<const RefBidder> ref_bids(refs.data(), ins.n);
  const std::span<const std::uint32_t> weights(ins.weights.data(), ins.m);
  scratch.resize(ins.n, ins.m);
  reference_core(ref_bids, caps, weights, {ref_won.data(), ins.n}, {ref_price.data(), ins.n},
                 {ref_critical.data(), ins.n}, scratch);

  ++out.instances;
  const auto note = [&](const char* what, std::size_t who) {
    if (!out.first_failure.empty()) return;
    std::ostringstream os;
    os << what << " bidder=" << who << " at " << describe(ins);
    out.first_failure = os.str();
  };

  for (std::size_t i = 0; i < ins.n; ++i) {
    if (won[i] != ref_won[i]) {
      ++out.allocation_mismatches;
      note("allocation-mismatch", i);
      return;
    }
  }
  for (std::size_t i = 0; i < ins.n; ++i) {
    if (price[i] != ref_price[i]) {
      ++out.price_mismatches;
      note("price-mismatch", i);
      return;
    }
    if (critical[i] != ref_critical[i]) {
      ++out.price_mismatches;
      note("critical-bidder-mismatch", i);
      return;
    }
  }
  for (std::size_t i = 0; i < ins.n; ++i) {
    if (!won[i] || price[i] == 0) continue;
    ++out.winners;
    if (!reference_rebid_wins(ref_bids, caps, weights, i, price[i] + 1, scratch)) {
      ++out.rebid_win_failures;
      note("rebid-above-critical-lost", i);
    }
    if (reference_rebid_wins(ref_bids, caps, weights, i, price[i] - 1, scratch)) {
      ++out.rebid_lose_failures;
      note("rebid-below-critical-won", i);
    }
  }
}

// All (bundle, price) bidder configurations for `m` types under the limits,
// in a fixed odometer order. Grid instances use unit weights.
std::vector<Config> enumerate_configs(const SweepLimits& lim, std::size_t m) {
  std::vector<Config> out;
  std::array<std::uint32_t, kMaxM> b{};
  while (true) {
    Coin size = 0;
    for (std::size_t t = 0; t < m; ++t) size += b[t];
    if (size > 0) {
      for (Coin p = 1; p <= lim.max_price; ++p) {
        Config c;
        c.bundle = b;
        c.price = p;
        c.size = size;
        out.push_back(c);
      }
    }
    std::size_t t = 0;
    while (t < m && b[t] == lim.max_bundle_entry) b[t++] = 0;
    if (t == m) break;
    ++b[t];
  }
  return out;
}

// One parallel work item: all multisets of size `n` whose smallest config
// index is `first`, under one capacity vector.
struct Task {
  std::size_t m = 0;
  std::array<std::uint32_t, kMaxM> caps{};
  std::size_t n = 0;
  std::size_t first = 0;
};

void run_task(const Task& task, const std::vector<Config>& cfg, SweepResult& out,
              RefScratch& scratch) {
  Instance ins;
  ins.m = task.m;
  ins.n = task.n;
  ins.capacities = task.caps;
  ins.weights.fill(1);
  std::array<std::size_t, kMaxN> idx{};
  for (std::size_t i = 0; i < task.n; ++i) idx[i] = task.first;
  while (true) {
    for (std::size_t i = 0; i < task.n; ++i) ins.bidder[i] = cfg[idx[i]];
    check_instance(ins, out, scratch);
    std::size_t p = task.n;
    while (true) {
      if (p == 1) return;  // idx[0] stays pinned to task.first
      --p;
      if (idx[p] + 1 < cfg.size()) {
        ++idx[p];
        for (std::size_t q = p + 1; q < task.n; ++q) idx[q] = idx[p];
        break;
      }
    }
  }
}

std::vector<Task> build_tasks(const SweepLimits& lim,
                              const std::vector<std::vector<Config>>& cfg) {
  std::vector<Task> tasks;
  for (std::size_t m = 1; m <= lim.max_types; ++m) {
    std::array<std::uint32_t, kMaxM> caps{};
    for (std::size_t t = 0; t < m; ++t) caps[t] = 1;
    while (true) {
      for (std::size_t n = 1; n <= lim.max_bidders; ++n)
        for (std::size_t first = 0; first < cfg[m].size(); ++first)
          tasks.push_back(Task{m, caps, n, first});
      std::size_t t = 0;
      while (t < m && caps[t] == lim.max_capacity) caps[t++] = 1;
      if (t == m) break;
      ++caps[t];
    }
  }
  return tasks;
}

}  // namespace

void SweepResult::merge(const SweepResult& other) {
  instances += other.instances;
  winners += other.winners;
  allocation_mismatches += other.allocation_mismatches;
  price_mismatches += other.price_mismatches;
  rebid_win_failures += other.rebid_win_failures;
  rebid_lose_failures += other.rebid_lose_failures;
  if (first_failure.empty()) first_failure = other.first_failure;
}

SweepResult run_grid_sweep(const SweepLimits& limits, bool parallel) {
  if (limits.max_bidders > kMaxN || limits.max_types > kMaxM || limits.max_types == 0 ||
      limits.max_bidders == 0 || limits.max_capacity == 0 || limits.max_price == 0 ||
      limits.max_bundle_entry == 0)
    throw std::invalid_argument("sweep limits out of range");
  std::vector<std::vector<Config>> cfg(limits.max_types + 1);
  for (std::size_t m = 1; m <= limits.max_types; ++m) cfg[m] = enumerate_configs(limits, m);
  const std::vector<Task> tasks = build_tasks(limits, cfg);

  SweepResult total;
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      SweepResult local;
      RefScratch scratch;
#pragma omp for schedule(dynamic) nowait
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(tasks.size()); ++i)
        run_task(tasks[i], cfg[tasks[i].m], local, scratch);
#pragma omp critical
      total.merge(local);
    }
    return total;
#endif
  }
  RefScratch scratch;
  for (const Task& t : tasks) run_task(t, cfg[t.m], total, scratch);
  return total;
}

SweepResult run_fuzz_sweep(std::uint64_t seed, std::uint64_t count) {
  std::mt19937_64 rng(seed);
  SweepResult out;
  RefScratch scratch;
  for (std::uint64_t k = 0; k < count; ++k) {
    Instance ins;
    ins.m = 1 + rng() % 3;
    ins.n = 1 + rng() % 6;
    for (std::size_t t = 0; t < ins.m; ++t) {
      ins.capacities[t] = 1 + std::uint32_t(rng() % 4);
      ins.weights[t] = 1 + std::uint32_t(rng() % 3);
    }
    for (std::size_t i = 0; i < ins.n; ++i) {
      Config& c = ins.bidder[i];
      bool any = false;
      for (std::size_t t = 0; t < ins.m; ++t) {
        c.bundle[t] = std::uint32_t(rng() % 4);
        any = any || c.bundle[t] > 0;
      }
      if (!any) c.bundle[rng() % ins.m] = 1 + std::uint32_t(rng() % 3);
      c.price = rng() % 51;
      c.size = weighted_size({c.bundle.data(), ins.m}, {ins.weights.data(), ins.m});
    }
    check_instance(ins, out, scratch);
  }
  return out;
}

std::string format_sweep(const SweepResult& result) {
  std::ostringstream os;
  os << "instances=" << result.instances << " winners=" << result.winners
     << " allocation_mismatches=" << result.allocation_mismatches
     << " price_mismatches=" << result.price_mismatches
     << " rebid_win_failures=" << result.rebid_win_failures
     << " rebid_lose_failures=" << result.rebid_lose_failures
     << " clean=" << (result.clean() ? "yes" : "no");
  if (!result.first_failure.empty()) os << "\nfirst-failure: " << result.first_failure;
  return os.str();
}

}  // namespace vmauction
