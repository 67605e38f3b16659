#include "vmauction/reference.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

namespace vmauction {

namespace {

std::uint64_t ref_isqrt(u128 v) {
  // Plain binary search; inputs stay below 2^96 so the root fits 49 bits.
  std::uint64_t lo = 0, hi = std::uint64_t(1) << 49;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (static_cast<u128>(mid) * mid <= v) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

// price_a/sqrt(size_a) > price_b/sqrt(size_b), by squaring both sides.
bool ref_denser(Coin price_a, Coin size_a, Coin price_b, Coin size_b) {
  return static_cast<u128>(price_a) * price_a * size_b >
         static_cast<u128>(price_b) * price_b * size_a;
}

void ref_sizes(std::span<const RefBidder> bids, std::span<const std::uint32_t> weights,
               std::span<Coin> size) {
  for (std::size_t j = 0; j < bids.size(); ++j) {
    Coin s = 0;
    for (std::size_t d = 0; d < weights.size(); ++d) s += Coin(bids[j].bundle[d]) * weights[d];
    if (s == 0) throw std::invalid_argument("reference: empty bundle");
    size[j] = s;
  }
}

void ref_order(std::span<const RefBidder> bids, std::span<const Coin> size,
               std::span<std::uint32_t> order) {
  for (std::size_t j = 0; j < bids.size(); ++j) order[j] = std::uint32_t(j);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return ref_denser(bids[a].price, size[a], bids[b].price, size[b]);
  });
}

// Greedy admission over `order`, skipping bidder `skip` (size() = skip none).
void ref_admit(std::span<const RefBidder> bids, std::span<const std::uint32_t> capacities,
               std::span<const std::uint32_t> order, std::size_t skip,
               std::span<std::uint8_t> won, std::span<std::uint32_t> used) {
  std::fill(used.begin(), used.end(), 0u);
  std::fill(won.begin(), won.end(), std::uint8_t(0));
  for (const std::uint32_t j : order) {
    if (j == skip) continue;
    bool fits = true;
    for (std::size_t d = 0; d < capacities.size(); ++d)
      if (used[d] + bids[j].bundle[d] > capacities[d]) fits = false;
    if (!fits) continue;
    for (std::size_t d = 0; d < capacities.size(); ++d) used[d] += bids[j].bundle[d];
    won[j] = 1;
  }
}

}  // namespace

void reference_core(std::span<const RefBidder> bids, std::span<const std::uint32_t> capacities,
                    std::span<const std::uint32_t> weights, std::span<std::uint8_t> won,
                    std::span<Coin> price, std::span<std::int32_t> critical, RefScratch& scratch) {
  const std::size_t n = bids.size();
  ref_sizes(bids, weights, scratch.size);
  ref_order(bids, scratch.size, scratch.order);
  ref_admit(bids, capacities, scratch.order, n, won, scratch.used);
  for (std::size_t j = 0; j < n; ++j) {
    price[j] = 0;
    critical[j] = -1;
    if (!won[j]) continue;
    // The critical bidder is the best-ranked one that loses with j present
    // and wins with j absent; j pays its own size at that bidder's density.
    ref_admit(bids, capacities, scratch.order, j, scratch.won_without, scratch.used);
    for (const std::uint32_t u : scratch.order) {
      if (u == j || won[u] || !scratch.won_without[u]) continue;
      const u128 num = static_cast<u128>(bids[u].price) * bids[u].price * scratch.size[j];
      price[j] = ref_isqrt(num / scratch.size[u]);
      critical[j] = std::int32_t(u);
      break;
    }
  }
}

bool reference_rebid_wins(std::span<const RefBidder> bids,
                          std::span<const std::uint32_t> capacities,
                          std::span<const std::uint32_t> weights, std::size_t who, Coin new_price,
                          RefScratch& scratch) {
  std::copy(bids.begin(), bids.end(), scratch.rebid.begin());
  scratch.rebid[who].price = new_price;
  std::span<const RefBidder> changed(scratch.rebid.data(), bids.size());
  ref_sizes(changed, weights, scratch.size);
  ref_order(changed, scratch.size, scratch.order);
  ref_admit(changed, capacities, scratch.order, bids.size(), scratch.won_without, scratch.used);
  return scratch.won_without[who] != 0;
}

RefOutcome reference_allocate_price(std::span<const Bid> bids, const ProviderSupply& supply) {
  const std::size_t n = bids.size();
  if (n > kReferenceSoftLimit)
    std::cerr << "reference: " << n << " bidders is above the soft limit of "
              << kReferenceSoftLimit << "; the full reruns will be slow\n";
  std::vector<RefBidder> views(n);
  for (std::size_t j = 0; j < n; ++j) views[j] = {bids[j].price, bids[j].bundle.data()};
  RefScratch scratch;
  scratch.resize(n, supply.capacities.size());
  RefOutcome out;
  out.won.resize(n);
  out.price.resize(n);
  out.critical.resize(n);
  reference_core(views, supply.capacities, supply.weights, out.won, out.price, out.critical,
                 scratch);
  // Self-check: the smallest integer bid that still wins, found by plain
  // binary search over full reruns, must be the critical value or one above
  // it (the exact threshold bid wins or loses with the density tie-break).
  for (std::size_t j = 0; j < n; ++j) {
    if (!out.won[j]) continue;
    Coin lo = 0, hi = bids[j].price;  // the actual bid is known to win
    while (lo < hi) {
      const Coin mid = lo + (hi - lo) / 2;
      if (reference_rebid_wins(views, supply.capacities, supply.weights, j, mid, scratch))
        hi = mid;
      else
        lo = mid + 1;
    }
    if (lo != out.price[j] && lo != out.price[j] + 1)
      throw std::logic_error("reference: minimal winning bid disagrees with the critical value");
  }
  return out;
}

}  // namespace vmauction
