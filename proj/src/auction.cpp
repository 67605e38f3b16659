#include "vmauction/auction.hpp"

#include <stdexcept>

namespace vmauction {

void validate_bid(const Bid& bid, std::size_t types) {
  if (bid.bundle.size() != types)
    throw std::invalid_argument("bundle must list one count per VM type");
  bool any = false;
  for (auto k : bid.bundle) {
    if (k >= kExactLimit) throw std::invalid_argument("bundle count exceeds 2^32-1");
    any = any || k > 0;
  }
  if (!any) throw std::invalid_argument("bundle must request at least one VM");
  if (bid.price == 0) throw std::invalid_argument("bid price must be positive");
  if (bid.price >= kExactLimit) throw std::invalid_argument("bid price exceeds 2^32-1");
}

void validate_supply(const ProviderSupply& supply) {
  if (supply.capacities.empty()) throw std::invalid_argument("supply must list at least one VM type");
  if (supply.capacities.size() != supply.weights.size())
    throw std::invalid_argument("supply needs one weight per VM type");
  for (auto w : supply.weights) {
    if (w == 0) throw std::invalid_argument("VM weights must be positive");
    if (w >= kExactLimit) throw std::invalid_argument("VM weight exceeds 2^32-1");
  }
  for (auto c : supply.capacities)
    if (c >= kExactLimit) throw std::invalid_argument("capacity exceeds 2^32-1");
}

Coin weighted_size(std::span<const std::uint32_t> bundle, std::span<const std::uint32_t> weights) {
  if (bundle.size() != weights.size())
    throw std::invalid_argument("bundle/weights arity mismatch");
  u128 size = 0;
  for (std::size_t i = 0; i < bundle.size(); ++i)
    size += static_cast<u128>(bundle[i]) * weights[i];
  if (size >= kExactLimit) throw std::invalid_argument("weighted size exceeds 2^32-1");
  return Coin(size);
}

std::pair<Coin, Coin> bid_density(const Bid& bid, std::span<const std::uint32_t> weights) {
  if (bid.price >= kExactLimit) throw std::invalid_argument("bid price exceeds 2^32-1");
  const Coin size = weighted_size(bid.bundle, weights);
  if (size == 0) throw std::invalid_argument("bundle must request at least one VM");
  return {bid.price, size};
}

std::vector<std::uint8_t> serialize_bid(const Bid& bid) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * bid.bundle.size() + 8);
  const auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
  };
  put32(std::uint32_t(bid.bundle.size()));
  for (auto k : bid.bundle) put32(k);
  for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(bid.price >> (8 * i)));
  return out;
}

Bid deserialize_bid(std::span<const std::uint8_t> bytes) {
  const auto get32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[at + i];
    return v;
  };
  if (bytes.size() < 12) throw std::invalid_argument("bid bytes truncated");
  const std::uint32_t n = get32(0);
  if (bytes.size() != 4 + 4 * std::size_t(n) + 8)
    throw std::invalid_argument("bid bytes have wrong length");
  Bid bid;
  bid.bundle.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) bid.bundle[i] = get32(4 + 4 * i);
  Coin price = 0;
  for (int i = 7; i >= 0; --i) price = (price << 8) | bytes[4 + 4 * std::size_t(n) + i];
  bid.price = price;
  return bid;
}

void rank_by_density(std::span<const BidderView> bids, std::span<std::uint32_t> order) {
  const std::size_t n = bids.size();
  for (std::size_t i = 0; i < n; ++i) order[i] = std::uint32_t(i);
  // Insertion sort: n is small and the comparator is branchy 128-bit math.
  for (std::size_t i = 1; i < n; ++i) {
    const std::uint32_t v = order[i];
    std::size_t j = i;
    while (j > 0) {
      const std::uint32_t u = order[j - 1];
      const int cmp = compare_density(bids[v].price, bids[v].size, bids[u].price, bids[u].size);
      if (cmp > 0 || (cmp == 0 && bids[v].tie < bids[u].tie)) {
        order[j] = u;
        --j;
      } else {
        break;
      }
    }
    order[j] = v;
  }
}

void allocate_greedy(std::span<const BidderView> bids, std::span<const std::uint32_t> order,
                     std::span<const std::uint32_t> capacities, std::span<std::uint8_t> won,
                     std::span<std::uint32_t> used) {
  const std::size_t m = capacities.size();
  for (std::size_t d = 0; d < m; ++d) used[d] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) won[order[i]] = 0;
  for (const std::uint32_t j : order) {
    const std::uint32_t* bundle = bids[j].bundle;
    bool fits = true;
    for (std::size_t d = 0; d < m; ++d)
      fits = fits && used[d] + bundle[d] <= capacities[d];
    if (fits) {
      for (std::size_t d = 0; d < m; ++d) used[d] += bundle[d];
      won[j] = 1;
    }
  }
}

void price_critical(std::span<const BidderView> bids, std::span<const std::uint32_t> order,
                    std::span<const std::uint32_t> capacities, std::span<const std::uint8_t> won,
                    std::span<Coin> price, std::span<std::int32_t> critical,
                    std::span<std::uint32_t> used) {
  const std::size_t m = capacities.size();
  for (std::size_t j = 0; j < bids.size(); ++j) {
    price[j] = 0;
    critical[j] = -1;
  }
  for (const std::uint32_t j : order) {
    if (!won[j]) continue;
    // Admission rerun without j; the first originally-denied bidder to get
    // in sets j's price.
    for (std::size_t d = 0; d < m; ++d) used[d] = 0;
    for (const std::uint32_t u : order) {
      if (u == j) continue;
      const std::uint32_t* bundle = bids[u].bundle;
      bool fits = true;
      for (std::size_t d = 0; d < m; ++d)
        fits = fits && used[d] + bundle[d] <= capacities[d];
      if (!fits) continue;
      if (!won[u]) {
        price[j] = critical_charge(bids[u].price, bids[u].size, bids[j].size);
        critical[j] = std::int32_t(u);
        break;
      }
      for (std::size_t d = 0; d < m; ++d) used[d] += bundle[d];
    }
  }
}

AuctionOutcome run_auction_kernel(std::span<const Bid> bids, const ProviderSupply& supply) {
  validate_supply(supply);
  const std::size_t n = bids.size();
  const std::size_t m = supply.capacities.size();
  std::vector<BidderView> views(n);
  for (std::size_t i = 0; i < n; ++i) {
    validate_bid(bids[i], m);
    views[i] = {bids[i].price, weighted_size(bids[i].bundle, supply.weights),
                bids[i].bundle.data(), std::uint32_t(i)};
  }
  AuctionOutcome out;
  out.order.resize(n);
  out.won.resize(n);
  out.price.resize(n);
  out.critical.resize(n);
  std::vector<std::uint32_t> used(m);
  rank_by_density(views, out.order);
  allocate_greedy(views, out.order, supply.capacities, out.won, used);
  price_critical(views, out.order, supply.capacities, out.won, out.price, out.critical, used);
  return out;
}

}  // namespace vmauction
