#pragma once

#include <cstdint>

namespace vmauction {

using u128 = unsigned __int128;

// Bid prices, weights and weighted bundle sizes must stay below 2^32 so that
// every cross-product below fits in 128 bits. Enforced at scenario validation
// and re-checked here.
inline constexpr std::uint64_t kExactLimit = std::uint64_t(1) << 32;

// Scaled fixed-point densities for the forfeit-pool split: see scaled_density.
inline constexpr std::uint64_t kDensityScale = std::uint64_t(1) << 20;

// floor(sqrt(v)). Newton seed from long double, corrected to exact.
std::uint64_t isqrt(u128 v);

// A bid density is the ratio price / sqrt(size) where size is the weighted
// bundle size. The ratio itself is irrational in general, so densities are
// kept as (price, size) pairs and compared by cross-multiplication:
//   p_a/sqrt(s_a) <=> p_b/sqrt(s_b)   iff   p_a^2*s_b <=> p_b^2*s_a.
// Returns -1, 0, +1. Requires size > 0 on both sides.
int compare_density(std::uint64_t price_a, std::uint64_t size_a,
                    std::uint64_t price_b, std::uint64_t size_b);

// price / sqrt(size) >= threshold, exactly: price^2 >= threshold^2 * size.
bool density_at_least(std::uint64_t price, std::uint64_t size, std::uint64_t threshold);

// Critical-value charge for a winner of weighted size `own_size` whose
// critical bid is (crit_price, crit_size):
//   floor(crit_price/sqrt(crit_size) * sqrt(own_size))
//     = isqrt(floor(crit_price^2 * own_size / crit_size)).
// The identity floor(sqrt(a/b)) = isqrt(floor(a/b)) holds for positive
// integers, so the single flooring inside is exact.
std::uint64_t critical_charge(std::uint64_t crit_price, std::uint64_t crit_size,
                              std::uint64_t own_size);

// Density as a fixed-point integer, floor(price * 2^20 / sqrt(size)), used
// only to weight the forfeit-pool split. Exact whenever size is a perfect
// square; deterministic and platform-independent always.
std::uint64_t scaled_density(std::uint64_t price, std::uint64_t size);

}  // namespace vmauction
