#include <cstdint>
#include <stdexcept>

#include "doctest.h"
#include "vmauction/exact.hpp"

using namespace vmauction;

namespace {

// Independent integer sqrt: plain binary search, no floating point at all.
std::uint64_t slow_isqrt(u128 v) {
  std::uint64_t lo = 0;
  std::uint64_t hi = 1;
  while (u128(hi) * hi <= v) hi *= 2;  // v < 2^126 keeps this finite
  while (lo + 1 < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (u128(mid) * mid <= v)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("isqrt pinned values") {
  CHECK(isqrt(0) == 0);
  CHECK(isqrt(1) == 1);
  CHECK(isqrt(2) == 1);
  CHECK(isqrt(3) == 1);
  CHECK(isqrt(4) == 2);
  CHECK(isqrt(15) == 3);
  CHECK(isqrt(16) == 4);
  CHECK(isqrt(18) == 4);
  CHECK(isqrt(99) == 9);
  CHECK(isqrt(100) == 10);
  CHECK(isqrt(u128(1) << 62) == (std::uint64_t(1) << 31));
}

TEST_CASE("isqrt against the binary-search oracle") {
  for (std::uint64_t v = 0; v < 3000; ++v) CHECK(isqrt(v) == slow_isqrt(v));
  // Perfect squares and their neighbors, far up the range.
  for (std::uint64_t r : {std::uint64_t(65535), std::uint64_t(1) << 20,
                          (std::uint64_t(1) << 32) - 1, std::uint64_t(1) << 40,
                          (std::uint64_t(1) << 52) + 12345}) {
    const u128 sq = u128(r) * r;
    CHECK(isqrt(sq - 1) == r - 1);
    CHECK(isqrt(sq) == r);
    CHECK(isqrt(sq + 1) == r);
    CHECK(isqrt(sq + 2 * r) == r);
    CHECK(isqrt(sq + 2 * r + 1) == r + 1);
  }
  // Scattered large values.
  std::uint64_t x = 0x9e3779b97f4a7c15ull;
  for (int i = 0; i < 2000; ++i) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    const u128 v = (u128(x) * 0x2545f4914f6cdd1dull) >> 8;
    CHECK(isqrt(v) == slow_isqrt(v));
  }
}

TEST_CASE("density comparison by cross products") {
  // 10/sqrt(4) = 5 = 5/sqrt(1)
  CHECK(compare_density(10, 4, 5, 1) == 0);
  // 3/sqrt(2) > 2/sqrt(1)
  CHECK(compare_density(3, 2, 2, 1) == 1);
  CHECK(compare_density(2, 1, 3, 2) == -1);
  // Equal prices: smaller bundle is denser.
  CHECK(compare_density(7, 3, 7, 4) == 1);
  // Zero price is the bottom of the order.
  CHECK(compare_density(0, 5, 1, 1000000) == -1);
  CHECK(compare_density(0, 5, 0, 9) == 0);
  CHECK_THROWS_AS(compare_density(1, 0, 1, 1), std::domain_error);
  CHECK_THROWS_AS(compare_density(kExactLimit, 1, 1, 1), std::domain_error);
}

TEST_CASE("density threshold test") {
  // 5/sqrt(25) = 1 >= 1
  CHECK(density_at_least(5, 25, 1));
  CHECK_FALSE(density_at_least(4, 25, 1));
  // Eligibility example: price 1, size 4 misses threshold 1.
  CHECK_FALSE(density_at_least(1, 4, 1));
  CHECK(density_at_least(2, 4, 1));
  CHECK(density_at_least(0, 4, 0));
  CHECK_FALSE(density_at_least(0, 4, 1));
}

TEST_CASE("critical charge is the floored rescaled critical density") {
  // Critical bid 3 over size 2, own size 4: floor(sqrt(9*4/2)) = floor(sqrt(18)) = 4.
  CHECK(critical_charge(3, 2, 4) == 4);
  // Same size: the charge is exactly the critical bid.
  CHECK(critical_charge(6, 2, 2) == 6);
  CHECK(critical_charge(10, 4, 4) == 10);
  // Smaller own bundle pays less.
  CHECK(critical_charge(10, 4, 1) == 5);
  CHECK(critical_charge(0, 3, 3) == 0);
  CHECK_THROWS_AS(critical_charge(3, 0, 4), std::domain_error);
  // Brute check of the defining property across a small grid: the charge c is
  // the largest integer with c/sqrt(own) <= crit/sqrt(crit_size).
  for (std::uint64_t b = 0; b <= 30; ++b)
    for (std::uint64_t sc = 1; sc <= 6; ++sc)
      for (std::uint64_t so = 1; so <= 6; ++so) {
        const std::uint64_t c = critical_charge(b, sc, so);
        CHECK(u128(c) * c * sc <= u128(b) * b * so);
        CHECK(u128(c + 1) * (c + 1) * sc > u128(b) * b * so);
      }
}

TEST_CASE("scaled density fixed point") {
  CHECK(scaled_density(1, 1) == kDensityScale);
  CHECK(scaled_density(5, 1) == 5 * kDensityScale);
  CHECK(scaled_density(3, 1) == 3 * kDensityScale);
  // Perfect-square size: exact division by the root.
  CHECK(scaled_density(10, 4) == 5 * kDensityScale);
  // Non-square: floor(p * 2^20 / sqrt(s)); for p=1, s=2 that is
  // floor(2^20/sqrt(2)) = 741455.
  CHECK(scaled_density(1, 2) == 741455);
  CHECK(scaled_density(0, 7) == 0);
  CHECK_THROWS_AS(scaled_density(1, 0), std::domain_error);
}
