#include "vmauction/exact.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vmauction {

namespace {

void require_in_range(std::uint64_t v, const char* what) {
  if (v >= kExactLimit) throw std::domain_error(std::string(what) + " exceeds 2^32-1");
}

}  // namespace

std::uint64_t isqrt(u128 v) {
  if (v == 0) return 0;
  auto r = static_cast<std::uint64_t>(sqrtl(static_cast<long double>(v)));
  // The long double seed is within a few ulps; walk to the exact floor.
  while (r > 0 && static_cast<u128>(r) * r > v) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= v) ++r;
  return r;
}

int compare_density(std::uint64_t price_a, std::uint64_t size_a,
                    std::uint64_t price_b, std::uint64_t size_b) {
  if (size_a == 0 || size_b == 0) throw std::domain_error("density size must be positive");
  require_in_range(price_a, "price");
  require_in_range(price_b, "price");
  require_in_range(size_a, "size");
  require_in_range(size_b, "size");
  const u128 lhs = static_cast<u128>(price_a) * price_a * size_b;
  const u128 rhs = static_cast<u128>(price_b) * price_b * size_a;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

bool density_at_least(std::uint64_t price, std::uint64_t size, std::uint64_t threshold) {
  if (size == 0) throw std::domain_error("density size must be positive");
  require_in_range(price, "price");
  require_in_range(size, "size");
  require_in_range(threshold, "threshold");
  return static_cast<u128>(price) * price >= static_cast<u128>(threshold) * threshold * size;
}

std::uint64_t critical_charge(std::uint64_t crit_price, std::uint64_t crit_size,
                              std::uint64_t own_size) {
  if (crit_size == 0) throw std::domain_error("density size must be positive");
  require_in_range(crit_price, "price");
  require_in_range(crit_size, "size");
  require_in_range(own_size, "size");
  const u128 num = static_cast<u128>(crit_price) * crit_price * own_size;
  return isqrt(num / crit_size);
}

std::uint64_t scaled_density(std::uint64_t price, std::uint64_t size) {
  if (size == 0) throw std::domain_error("density size must be positive");
  require_in_range(price, "price");
  require_in_range(size, "size");
  const u128 scaled = static_cast<u128>(price) * kDensityScale;
  return isqrt(scaled * scaled / size);
}

}  // namespace vmauction
