#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace vmauction {

using Digest = std::array<std::uint8_t, 32>;

// FIPS 180-4 SHA-256, one-shot. Used for commitment digests and for deriving
// account addresses from seeds; the simulation never needs a streaming API.
Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

std::string hex(std::span<const std::uint8_t> bytes);

}  // namespace vmauction
