#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmauction/auction.hpp"
#include "vmauction/session.hpp"

namespace vmauction {

// The closed strategy catalog. Fairness claims are checked over exactly
// these behaviors; a scenario file naming anything else fails validation.
enum class UserStrategy : std::uint8_t {
  Honest,
  AbortAfterCommit,   // commit, then go silent
  OpenAltered,        // open with a bid that does not match the commitment
  StopAfterSegment,   // ladder: confirm segments 1..s, then go silent
  FalseDispute,       // adjudicated: dispute even though the goods are valid
  NeverConfirm,       // ladder: use the goods but never confirm anything
};

enum class ProviderStrategy : std::uint8_t {
  Honest,
  NoDelivery,             // never deliver anything
  InvalidGrant,           // deliver wrong goods, and reseal the same wrong goods
  InvalidGrantThenValid,  // deliver wrong goods, but reseal valid ones
  ShutdownAfterSegment,   // ladder: deliver valid goods, stop serving after segment s
  SilentInDispute,        // deliver wrong goods, then ignore the dispute
};

std::string_view to_string(UserStrategy s);
std::string_view to_string(ProviderStrategy s);

struct UserScript {
  std::string seed;
  std::optional<Coin> balance;  // default: guaranty + the larger revealed price
  Bid bid;
  UserStrategy strategy = UserStrategy::Honest;
  Bid altered;                    // OpenAltered: what actually gets revealed
  std::uint32_t stop_after = 0;   // StopAfterSegment: s
};

struct ProviderScript {
  std::string seed = "provider";
  std::optional<Coin> balance;  // default: exactly the required deposit
  ProviderStrategy strategy = ProviderStrategy::Honest;
  std::uint32_t shutdown_after = 0;  // ShutdownAfterSegment: s
};

// One executable protocol run: parties, bids, trade mechanism, deadlines and
// the scripted behavior of every party.
struct Scenario {
  std::uint64_t sid = 0;
  std::uint64_t nonce_seed = 0;  // commitment nonces derive from this
  Coin guaranty = 0;
  Coin base_price = 0;
  bool adjudicated = true;
  bool abandon_auction = false;  // nobody triggers the allocation: reclaim path
  Deadlines deadlines;
  ProviderSupply supply;
  std::optional<LadderParams> ladder;  // present iff not adjudicated
  ProviderScript provider;
  std::vector<UserScript> users;

  Coin user_balance(std::size_t i) const;
  Coin provider_balance() const;
};

// The adjudicator is a built-in role with a pinned account seed.
inline constexpr std::string_view kAdjudicatorSeed = "adjudicator";

// Parse and validate a scenario document (JSON). Validation failures throw
// std::invalid_argument naming the offending field.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

}  // namespace vmauction
