#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vmauction/sha256.hpp"

namespace vmauction {

using Coin = std::uint64_t;
using Clock = std::uint64_t;

// 20-byte account identifier, derived from a seed string. Total order on the
// raw bytes gives the deterministic tie-break used everywhere.
struct Address {
  std::array<std::uint8_t, 20> bytes{};
  auto operator<=>(const Address&) const = default;
  std::string hex() const;
  static Address from_seed(std::string_view seed);
  // Parses exactly 40 lowercase hex digits; throws std::invalid_argument.
  static Address from_hex(std::string_view text);
};

enum class EventKind : std::uint8_t { Transfer, EscrowIn, EscrowOut, StateChange, Reject };

std::string_view to_string(EventKind kind);

struct LedgerEvent {
  Clock at = 0;
  EventKind kind = EventKind::Transfer;
  Address from;
  Address to;
  Coin amount = 0;
  std::string note;
};

// Single-node token ledger: accounts, balances, append-only event log and a
// monotone logical clock. The sum of balances is checked against the minted
// supply after every mutation. Value can neither appear nor vanish; failed
// transfers append a Reject event and move nothing.
class Ledger {
 public:
  // Seed doubles as the authentication secret: an action claiming to come
  // from an address must present the seed it was derived from.
  Address create_account(std::string_view seed, Coin initial);

  bool authenticate(const Address& addr, std::string_view seed) const;

  // `escrow` marks the contract-held side of a transfer so traces can show
  // escrow flows distinctly; balances move identically either way.
  const LedgerEvent& transfer(const Address& from, const Address& to, Coin amount,
                              std::string note, EventKind kind = EventKind::Transfer);
  const LedgerEvent& log(EventKind kind, const Address& from, const Address& to,
                         std::string note);

  Clock now() const { return now_; }
  void advance_time(Clock to);

  bool has_account(const Address& addr) const;
  Coin balance(const Address& addr) const;
  Coin total_supply() const { return supply_; }

  const std::vector<LedgerEvent>& events() const { return events_; }
  const std::map<Address, Coin>& genesis() const { return genesis_; }

  // One line per genesis account followed by one line per event; the byte-
  // identical replay target for determinism checks.
  std::string trace_text() const;

  // Fold balance-moving events over a genesis snapshot. Throws if any step
  // would overdraw, which is how tampered traces surface.
  static std::map<Address, Coin> replay(const std::map<Address, Coin>& genesis,
                                        std::span<const LedgerEvent> events);

 private:
  void check_conservation() const;

  std::map<Address, Coin> balances_;
  std::map<Address, Coin> genesis_;
  std::set<std::string> seeds_;
  std::vector<LedgerEvent> events_;
  Clock now_ = 0;
  Coin supply_ = 0;
};

std::string format_event(const LedgerEvent& ev);

// λ = 256: commitment nonces are exactly 32 bytes.
inline constexpr std::size_t kNonceBytes = 32;

// Commitment digest binding bid bytes, nonce, sender address and session id.
Digest commitment_digest(std::span<const std::uint8_t> bid_bytes,
                         std::span<const std::uint8_t> nonce,
                         const Address& sender, std::uint64_t sid);

}  // namespace vmauction
