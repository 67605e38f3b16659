#include "vmauction/ledger.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace vmauction {

std::string Address::hex() const { return vmauction::hex(bytes); }

Address Address::from_seed(std::string_view seed) {
  const Digest d = sha256(seed);
  Address a;
  std::copy(d.begin(), d.begin() + a.bytes.size(), a.bytes.begin());
  return a;
}

Address Address::from_hex(std::string_view text) {
  Address a;
  if (text.size() != 2 * a.bytes.size())
    throw std::invalid_argument("address hex must be 40 digits");
  const auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return unsigned(c - '0');
    if (c >= 'a' && c <= 'f') return unsigned(c - 'a' + 10);
    throw std::invalid_argument("address hex has a non-hex digit");
  };
  for (std::size_t i = 0; i < a.bytes.size(); ++i)
    a.bytes[i] = std::uint8_t(nibble(text[2 * i]) << 4 | nibble(text[2 * i + 1]));
  return a;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Transfer: return "transfer";
    case EventKind::EscrowIn: return "escrow_in";
    case EventKind::EscrowOut: return "escrow_out";
    case EventKind::StateChange: return "state";
    case EventKind::Reject: return "reject";
  }
  throw std::logic_error("unknown event kind");
}

Address Ledger::create_account(std::string_view seed, Coin initial) {
  const Address addr = Address::from_seed(seed);
  if (!seeds_.insert(std::string(seed)).second || balances_.count(addr))
    throw std::invalid_argument("account already exists for seed " + std::string(seed));
  balances_[addr] = initial;
  genesis_[addr] = initial;
  supply_ += initial;
  check_conservation();
  return addr;
}

bool Ledger::authenticate(const Address& addr, std::string_view seed) const {
  return seeds_.count(std::string(seed)) && Address::from_seed(seed) == addr;
}

const LedgerEvent& Ledger::transfer(const Address& from, const Address& to, Coin amount,
                                    std::string note, EventKind kind) {
  if (!balances_.count(from) || !balances_.count(to))
    throw std::invalid_argument("transfer endpoint is not an account");
  if (kind != EventKind::Transfer && kind != EventKind::EscrowIn && kind != EventKind::EscrowOut)
    throw std::invalid_argument("transfer kind must move value");
  if (balances_.at(from) < amount)
    return log(EventKind::Reject, from, to, "insufficient balance: " + std::move(note));
  balances_[from] -= amount;
  balances_[to] += amount;
  events_.push_back({now_, kind, from, to, amount, std::move(note)});
  check_conservation();
  return events_.back();
}

const LedgerEvent& Ledger::log(EventKind kind, const Address& from, const Address& to,
                               std::string note) {
  events_.push_back({now_, kind, from, to, 0, std::move(note)});
  return events_.back();
}

void Ledger::advance_time(Clock to) {
  if (to < now_) throw std::invalid_argument("clock cannot rewind");
  now_ = to;
}

bool Ledger::has_account(const Address& addr) const { return balances_.count(addr) != 0; }

Coin Ledger::balance(const Address& addr) const {
  auto it = balances_.find(addr);
  if (it == balances_.end()) throw std::invalid_argument("unknown account " + addr.hex());
  return it->second;
}

void Ledger::check_conservation() const {
  Coin sum = 0;
  for (const auto& [addr, bal] : balances_) sum += bal;
  if (sum != supply_) throw std::logic_error("conservation violated: balances do not sum to supply");
}

std::string format_event(const LedgerEvent& ev) {
  std::ostringstream os;
  os << ev.at << '|' << to_string(ev.kind) << '|' << ev.from.hex() << '|' << ev.to.hex() << '|'
     << ev.amount << '|' << ev.note;
  return os.str();
}

std::string Ledger::trace_text() const {
  std::ostringstream os;
  for (const auto& [addr, bal] : genesis_) os << "# genesis " << addr.hex() << ' ' << bal << '\n';
  for (const auto& ev : events_) os << format_event(ev) << '\n';
  return os.str();
}

std::map<Address, Coin> Ledger::replay(const std::map<Address, Coin>& genesis,
                                       std::span<const LedgerEvent> events) {
  std::map<Address, Coin> balances = genesis;
  for (const auto& ev : events) {
    if (ev.kind == EventKind::StateChange || ev.kind == EventKind::Reject) continue;
    auto from = balances.find(ev.from);
    auto to = balances.find(ev.to);
    if (from == balances.end() || to == balances.end())
      throw std::invalid_argument("replay: event endpoint missing from genesis");
    if (from->second < ev.amount) throw std::invalid_argument("replay: overdraw at t=" + std::to_string(ev.at));
    from->second -= ev.amount;
    to->second += ev.amount;
  }
  return balances;
}

Digest commitment_digest(std::span<const std::uint8_t> bid_bytes,
                         std::span<const std::uint8_t> nonce,
                         const Address& sender, std::uint64_t sid) {
  if (nonce.size() != kNonceBytes) throw std::invalid_argument("nonce must be exactly 32 bytes");
  std::vector<std::uint8_t> buf;
  buf.reserve(bid_bytes.size() + nonce.size() + sender.bytes.size() + 8);
  buf.insert(buf.end(), bid_bytes.begin(), bid_bytes.end());
  buf.insert(buf.end(), nonce.begin(), nonce.end());
  buf.insert(buf.end(), sender.bytes.begin(), sender.bytes.end());
  for (int i = 0; i < 8; ++i) buf.push_back(std::uint8_t(sid >> (8 * i)));
  return sha256(buf);
}

}  // namespace vmauction
