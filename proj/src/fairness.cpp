#include "vmauction/fairness.hpp"

#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vmauction/exact.hpp"

namespace vmauction {

namespace {

struct ParsedEvent {
  Clock at = 0;
  std::string kind;
  Address from;
  Address to;
  Coin amount = 0;
  std::string note;
};

struct ParsedTrace {
  std::map<Address, Coin> genesis;
  std::vector<ParsedEvent> events;
};

[[noreturn]] void bad(std::size_t line_no, const std::string& why) {
  throw std::invalid_argument("trace line " + std::to_string(line_no) + ": " + why);
}

std::uint64_t parse_u64(std::string_view text, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    bad(line_no, "bad number '" + std::string(text) + "'");
  return v;
}

ParsedTrace parse_trace(const std::string& text) {
  ParsedTrace out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool in_genesis = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# genesis ", 0) == 0) {
      if (!in_genesis) bad(line_no, "genesis line after events");
      std::string_view rest(line);
      rest.remove_prefix(10);
      const auto space = rest.find(' ');
      if (space == std::string_view::npos) bad(line_no, "malformed genesis line");
      out.genesis.emplace(Address::from_hex(rest.substr(0, space)),
                          parse_u64(rest.substr(space + 1), line_no));
      continue;
    }
    in_genesis = false;
    // at|kind|from|to|amount|note
    std::string_view rest(line);
    std::array<std::string_view, 5> head;
    for (auto& part : head) {
      const auto bar = rest.find('|');
      if (bar == std::string_view::npos) bad(line_no, "expected 6 |-separated fields");
      part = rest.substr(0, bar);
      rest.remove_prefix(bar + 1);
    }
    ParsedEvent ev;
    ev.at = parse_u64(head[0], line_no);
    ev.kind = std::string(head[1]);
    try {
      ev.from = Address::from_hex(head[2]);
      ev.to = Address::from_hex(head[3]);
    } catch (const std::invalid_argument& e) {
      bad(line_no, e.what());
    }
    ev.amount = parse_u64(head[4], line_no);
    ev.note = std::string(rest);
    if (!out.events.empty() && ev.at < out.events.back().at)
      bad(line_no, "time runs backwards");
    out.events.push_back(std::move(ev));
  }
  return out;
}

// Balance fold with overdraw/endpoint checks; total supply is conserved by
// construction once every step is a legal move.
std::map<Address, Coin> replay_parsed(const ParsedTrace& trace) {
  std::map<Address, Coin> balances = trace.genesis;
  std::size_t n = 0;
  for (const auto& ev : trace.events) {
    ++n;
    if (ev.kind == "state" || ev.kind == "reject") continue;
    if (ev.kind != "transfer" && ev.kind != "escrow_in" && ev.kind != "escrow_out")
      throw std::invalid_argument("trace event " + std::to_string(n) + ": unknown kind '" +
                                  ev.kind + "'");
    auto from = balances.find(ev.from);
    auto to = balances.find(ev.to);
    if (from == balances.end() || to == balances.end())
      throw std::invalid_argument("trace event " + std::to_string(n) +
                                  ": endpoint not in genesis");
    if (from->second < ev.amount)
      throw std::invalid_argument("trace event " + std::to_string(n) + ": overdraw");
    from->second -= ev.amount;
    to->second += ev.amount;
  }
  return balances;
}

bool note_starts(const std::string& note, std::string_view prefix) {
  return note.rfind(prefix, 0) == 0;
}

// Reads the value of "key=<digits>" anywhere in the note; 0 when absent.
std::uint64_t note_field(const std::string& note, const std::string& key) {
  const auto at = note.find(key + "=");
  if (at == std::string::npos) return 0;
  std::uint64_t v = 0;
  const char* begin = note.data() + at + key.size() + 1;
  std::from_chars(begin, note.data() + note.size(), v);
  return v;
}

struct WinnerFacts {
  Coin price = 0;
  bool won = false;
  bool delivered = false;
  bool completed = false;    // charge paid to the provider
  bool compensated = false;
  std::uint32_t confirmed = 0;
  std::uint32_t served = 0;
};

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Protected: return "protected";
    case Verdict::Penalized: return "penalized";
    case Verdict::Violation: return "violation";
  }
  throw std::logic_error("unknown verdict");
}

FairnessReport check_fairness(const Scenario& scenario, const std::string& trace) {
  FairnessReport report;

  ParsedTrace parsed;
  std::map<Address, Coin> final_balances;
  try {
    parsed = parse_trace(trace);
    final_balances = replay_parsed(parsed);
  } catch (const std::invalid_argument& e) {
    report.conservation = false;
    report.conservation_detail = e.what();
    report.violations = 1;
    return report;
  }
  report.conservation = true;

  const Address provider = Address::from_seed(scenario.provider.seed);
  const Address contract = Address::from_seed("contract#" + std::to_string(scenario.sid));

  std::map<Address, WinnerFacts> facts;
  Coin provider_trade_income = 0;  // adjudicated completions, straight from amounts
  for (const auto& ev : parsed.events) {
    if (ev.kind == "state") {
      if (note_starts(ev.note, "auction rank=")) {
        WinnerFacts& f = facts[ev.to];
        f.won = note_field(ev.note, "won") != 0;
        f.price = note_field(ev.note, "price");
      } else if (note_starts(ev.note, "deliver sealed-grant")) {
        facts[ev.to].delivered = true;
      } else if (note_starts(ev.note, "confirm segment=")) {
        WinnerFacts& f = facts[ev.from];
        f.confirmed = std::max<std::uint32_t>(
            f.confirmed, std::uint32_t(note_field(ev.note, "segment")));
      } else if (note_starts(ev.note, "serve segment=")) {
        WinnerFacts& f = facts[ev.to];
        f.served =
            std::max<std::uint32_t>(f.served, std::uint32_t(note_field(ev.note, "segment")));
      }
    } else if (ev.kind == "escrow_out") {
      if (note_starts(ev.note, "trade-payment winner=")) {
        const std::string hex = ev.note.substr(std::string("trade-payment winner=").size(), 40);
        facts[Address::from_hex(hex)].completed = true;
        provider_trade_income += ev.amount;
      } else if (note_starts(ev.note, "ladder-payment winner=")) {
        facts[Address::from_hex(
                  ev.note.substr(std::string("ladder-payment winner=").size(), 40))]
            .completed = true;
      } else if (note_starts(ev.note, "compensation ")) {
        facts[ev.to].compensated = true;
      }
    }
  }

  const auto delta_of = [&](const Address& a) -> std::int64_t {
    const Coin before = parsed.genesis.count(a) ? parsed.genesis.at(a) : 0;
    const Coin after = final_balances.count(a) ? final_balances.at(a) : 0;
    return std::int64_t(after) - std::int64_t(before);
  };
  const std::uint32_t segments = scenario.ladder ? scenario.ladder->segments : 0;
  const auto pro_rata = [&](std::uint32_t count, Coin price) -> std::int64_t {
    return std::int64_t(static_cast<u128>(count) * price / segments);
  };

  // Users.
  for (std::size_t i = 0; i < scenario.users.size(); ++i) {
    const UserScript& script = scenario.users[i];
    PartyOutcome out;
    out.addr = Address::from_seed(script.seed);
    out.seed = script.seed;
    out.role = "user";
    out.strategy = std::string(to_string(script.strategy));
    out.delta = delta_of(out.addr);
    const WinnerFacts f = facts.count(out.addr) ? facts.at(out.addr) : WinnerFacts{};
    if (scenario.ladder) {
      out.value = f.won ? pro_rata(f.confirmed, f.price) : 0;
    } else {
      out.value = (f.won && f.completed && !f.compensated) ? std::int64_t(f.price) : 0;
    }
    out.net = out.delta + out.value;
    if (script.strategy != UserStrategy::Honest) {
      out.verdict = Verdict::Penalized;
      out.clause = "deviation:" + out.strategy;
    } else if (out.net >= 0) {
      out.verdict = Verdict::Protected;
      out.clause = "no-loss";
    } else {
      out.verdict = Verdict::Violation;
      out.clause = "loss-exceeds-bound";
    }
    report.parties.push_back(std::move(out));
  }

  // Provider.
  {
    PartyOutcome out;
    out.addr = provider;
    out.seed = scenario.provider.seed;
    out.role = "provider";
    out.strategy = std::string(to_string(scenario.provider.strategy));
    out.delta = delta_of(provider);
    std::int64_t served_value = 0;
    std::int64_t ladder_tolerance = 0;
    for (const auto& [addr, f] : facts) {
      if (!f.won) continue;
      if (scenario.ladder) {
        served_value += pro_rata(f.served, f.price);
        // One unconfirmed segment per delivered trade is the proven exposure.
        if (f.delivered) ladder_tolerance += std::int64_t((f.price + segments - 1) / segments);
      }
    }
    if (!scenario.ladder) served_value = std::int64_t(provider_trade_income);
    out.value = -served_value;
    out.net = out.delta + out.value;
    if (scenario.provider.strategy != ProviderStrategy::Honest) {
      out.verdict = Verdict::Penalized;
      out.clause = "deviation:" + out.strategy;
    } else if (out.net >= 0) {
      out.verdict = Verdict::Protected;
      out.clause = "no-loss";
    } else if (scenario.ladder && out.net >= -ladder_tolerance) {
      out.verdict = Verdict::Protected;
      out.clause = "ladder-tolerance";
    } else {
      out.verdict = Verdict::Violation;
      out.clause = "loss-exceeds-bound";
    }
    report.parties.push_back(std::move(out));
  }

  // Adjudicator.
  if (scenario.adjudicated) {
    PartyOutcome out;
    out.addr = Address::from_seed(kAdjudicatorSeed);
    out.seed = std::string(kAdjudicatorSeed);
    out.role = "adjudicator";
    out.strategy = "honest";
    out.delta = delta_of(out.addr);
    out.net = out.delta;
    out.verdict = Verdict::Protected;
    out.clause = "no-stake";
    report.parties.push_back(std::move(out));
  }

  report.contract_residual = final_balances.count(contract) ? final_balances.at(contract) : 0;
  for (const auto& p : report.parties)
    if (p.verdict == Verdict::Violation) ++report.violations;
  return report;
}

std::string FairnessReport::render() const {
  std::ostringstream os;
  for (const auto& p : parties)
    os << "party=" << p.addr.hex() << " seed=" << p.seed << " role=" << p.role
       << " strategy=" << p.strategy << " delta=" << p.delta << " value=" << p.value
       << " net=" << p.net << " verdict=" << to_string(p.verdict) << " clause=" << p.clause
       << '\n';
  if (conservation)
    os << "conservation=ok\n";
  else
    os << "conservation=failed detail=" << conservation_detail << '\n';
  os << "contract_residual=" << contract_residual << '\n';
  os << "violations=" << violations << '\n';
  return os.str();
}

}  // namespace vmauction
