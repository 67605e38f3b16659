#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vmauction/scenario.hpp"

namespace vmauction {

// Per-party classification. `violation` is reserved for an honest party whose
// loss exceeds its proven bound (zero in adjudicated trade, one segment's
// worth per ladder trade); parties that deviated are `penalized`.
enum class Verdict : std::uint8_t { Protected, Penalized, Violation };

std::string_view to_string(Verdict v);

struct PartyOutcome {
  Address addr;
  std::string seed;      // scenario label
  std::string role;      // user | provider | adjudicator
  std::string strategy;  // catalog name
  std::int64_t delta = 0;  // final minus starting balance
  // Service value moved off-ledger: positive for consumed service (users),
  // negative for service given up (provider). net = delta + value.
  std::int64_t value = 0;
  std::int64_t net = 0;
  Verdict verdict = Verdict::Protected;
  std::string clause;  // which fairness clause the verdict instantiates
};

struct FairnessReport {
  std::vector<PartyOutcome> parties;
  bool conservation = false;
  std::string conservation_detail;  // set when conservation is false
  Coin contract_residual = 0;       // escrow left behind after the session
  std::size_t violations = 0;       // violation verdicts + failed conservation

  std::string render() const;  // line-oriented text form
};

// Recomputes every party's outcome from the trace text alone (plus the
// scenario for roles, scripts and parameters) and classifies it. A trace
// that does not replay cleanly fails the conservation check.
FairnessReport check_fairness(const Scenario& scenario, const std::string& trace);

}  // namespace vmauction
