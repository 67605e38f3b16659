#pragma once

#include <string>

#include "vmauction/fairness.hpp"
#include "vmauction/scenario.hpp"

namespace vmauction {

struct RunResult {
  std::string trace;
  FairnessReport report;
};

// Executes the scenario on a fresh ledger: accounts, one contract session,
// and every scripted party acting at its decision points in deadline order.
// Deterministic: the same scenario always yields the same trace bytes.
// Protocol rejections become trace events; only broken invariants throw.
RunResult run_scenario(const Scenario& scenario);

}  // namespace vmauction
