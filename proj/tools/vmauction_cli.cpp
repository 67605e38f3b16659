// Command-line front end: run scenario files, cross-check the auction engine
// against the reference oracle, and fuzz the oracle equivalence.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vmauction/auction.hpp"
#include "vmauction/reference.hpp"
#include "vmauction/runner.hpp"
#include "vmauction/scenario.hpp"
#include "vmauction/sweep.hpp"

namespace {

void write_file(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

int cmd_run(const std::string& scenario_path, const std::string& trace_out,
            const std::string& report_out) {
  const vmauction::Scenario scenario = vmauction::load_scenario(scenario_path);
  const vmauction::RunResult result = vmauction::run_scenario(scenario);
  const std::string report = result.report.render();
  if (!trace_out.empty()) write_file(trace_out, result.trace);
  if (!report_out.empty() && report_out != "-") write_file(report_out, report);
  if (report_out.empty() || report_out == "-") {
    std::cout << report;
    if (!report.empty() && report.back() != '\n') std::cout << '\n';
  }
  return result.report.violations == 0 ? 0 : 1;
}

// Rebuild the auction instance this scenario produces (the bids that get
// opened successfully, in the deterministic address order the session uses)
// and compare engine allocation and charges against the reference oracle.
int cmd_verify(const std::string& scenario_path) {
  const vmauction::Scenario scenario = vmauction::load_scenario(scenario_path);

  struct Entry {
    vmauction::Address addr;
    vmauction::Bid bid;
  };
  std::vector<Entry> entries;
  for (const auto& user : scenario.users) {
    if (user.strategy == vmauction::UserStrategy::AbortAfterCommit ||
        user.strategy == vmauction::UserStrategy::OpenAltered)
      continue;  // never reaches the auction
    entries.push_back({vmauction::Address::from_seed(user.seed), user.bid});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.addr < b.addr; });

  std::vector<vmauction::Bid> bids;
  for (const Entry& e : entries) bids.push_back(e.bid);

  const vmauction::AuctionOutcome engine = vmauction::run_auction_kernel(bids, scenario.supply);
  const vmauction::RefOutcome oracle = vmauction::reference_allocate_price(bids, scenario.supply);

  bool ok = true;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const bool same = engine.won[i] == oracle.won[i] && engine.price[i] == oracle.price[i] &&
                      engine.critical[i] == oracle.critical[i];
    ok = ok && same;
    std::cout << "bidder=" << entries[i].addr.hex() << " won=" << int(engine.won[i])
              << " charge=" << engine.price[i] << " oracle_won=" << int(oracle.won[i])
              << " oracle_charge=" << oracle.price[i] << (same ? "" : " MISMATCH") << '\n';
  }
  std::cout << (ok ? "verify=ok" : "verify=failed") << " bidders=" << bids.size() << '\n';
  return ok ? 0 : 1;
}

int cmd_fuzz(std::uint64_t seed, std::uint64_t count) {
  const vmauction::SweepResult result = vmauction::run_fuzz_sweep(seed, count);
  std::cout << vmauction::format_sweep(result) << '\n';
  return result.clean() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic VM-auction protocol simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_out;
  std::string report_out;
  CLI::App* run = app.add_subcommand("run", "Execute a scenario and print its fairness report");
  run->add_option("scenario", scenario_path, "Scenario file (JSON)")->required();
  run->add_option("--trace", trace_out, "Write the ledger trace here ('-' for stdout)");
  run->add_option("--report", report_out, "Write the fairness report here ('-' for stdout)");

  std::string verify_path;
  CLI::App* verify =
      app.add_subcommand("verify", "Cross-check the engine against the reference oracle");
  verify->add_option("scenario", verify_path, "Scenario file (JSON)")->required();

  std::uint64_t seed = 1;
  std::uint64_t count = 5000;
  CLI::App* fuzz = app.add_subcommand("fuzz", "Random instances through the oracle equivalence");
  fuzz->add_option("--seed", seed, "RNG seed");
  fuzz->add_option("--count", count, "Number of instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario_path, trace_out, report_out);
    if (verify->parsed()) return cmd_verify(verify_path);
    return cmd_fuzz(seed, count);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
}
