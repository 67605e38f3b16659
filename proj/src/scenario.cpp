#include "vmauction/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vmauction {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("scenario field '" + field + "': " + why);
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

void check_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) fail(path + "." + key, "unknown field");
}

std::uint64_t get_u64(const json& j, const std::string& field) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                 j.get<std::int64_t>() < 0))
    fail(field, "must be a non-negative integer");
  return j.get<std::uint64_t>();
}

std::uint32_t get_u32(const json& j, const std::string& field) {
  const std::uint64_t v = get_u64(j, field);
  if (v > 0xffffffffULL) fail(field, "exceeds 2^32-1");
  return std::uint32_t(v);
}

std::string get_str(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "must be a string");
  std::string s = j.get<std::string>();
  if (s.empty()) fail(field, "must not be empty");
  return s;
}

std::vector<std::uint32_t> get_u32_list(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "must be an array");
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_u32(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

UserStrategy user_strategy_named(const std::string& name, const std::string& field) {
  if (name == "honest") return UserStrategy::Honest;
  if (name == "abort_after_commit") return UserStrategy::AbortAfterCommit;
  if (name == "open_altered") return UserStrategy::OpenAltered;
  if (name == "stop_after_segment") return UserStrategy::StopAfterSegment;
  if (name == "false_dispute") return UserStrategy::FalseDispute;
  if (name == "never_confirm") return UserStrategy::NeverConfirm;
  fail(field, "unknown user strategy '" + name + "'");
}

ProviderStrategy provider_strategy_named(const std::string& name, const std::string& field) {
  if (name == "honest") return ProviderStrategy::Honest;
  if (name == "no_delivery") return ProviderStrategy::NoDelivery;
  if (name == "invalid_grant") return ProviderStrategy::InvalidGrant;
  if (name == "invalid_grant_then_valid") return ProviderStrategy::InvalidGrantThenValid;
  if (name == "shutdown_after_segment") return ProviderStrategy::ShutdownAfterSegment;
  if (name == "silent_in_dispute") return ProviderStrategy::SilentInDispute;
  fail(field, "unknown provider strategy '" + name + "'");
}

void parse_user_strategy(const json& j, const std::string& field, UserScript& user) {
  if (j.is_string()) {
    user.strategy = user_strategy_named(j.get<std::string>(), field);
    if (user.strategy == UserStrategy::OpenAltered) fail(field, "open_altered needs a bid object");
    if (user.strategy == UserStrategy::StopAfterSegment)
      fail(field, "stop_after_segment needs a segment");
    return;
  }
  if (!j.is_object()) fail(field, "must be a strategy name or object");
  user.strategy = user_strategy_named(get_str(member(j, field, "name"), field + ".name"), field);
  switch (user.strategy) {
    case UserStrategy::OpenAltered:
      check_keys(j, field, {"name", "bundle", "price"});
      user.altered.bundle = get_u32_list(member(j, field, "bundle"), field + ".bundle");
      user.altered.price = get_u64(member(j, field, "price"), field + ".price");
      break;
    case UserStrategy::StopAfterSegment:
      check_keys(j, field, {"name", "segment"});
      user.stop_after = get_u32(member(j, field, "segment"), field + ".segment");
      break;
    default:
      check_keys(j, field, {"name"});
      break;
  }
}

void parse_provider_strategy(const json& j, const std::string& field, ProviderScript& provider) {
  if (j.is_string()) {
    provider.strategy = provider_strategy_named(j.get<std::string>(), field);
    if (provider.strategy == ProviderStrategy::ShutdownAfterSegment)
      fail(field, "shutdown_after_segment needs a segment");
    return;
  }
  if (!j.is_object()) fail(field, "must be a strategy name or object");
  provider.strategy =
      provider_strategy_named(get_str(member(j, field, "name"), field + ".name"), field);
  if (provider.strategy == ProviderStrategy::ShutdownAfterSegment) {
    check_keys(j, field, {"name", "segment"});
    provider.shutdown_after = get_u32(member(j, field, "segment"), field + ".segment");
  } else {
    check_keys(j, field, {"name"});
  }
}

void check_mode_compatibility(const Scenario& sc) {
  const bool ladder = !sc.adjudicated;
  for (std::size_t i = 0; i < sc.users.size(); ++i) {
    const std::string field = "users[" + std::to_string(i) + "].strategy";
    const UserStrategy s = sc.users[i].strategy;
    if (!ladder && (s == UserStrategy::StopAfterSegment || s == UserStrategy::NeverConfirm))
      fail(field, std::string(to_string(s)) + " exists only in ladder trade");
    if (ladder && s == UserStrategy::FalseDispute)
      fail(field, "false_dispute exists only in adjudicated trade");
  }
  const ProviderStrategy p = sc.provider.strategy;
  if (!ladder && p == ProviderStrategy::ShutdownAfterSegment)
    fail("provider.strategy", "shutdown_after_segment exists only in ladder trade");
  if (ladder && (p == ProviderStrategy::InvalidGrantThenValid ||
                 p == ProviderStrategy::SilentInDispute))
    fail("provider.strategy",
         std::string(to_string(p)) + " exists only in adjudicated trade");
}

}  // namespace

std::string_view to_string(UserStrategy s) {
  switch (s) {
    case UserStrategy::Honest: return "honest";
    case UserStrategy::AbortAfterCommit: return "abort_after_commit";
    case UserStrategy::OpenAltered: return "open_altered";
    case UserStrategy::StopAfterSegment: return "stop_after_segment";
    case UserStrategy::FalseDispute: return "false_dispute";
    case UserStrategy::NeverConfirm: return "never_confirm";
  }
  throw std::logic_error("unknown user strategy");
}

std::string_view to_string(ProviderStrategy s) {
  switch (s) {
    case ProviderStrategy::Honest: return "honest";
    case ProviderStrategy::NoDelivery: return "no_delivery";
    case ProviderStrategy::InvalidGrant: return "invalid_grant";
    case ProviderStrategy::InvalidGrantThenValid: return "invalid_grant_then_valid";
    case ProviderStrategy::ShutdownAfterSegment: return "shutdown_after_segment";
    case ProviderStrategy::SilentInDispute: return "silent_in_dispute";
  }
  throw std::logic_error("unknown provider strategy");
}

Coin Scenario::user_balance(std::size_t i) const {
  const UserScript& u = users.at(i);
  if (u.balance) return *u.balance;
  Coin price = u.bid.price;
  if (u.strategy == UserStrategy::OpenAltered) price = std::max(price, u.altered.price);
  return guaranty + price;
}

Coin Scenario::provider_balance() const {
  if (provider.balance) return *provider.balance;
  u128 capacity_size = 0;
  for (std::size_t d = 0; d < supply.capacities.size(); ++d)
    capacity_size += static_cast<u128>(supply.capacities[d]) * supply.weights[d];
  const u128 deposit = static_cast<u128>(base_price) * capacity_size;
  if (deposit > ~Coin(0)) fail("provider.balance", "implied deposit overflows");
  return Coin(deposit);
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("(root)", "must be an object");
  check_keys(doc, "(root)",
             {"sid", "seed", "guaranty", "adjudicated", "abandon_auction", "deadlines",
              "provider", "ladder", "users"});

  Scenario sc;
  sc.sid = get_u64(member(doc, "(root)", "sid"), "sid");
  sc.nonce_seed = get_u64(member(doc, "(root)", "seed"), "seed");
  sc.guaranty = get_u64(member(doc, "(root)", "guaranty"), "guaranty");
  if (sc.guaranty == 0) fail("guaranty", "must be positive");

  const json& adj = member(doc, "(root)", "adjudicated");
  if (!adj.is_boolean()) fail("adjudicated", "must be a boolean");
  sc.adjudicated = adj.get<bool>();

  if (auto it = doc.find("abandon_auction"); it != doc.end()) {
    if (!it->is_boolean()) fail("abandon_auction", "must be a boolean");
    sc.abandon_auction = it->get<bool>();
  }

  {
    const json& d = member(doc, "(root)", "deadlines");
    check_keys(d, "deadlines", {"commit", "open", "auction", "deliver", "dispute"});
    sc.deadlines.commit_by = get_u64(member(d, "deadlines", "commit"), "deadlines.commit");
    sc.deadlines.open_by = get_u64(member(d, "deadlines", "open"), "deadlines.open");
    sc.deadlines.auction_by = get_u64(member(d, "deadlines", "auction"), "deadlines.auction");
    sc.deadlines.deliver_by = get_u64(member(d, "deadlines", "deliver"), "deadlines.deliver");
    sc.deadlines.dispute_by = get_u64(member(d, "deadlines", "dispute"), "deadlines.dispute");
    if (sc.deadlines.commit_by < 1) fail("deadlines.commit", "must leave a tick to commit");
    if (sc.deadlines.open_by <= sc.deadlines.commit_by)
      fail("deadlines.open", "must be after deadlines.commit");
    if (sc.deadlines.auction_by <= sc.deadlines.open_by)
      fail("deadlines.auction", "must be after deadlines.open");
    if (sc.deadlines.deliver_by <= sc.deadlines.auction_by)
      fail("deadlines.deliver", "must be after deadlines.auction");
    if (sc.deadlines.dispute_by <= sc.deadlines.deliver_by)
      fail("deadlines.dispute", "must be after deadlines.deliver");
  }

  {
    const json& p = member(doc, "(root)", "provider");
    check_keys(p, "provider",
               {"seed", "balance", "base_price", "capacities", "weights", "strategy"});
    sc.provider.seed = get_str(member(p, "provider", "seed"), "provider.seed");
    if (auto it = p.find("balance"); it != p.end())
      sc.provider.balance = get_u64(*it, "provider.balance");
    sc.base_price = get_u64(member(p, "provider", "base_price"), "provider.base_price");
    if (sc.base_price == 0) fail("provider.base_price", "must be positive");
    sc.supply.capacities =
        get_u32_list(member(p, "provider", "capacities"), "provider.capacities");
    sc.supply.weights = get_u32_list(member(p, "provider", "weights"), "provider.weights");
    try {
      validate_supply(sc.supply);
    } catch (const std::invalid_argument& e) {
      fail("provider.capacities/weights", e.what());
    }
    parse_provider_strategy(member(p, "provider", "strategy"), "provider.strategy", sc.provider);
  }

  if (sc.adjudicated) {
    if (doc.contains("ladder")) fail("ladder", "adjudicated trade takes no ladder parameters");
  } else {
    const json& l = member(doc, "(root)", "ladder");
    check_keys(l, "ladder", {"segments", "usage_total", "tolerate"});
    LadderParams params;
    params.segments = get_u32(member(l, "ladder", "segments"), "ladder.segments");
    params.usage_total = get_u64(member(l, "ladder", "usage_total"), "ladder.usage_total");
    params.tolerate = get_u64(member(l, "ladder", "tolerate"), "ladder.tolerate");
    if (params.segments == 0) fail("ladder.segments", "must be positive");
    if (params.tolerate == 0) fail("ladder.tolerate", "must be positive");
    if (params.usage_total < params.segments)
      fail("ladder.usage_total", "must cover at least one tick per segment");
    sc.ladder = params;
  }

  {
    const json& users = member(doc, "(root)", "users");
    if (!users.is_array() || users.empty()) fail("users", "must be a non-empty array");
    std::set<std::string> seeds{sc.provider.seed, std::string(kAdjudicatorSeed)};
    for (std::size_t i = 0; i < users.size(); ++i) {
      const std::string path = "users[" + std::to_string(i) + "]";
      const json& u = users[i];
      check_keys(u, path, {"seed", "balance", "bundle", "price", "strategy"});
      UserScript script;
      script.seed = get_str(member(u, path, "seed"), path + ".seed");
      if (!seeds.insert(script.seed).second)
        fail(path + ".seed", "'" + script.seed + "' is already taken");
      if (auto it = u.find("balance"); it != u.end())
        script.balance = get_u64(*it, path + ".balance");
      script.bid.bundle = get_u32_list(member(u, path, "bundle"), path + ".bundle");
      if (script.bid.bundle.size() != sc.supply.capacities.size())
        fail(path + ".bundle", "must list one count per VM type (" +
                                   std::to_string(sc.supply.capacities.size()) + ")");
      script.bid.price = get_u64(member(u, path, "price"), path + ".price");
      parse_user_strategy(member(u, path, "strategy"), path + ".strategy", script);
      sc.users.push_back(std::move(script));
    }
  }

  check_mode_compatibility(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace vmauction
