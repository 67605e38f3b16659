#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vmauction/ledger.hpp"
#include "vmauction/session.hpp"

// One ledger with a provider ("provider"), an adjudicator ("adjudicator",
// adjudicated mode only), n users ("u0".."u{n-1}") and a running session.
struct SessionFixture {
  vmauction::Ledger ledger;
  vmauction::SessionConfig config;
  vmauction::Address provider;
  std::optional<vmauction::Address> adjudicator;
  std::vector<vmauction::Address> users;
  std::vector<std::array<std::uint8_t, vmauction::kNonceBytes>> nonces;
  std::optional<vmauction::ContractSession> session;

  SessionFixture(std::size_t n, vmauction::SessionConfig cfg, vmauction::Coin user_balance = 1000,
                 vmauction::Coin provider_balance = 1000)
      : config(std::move(cfg)) {
    provider = ledger.create_account("provider", provider_balance);
    if (!config.ladder) adjudicator = ledger.create_account("adjudicator", 0);
    for (std::size_t i = 0; i < n; ++i) {
      users.push_back(ledger.create_account(seed(i), user_balance));
      std::array<std::uint8_t, vmauction::kNonceBytes> nonce{};
      nonce.fill(std::uint8_t(i + 1));
      nonces.push_back(nonce);
    }
    session.emplace(ledger, config, provider, users, adjudicator);
  }

  static std::string seed(std::size_t i) { return "u" + std::to_string(i); }

  vmauction::Digest digest_for(std::size_t i, const vmauction::Bid& bid) const {
    return vmauction::commitment_digest(vmauction::serialize_bid(bid), nonces[i], users[i],
                                        config.sid);
  }

  vmauction::Decision commit(std::size_t i, const vmauction::Bid& bid) {
    return session->submit_commitment(users[i], seed(i), digest_for(i, bid), config.guaranty);
  }

  vmauction::Decision open(std::size_t i, const vmauction::Bid& bid) {
    return session->open_commitment(users[i], seed(i), bid, nonces[i], bid.price);
  }

  // Straight-through helper: everyone commits at t=1 and opens `bids` at t=2.
  void commit_and_open(const std::vector<vmauction::Bid>& bids) {
    ledger.advance_time(1);
    for (std::size_t i = 0; i < bids.size(); ++i) commit(i, bids[i]);
    ledger.advance_time(2);
    for (std::size_t i = 0; i < bids.size(); ++i) open(i, bids[i]);
  }

  vmauction::SealedGrant valid_grant(std::size_t i, const vmauction::Bid& bid) const {
    vmauction::VMGrant g;
    g.recipient = users[i];
    g.bundle = bid.bundle;
    return {users[i], g};
  }
};

inline vmauction::SessionConfig basic_config(vmauction::Coin guaranty, vmauction::Coin base_price,
                                             std::vector<std::uint32_t> capacities,
                                             std::vector<std::uint32_t> weights,
                                             std::optional<vmauction::LadderParams> ladder = {}) {
  vmauction::SessionConfig cfg;
  cfg.sid = 77;
  cfg.guaranty = guaranty;
  cfg.base_price = base_price;
  cfg.deadlines = {2, 4, 6, 9, ladder ? vmauction::Clock(25) : vmauction::Clock(14)};
  cfg.supply = {std::move(capacities), std::move(weights)};
  cfg.ladder = ladder;
  return cfg;
}
