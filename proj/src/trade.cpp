#include <stdexcept>

#include "vmauction/session.hpp"

namespace vmauction {

namespace {

constexpr std::uint8_t kTradeWindow = phase_bit(ContractPhase::ProviderSendsGoods) |
                                      phase_bit(ContractPhase::Trading) |
                                      phase_bit(ContractPhase::Dispute);

}  // namespace

Decision ContractSession::provider_deliver(const Address& actor, std::string_view seed,
                                           const Address& winner, SealedGrant grant) {
  GuardEnv env = base_env(actor, seed, phase_bit(ContractPhase::ProviderSendsGoods));
  env.required_state = ParticipantState{StateKind::ProviderInitState, 0};
  env.deadline = config_.deadlines.deliver_by;
  auto it = trades_.find(winner);
  if (actor != provider_) {
    env.extra_ok = false;
    env.extra_detail = "only the provider delivers";
  } else if (it == trades_.end()) {
    env.extra_ok = false;
    env.extra_detail = "recipient is not a winner";
  } else if (it->second.delivered || it->second.compensated) {
    env.extra_ok = false;
    env.extra_detail = "winner already served";
  } else if (grant.recipient != winner) {
    env.extra_ok = false;
    env.extra_detail = "grant is sealed for the wrong recipient";
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "provider_deliver");

  // Ladder service plan must keep the worst-case loss inside the tolerance:
  // one segment of the charge, ceil(price/segments), at most `tolerate`.
  if (config_.ladder) {
    const auto& l = *config_.ladder;
    const Coin need = (it->second.price + l.tolerate - 1) / l.tolerate;  // ceil(P/tolerate)
    if (l.segments < need)
      return reject(actor,
                    Decision::fail(Reject::Config,
                                   "segments=" + std::to_string(l.segments) +
                                       " cannot keep the per-segment loss within tolerate=" +
                                       std::to_string(l.tolerate)),
                    "provider_deliver");
  }

  it->second.delivered = true;
  it->second.grant = std::move(grant);
  ledger_.log(EventKind::StateChange, provider_, winner, "deliver sealed-grant");
  set_state(winner, {StateKind::UserReceivedGoods, 0}, "delivered");
  if (config_.ladder) {
    // Ladder service starts at delivery: the winner holds the goods in
    // Using(1) and speaks through confirmations or a disaffirmation.
    set_state(winner, using_segment(1), "service-start");
    if (it->second.grant.payload.active_until_segment >= 1) serve_segment(winner, it->second, 1);
  }

  bool all = true;
  for (const auto& [addr, t] : trades_) all = all && (t.delivered || t.compensated);
  if (all) {
    set_state(provider_, {StateKind::ProviderSentGoods, 0}, "all-delivered");
    advance_if_all_served();
  }
  return Decision::ok();
}

Decision ContractSession::accept_goods(const Address& actor, std::string_view seed) {
  GuardEnv env = base_env(actor, seed, kTradeWindow);
  env.required_state = ParticipantState{StateKind::UserReceivedGoods, 0};
  env.deadline = config_.deadlines.dispute_by;
  if (config_.ladder) {
    env.extra_ok = false;
    env.extra_detail = "ladder service starts at delivery; confirm or disaffirm instead";
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "accept_goods");

  set_state(actor, using_segment(1), "accepted");
  return Decision::ok();
}

Decision ContractSession::raise_dispute(const Address& actor, std::string_view seed) {
  GuardEnv env = base_env(actor, seed, kTradeWindow);
  env.required_state = ParticipantState{StateKind::UserReceivedGoods, 0};
  env.deadline = config_.deadlines.dispute_by;
  if (config_.ladder) {
    env.extra_ok = false;
    env.extra_detail = "ladder trade settles by confirmation, not adjudication";
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "raise_dispute");

  TradeRecord& trade = trades_.at(actor);
  trade.disputed = true;
  trade.dispute_open = true;
  ledger_.log(EventKind::StateChange, actor, contract_, "dispute");
  set_state(actor, {StateKind::WrongGoods, 0}, "disputed");
  if (phase_ == ContractPhase::Trading) set_phase(ContractPhase::Dispute, "dispute");
  return Decision::ok();
}

Decision ContractSession::provider_reseal(const Address& actor, std::string_view seed,
                                          const Address& winner, SealedGrant grant) {
  GuardEnv env = base_env(actor, seed, kTradeWindow);
  env.deadline = config_.deadlines.dispute_by;
  auto it = trades_.find(winner);
  if (actor != provider_) {
    env.extra_ok = false;
    env.extra_detail = "only the provider reseals";
  } else if (it == trades_.end() || !it->second.dispute_open) {
    env.extra_ok = false;
    env.extra_detail = "no open dispute for this winner";
  } else if (it->second.reseal) {
    env.extra_ok = false;
    env.extra_detail = "already resealed";
  } else if (!adjudicator_ || grant.recipient != *adjudicator_) {
    env.extra_ok = false;
    env.extra_detail = "reseal must be sealed for the adjudicator";
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "provider_reseal");

  it->second.reseal = std::move(grant);
  ledger_.log(EventKind::StateChange, provider_, contract_, "reseal for=" + winner.hex());
  return Decision::ok();
}

Decision ContractSession::adjudicate(const Address& actor, std::string_view seed,
                                     const Address& winner) {
  GuardEnv env = base_env(actor, seed, kTradeWindow);
  auto it = trades_.find(winner);
  if (!adjudicator_ || actor != *adjudicator_) {
    env.extra_ok = false;
    env.extra_detail = "only the adjudicator rules";
  } else if (it == trades_.end() || !it->second.dispute_open) {
    env.extra_ok = false;
    env.extra_detail = "no open dispute for this winner";
  } else if (!it->second.reseal && ledger_.now() <= config_.deadlines.dispute_by) {
    env.extra_ok = false;
    env.extra_detail = "waiting for the provider to reseal";
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "adjudicate");

  TradeRecord& trade = it->second;
  // No reseal by the deadline counts as an invalid grant.
  std::optional<VMGrant> opened;
  if (trade.reseal) opened = open_grant(*trade.reseal, actor);
  const bool valid = opened && grant_valid_for(winner, *opened);
  trade.dispute_open = false;
  if (valid) {
    ledger_.log(EventKind::StateChange, actor, winner, "verdict=valid");
    // The checked goods go forward under the winner's seal.
    trade.grant = SealedGrant{winner, *opened};
    set_state(winner, using_segment(1), "adjudicated");
  } else {
    ledger_.log(EventKind::StateChange, actor, winner, "verdict=invalid");
    compensate(winner, trade, "wrong-goods");
  }
  return Decision::ok();
}

Decision ContractSession::finalize_trade() {
  GuardEnv env;
  env.authenticated = true;  // contract self-execution
  env.phase = phase_;
  env.allowed_phases =
      phase_bit(ContractPhase::Trading) | phase_bit(ContractPhase::Dispute);
  env.now = ledger_.now();
  if (env.now <= config_.deadlines.dispute_by) {
    env.extra_ok = false;
    env.extra_detail = "settlement opens after the dispute deadline";
  }
  for (const auto& [addr, t] : trades_) {
    if (!env.extra_ok) break;
    if (t.dispute_open) {
      env.extra_ok = false;
      env.extra_detail = "a dispute is still open";
    } else if (config_.ladder && t.delivered && !trade_resolved(t)) {
      env.extra_ok = false;
      env.extra_detail = "a ladder trade is not settled yet";
    }
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(contract_, std::move(d), "finalize_trade");

  // Whatever is neither compensated nor ladder-settled completes: the
  // provider collects the charge.
  for (auto& [addr, trade] : trades_) {
    if (trade_resolved(trade)) continue;
    pay(provider_, trade.price_escrow, "trade-payment winner=" + addr.hex());
    trade.price_escrow = 0;
    trade.completed = true;
  }
  pay(provider_, provider_deposit_escrow_, "deposit-return");
  provider_deposit_escrow_ = 0;
  set_phase(ContractPhase::Settled, "finalize");
  return Decision::ok();
}

}  // namespace vmauction
