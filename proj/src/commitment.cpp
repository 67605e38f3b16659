#include <stdexcept>

#include "vmauction/exact.hpp"
#include "vmauction/session.hpp"

namespace vmauction {

Decision ContractSession::submit_commitment(const Address& actor, std::string_view seed,
                                            const Digest& digest, Coin guaranty) {
  GuardEnv env = base_env(actor, seed, phase_bit(ContractPhase::UserSendsCommitment));
  env.required_state = ParticipantState{StateKind::UserInitState, 0};
  env.deadline = config_.deadlines.commit_by;
  if (guaranty != config_.guaranty) {
    env.extra_ok = false;
    env.extra_detail = "guaranty must be exactly " + std::to_string(config_.guaranty);
  } else if (ledger_.balance(actor) < guaranty) {
    env.extra_ok = false;
    env.extra_detail = "insufficient balance for the guaranty";
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "submit_commitment");

  collect(actor, guaranty, "guaranty");
  CommitmentRecord rec;
  rec.owner = actor;
  rec.digest = digest;
  rec.guaranty_escrow = guaranty;
  commitments_.emplace(actor, std::move(rec));
  set_state(actor, {StateKind::UserSentCommitment, 0}, "committed");

  if (commitments_.size() == users_.size())
    set_phase(ContractPhase::UserOpensCommitment, "all-committed");
  return Decision::ok();
}

Decision ContractSession::open_commitment(const Address& actor, std::string_view seed,
                                          const Bid& bid, std::span<const std::uint8_t> nonce,
                                          Coin deposit) {
  GuardEnv env = base_env(actor, seed, phase_bit(ContractPhase::UserOpensCommitment));
  env.required_state = ParticipantState{StateKind::UserSentCommitment, 0};
  env.deadline = config_.deadlines.open_by;

  auto rec_it = commitments_.find(actor);
  Coin size = 0;
  if (env.extra_ok && rec_it != commitments_.end()) {
    if (nonce.size() != kNonceBytes) {
      env.extra_ok = false;
      env.extra_detail = "nonce must be exactly 32 bytes";
    } else if (commitment_digest(serialize_bid(bid), nonce, actor, config_.sid) !=
               rec_it->second.digest) {
      env.extra_ok = false;
      env.extra_detail = "opening does not match the commitment";
    } else {
      try {
        validate_bid(bid, config_.supply.capacities.size());
        size = weighted_size(bid.bundle, config_.supply.weights);
      } catch (const std::invalid_argument& e) {
        env.extra_ok = false;
        env.extra_detail = std::string("committed bid is malformed: ") + e.what();
      }
    }
    if (env.extra_ok && deposit != bid.price) {
      env.extra_ok = false;
      env.extra_detail = "deposit must equal the bid price";
    }
    if (env.extra_ok && ledger_.balance(actor) < deposit) {
      env.extra_ok = false;
      env.extra_detail = "insufficient balance for the deposit";
    }
  }
  if (Decision d = check_guard(env); !d.admitted()) {
    // A timely opening attempt that fails its content checks burns the one
    // shot: the commitment can never be opened again, and the guaranty goes
    // to the pool. Late attempts are handled like never opening at all.
    if (d.reject == Reject::Extra && rec_it != commitments_.end() &&
        ledger_.now() <= config_.deadlines.open_by) {
      set_state(actor, {StateKind::UserFailsToOpenCommitment, 0}, "failed-open");
      forfeit_pool_ += rec_it->second.guaranty_escrow;
      ++forfeited_count_;
      ledger_.log(EventKind::StateChange, actor, contract_,
                  "forfeit-guaranty amount=" + std::to_string(rec_it->second.guaranty_escrow));
      rec_it->second.guaranty_escrow = 0;
      if (no_commitment_pending()) set_phase(ContractPhase::Auction, "all-acted");
    }
    return reject(actor, std::move(d), "open_commitment");
  }

  collect(actor, deposit, "bid-deposit");
  rec_it->second.opened = true;
  rec_it->second.bid = bid;
  rec_it->second.size = size;
  rec_it->second.deposit_escrow = deposit;
  set_state(actor, {StateKind::UserOpenedCommitment, 0}, "opened");

  if (no_commitment_pending()) set_phase(ContractPhase::Auction, "all-opened");
  return Decision::ok();
}

bool ContractSession::no_commitment_pending() const {
  for (const auto& [addr, rec] : commitments_)
    if (states_.at(addr).kind == StateKind::UserSentCommitment) return false;
  return true;
}

Decision ContractSession::settle_refunds() {
  GuardEnv env;
  env.authenticated = true;  // contract self-execution
  env.phase = phase_;
  env.allowed_phases = phase_bit(ContractPhase::Auction);
  env.now = ledger_.now();
  env.extra_ok = !refund_plan_.has_value() && !auction_ran_;
  env.extra_detail = "refunds already settled";
  if (Decision d = check_guard(env); !d.admitted())
    return reject(contract_, std::move(d), "settle_refunds");

  RefundPlan plan;
  plan.pool = forfeit_pool_;
  plan.failed = forfeited_count_;

  // Pool shares go to openers whose density clears the base price, pro rata
  // by scaled density; flooring dust goes to the provider.
  u128 total_density = 0;
  std::map<Address, Coin> density;
  for (const auto& [addr, rec] : commitments_) {
    if (!rec.opened) continue;
    const Coin d = density_at_least(rec.bid.price, rec.size, config_.base_price)
                       ? scaled_density(rec.bid.price, rec.size)
                       : 0;
    density.emplace(addr, d);
    total_density += d;
  }

  Coin distributed = 0;
  for (auto& [addr, rec] : commitments_) {
    if (!rec.opened) continue;
    Coin share = 0;
    if (total_density > 0 && density.at(addr) > 0)
      share = Coin(static_cast<u128>(plan.pool) * density.at(addr) / total_density);
    const Coin refund = rec.guaranty_escrow + share;
    pay(addr, refund,
        "refund guaranty=" + std::to_string(rec.guaranty_escrow) +
            " bonus=" + std::to_string(share));
    rec.guaranty_escrow = 0;
    distributed += share;
    plan.refunds.emplace_back(addr, refund);
  }
  plan.remainder = plan.pool - distributed;
  pay(provider_, plan.remainder, "bonus-remainder");
  forfeit_pool_ = 0;
  refund_plan_ = std::move(plan);
  return Decision::ok();
}

}  // namespace vmauction
