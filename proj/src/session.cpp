#include "vmauction/session.hpp"

#include <stdexcept>

namespace vmauction {

namespace {

constexpr std::uint8_t kAllPhases = 0xff;

void validate_deadlines(const Deadlines& d) {
  if (!(d.commit_by < d.open_by && d.open_by < d.auction_by && d.auction_by < d.deliver_by &&
        d.deliver_by < d.dispute_by))
    throw std::invalid_argument("deadlines must be strictly increasing");
}

}  // namespace

ContractSession::ContractSession(Ledger& ledger, SessionConfig config, Address provider,
                                 std::vector<Address> users, std::optional<Address> adjudicator)
    : ledger_(ledger),
      config_(std::move(config)),
      provider_(provider),
      users_(std::move(users)),
      adjudicator_(adjudicator) {
  validate_supply(config_.supply);
  validate_deadlines(config_.deadlines);
  if (config_.guaranty == 0) throw std::invalid_argument("guaranty must be positive");
  if (config_.base_price == 0) throw std::invalid_argument("base price must be positive");
  if (config_.ladder) {
    if (config_.ladder->segments == 0)
      throw std::invalid_argument("ladder needs at least one segment");
    if (config_.ladder->usage_total < config_.ladder->segments)
      throw std::invalid_argument("usage duration must cover one tick per segment");
    if (config_.ladder->tolerate == 0)
      throw std::invalid_argument("tolerated loss must be positive");
  } else if (!adjudicator_) {
    throw std::invalid_argument("adjudicated trade needs an adjudicator");
  }
  if (!ledger_.has_account(provider_)) throw std::invalid_argument("provider account missing");
  if (adjudicator_ && !ledger_.has_account(*adjudicator_))
    throw std::invalid_argument("adjudicator account missing");
  for (const auto& u : users_) {
    if (!ledger_.has_account(u)) throw std::invalid_argument("user account missing");
    if (u == provider_ || (adjudicator_ && u == *adjudicator_))
      throw std::invalid_argument("user address collides with another role");
    if (!states_.emplace(u, ParticipantState{StateKind::UserInitState, 0}).second)
      throw std::invalid_argument("duplicate user address");
  }
  states_.emplace(provider_, ParticipantState{StateKind::ProviderInitState, 0});

  contract_seed_ = "contract#" + std::to_string(config_.sid);
  contract_ = ledger_.create_account(contract_seed_, 0);

  // The provider's deposit backs every possible compensation: base price
  // times the full weighted capacity bounds the weighted sizes of any
  // feasible winner set.
  u128 capacity_size = 0;
  for (std::size_t d = 0; d < config_.supply.capacities.size(); ++d)
    capacity_size +=
        static_cast<u128>(config_.supply.capacities[d]) * config_.supply.weights[d];
  const u128 deposit = static_cast<u128>(config_.base_price) * capacity_size;
  if (deposit > ~Coin(0)) throw std::invalid_argument("provider deposit overflows");
  if (ledger_.balance(provider_) < Coin(deposit))
    throw std::invalid_argument("provider cannot fund the deposit");
  collect(provider_, Coin(deposit), "provider-deposit");
  provider_deposit_escrow_ = Coin(deposit);
}

GuardEnv ContractSession::base_env(const Address& actor, std::string_view seed,
                                   std::uint8_t phases) const {
  GuardEnv env;
  env.authenticated = ledger_.has_account(actor) && ledger_.authenticate(actor, seed);
  env.phase = phase_;
  env.allowed_phases = phases;
  if (auto it = states_.find(actor); it != states_.end()) env.state = it->second;
  env.now = ledger_.now();
  return env;
}

Decision ContractSession::reject(const Address& actor, Decision d, std::string_view op) {
  ledger_.log(EventKind::Reject, actor, contract_,
              std::string(op) + ": " + std::string(to_string(d.reject)) + ": " + d.detail);
  return d;
}

void ContractSession::set_phase(ContractPhase next, std::string_view why) {
  if (!is_phase_edge(phase_, next))
    throw std::logic_error("illegal phase edge " + std::string(to_string(phase_)) + " -> " +
                           std::string(to_string(next)));
  phase_ = next;
  if (next == ContractPhase::UserOpensCommitment) {
    open_phase_entered_ = ledger_.now();
    open_phase_seen_ = true;
  }
  ledger_.log(EventKind::StateChange, contract_, contract_,
              "phase=" + std::string(to_string(next)) + " reason=" + std::string(why));
}

void ContractSession::set_state(const Address& who, ParticipantState next, std::string_view why) {
  auto it = states_.find(who);
  if (it == states_.end()) throw std::logic_error("state change for unknown participant");
  if (!is_participant_edge(it->second, next))
    throw std::logic_error("illegal state edge " + to_string(it->second) + " -> " +
                           to_string(next));
  it->second = next;
  ledger_.log(EventKind::StateChange, contract_, who,
              "state=" + to_string(next) + " reason=" + std::string(why));
}

void ContractSession::pay(const Address& to, Coin amount, std::string note) {
  if (amount == 0) return;
  const LedgerEvent& ev = ledger_.transfer(contract_, to, amount, std::move(note),
                                           EventKind::EscrowOut);
  if (ev.kind == EventKind::Reject) throw std::logic_error("contract escrow underfunded");
}

void ContractSession::collect(const Address& from, Coin amount, std::string note) {
  if (amount == 0) return;
  const LedgerEvent& ev = ledger_.transfer(from, contract_, amount, std::move(note),
                                           EventKind::EscrowIn);
  if (ev.kind == EventKind::Reject)
    throw std::logic_error("collect called without checking funds");
}

bool ContractSession::is_user(const Address& addr) const {
  for (const auto& u : users_)
    if (u == addr) return true;
  return false;
}

bool ContractSession::is_party(const Address& addr) const {
  return is_user(addr) || addr == provider_ || (adjudicator_ && addr == *adjudicator_);
}

std::optional<ParticipantState> ContractSession::state_of(const Address& addr) const {
  if (auto it = states_.find(addr); it != states_.end()) return it->second;
  return std::nullopt;
}

Clock ContractSession::segment_deadline(std::uint32_t segment) const {
  if (!config_.ladder) throw std::logic_error("segment deadline outside ladder mode");
  const auto& l = *config_.ladder;
  return config_.deadlines.deliver_by +
         Clock(static_cast<u128>(segment) * l.usage_total / l.segments);
}

Clock ContractSession::ladder_end() const {
  return segment_deadline(config_.ladder ? config_.ladder->segments : 0);
}

void ContractSession::mark_non_openers() {
  // Reached when the opening window is over. Lingering commitments forfeit
  // the guaranty into the bonus pool -- unless the contract never actually
  // sat in the opening phase during the window, in which case nobody could
  // have opened and the guaranty goes back.
  const bool window_existed =
      open_phase_seen_ && open_phase_entered_ <= config_.deadlines.open_by;
  for (auto& [addr, rec] : commitments_) {
    if (rec.opened || states_.at(addr).kind != StateKind::UserSentCommitment) continue;
    set_state(addr, {StateKind::UserFailsToOpenCommitment, 0}, "never-opened");
    if (window_existed) {
      forfeit_pool_ += rec.guaranty_escrow;
      ++forfeited_count_;
      ledger_.log(EventKind::StateChange, addr, contract_,
                  "forfeit-guaranty amount=" + std::to_string(rec.guaranty_escrow));
    } else {
      pay(addr, rec.guaranty_escrow, "guaranty-return");
    }
    rec.guaranty_escrow = 0;
  }
}

bool ContractSession::advance_deadline_phases() {
  const Clock now = ledger_.now();
  const auto& dl = config_.deadlines;
  bool advanced = false;
  if (phase_ == ContractPhase::UserSendsCommitment && now > dl.commit_by) {
    set_phase(ContractPhase::UserOpensCommitment, "deadline");
    advanced = true;
  }
  if (phase_ == ContractPhase::UserOpensCommitment && now > dl.open_by) {
    mark_non_openers();
    set_phase(ContractPhase::Auction, "deadline");
    advanced = true;
  }
  if ((phase_ == ContractPhase::UserSendsCommitment ||
       phase_ == ContractPhase::UserOpensCommitment || phase_ == ContractPhase::Auction) &&
      !auction_ran_ && now > dl.auction_by) {
    abort_session();
    advanced = true;
  }
  if (phase_ == ContractPhase::ProviderSendsGoods && now > dl.deliver_by) {
    default_settle_unserved();
    advanced = true;
  }
  return advanced;
}

void ContractSession::abort_session() {
  set_phase(ContractPhase::Aborted, "auction-timeout");
  pay(provider_, forfeit_pool_, "forfeit-pool");
  forfeit_pool_ = 0;
  pay(provider_, provider_deposit_escrow_, "deposit-return");
  provider_deposit_escrow_ = 0;
}

bool ContractSession::deadline_advance_due() const {
  const Clock now = ledger_.now();
  const auto& dl = config_.deadlines;
  if (phase_ == ContractPhase::UserSendsCommitment && now > dl.commit_by) return true;
  if (phase_ == ContractPhase::UserOpensCommitment && now > dl.open_by) return true;
  if ((phase_ == ContractPhase::UserSendsCommitment ||
       phase_ == ContractPhase::UserOpensCommitment || phase_ == ContractPhase::Auction) &&
      !auction_ran_ && now > dl.auction_by)
    return true;
  if (phase_ == ContractPhase::ProviderSendsGoods && now > dl.deliver_by) return true;
  return false;
}

Decision ContractSession::poke(const Address& actor, std::string_view seed) {
  GuardEnv env = base_env(actor, seed, kAllPhases);
  env.extra_ok = is_party(actor);
  env.extra_detail = "sender is not a session party";
  if (Decision d = check_guard(env); !d.admitted()) return reject(actor, std::move(d), "poke");
  if (!advance_deadline_phases())
    return reject(actor, Decision::fail(Reject::Extra, "no deadline-driven advance is due"),
                  "poke");
  return Decision::ok();
}

ContractSession::ReclaimResult ContractSession::reclaim_after_timeout(const Address& actor,
                                                                      std::string_view seed) {
  GuardEnv env = base_env(actor, seed,
                          phase_bit(ContractPhase::UserSendsCommitment) |
                              phase_bit(ContractPhase::UserOpensCommitment) |
                              phase_bit(ContractPhase::Auction) |
                              phase_bit(ContractPhase::Aborted));
  env.extra_ok = is_user(actor) && !auction_ran_ && ledger_.now() > config_.deadlines.auction_by;
  env.extra_detail = "reclaim needs the allocation deadline passed without an allocation";
  if (Decision d = check_guard(env); !d.admitted())
    return {reject(actor, std::move(d), "reclaim_after_timeout"), 0};
  if (phase_ != ContractPhase::Aborted) advance_deadline_phases();
  Coin amount = 0;
  if (auto it = commitments_.find(actor); it != commitments_.end()) {
    amount = it->second.guaranty_escrow + it->second.deposit_escrow;
    it->second.guaranty_escrow = 0;
    it->second.deposit_escrow = 0;
  }
  pay(actor, amount, "reclaim");
  if (amount == 0)
    ledger_.log(EventKind::StateChange, contract_, actor, "reclaim amount=0");
  return {Decision::ok(), amount};
}

Decision ContractSession::run_auction() {
  GuardEnv env;
  env.authenticated = true;  // contract self-execution
  env.phase = phase_;
  env.allowed_phases = phase_bit(ContractPhase::Auction);
  env.now = ledger_.now();
  env.deadline = config_.deadlines.auction_by;
  env.extra_ok = !auction_ran_ && refund_plan_.has_value();
  env.extra_detail = auction_ran_ ? "allocation already ran" : "refunds must settle first";
  if (Decision d = check_guard(env); !d.admitted())
    return reject(contract_, std::move(d), "run_auction");

  std::vector<const CommitmentRecord*> openers;
  for (const auto& [addr, rec] : commitments_)
    if (rec.opened) openers.push_back(&rec);

  auction_ran_ = true;
  ranking_.clear();
  ledger_.log(EventKind::StateChange, contract_, contract_,
              "auction bidders=" + std::to_string(openers.size()));

  bool any_winner = false;
  if (!openers.empty()) {
    std::vector<Bid> bids;
    bids.reserve(openers.size());
    for (const auto* rec : openers) bids.push_back(rec->bid);
    const AuctionOutcome out = run_auction_kernel(bids, config_.supply);
    for (std::size_t r = 0; r < out.order.size(); ++r) {
      const std::uint32_t idx = out.order[r];
      RankedBidder rb;
      rb.addr = openers[idx]->owner;
      rb.won = out.won[idx] != 0;
      rb.price = out.price[idx];
      if (out.critical[idx] >= 0) rb.critical = openers[out.critical[idx]]->owner;
      ledger_.log(EventKind::StateChange, contract_, rb.addr,
                  "auction rank=" + std::to_string(r) + " won=" + std::to_string(rb.won ? 1 : 0) +
                      " price=" + std::to_string(rb.price) +
                      " critical=" + (rb.critical ? rb.critical->hex() : std::string("none")));
      ranking_.push_back(std::move(rb));
    }
    // Deposits resolve in address order: winners keep their charge in
    // escrow and get the rest back; losers get the full deposit back.
    for (auto& [addr, rec] : commitments_) {
      if (!rec.opened) continue;
      std::size_t idx = 0;
      while (openers[idx]->owner != addr) ++idx;
      if (out.won[idx]) {
        any_winner = true;
        set_state(addr, {StateKind::UserWinsAtTheAuction, 0}, "allocated");
        TradeRecord trade;
        trade.price = out.price[idx];
        trade.price_escrow = out.price[idx];  // charge moves from deposit to trade escrow
        trades_.emplace(addr, std::move(trade));
        pay(addr, rec.deposit_escrow - out.price[idx], "bid-refund");
      } else {
        set_state(addr, {StateKind::UserFailsInTheAuction, 0}, "denied");
        pay(addr, rec.deposit_escrow, "bid-refund");
      }
      rec.deposit_escrow = 0;
    }
  }

  if (any_winner) {
    set_phase(ContractPhase::ProviderSendsGoods, "allocated");
  } else {
    set_phase(ContractPhase::Settled, "no-winners");
    pay(provider_, provider_deposit_escrow_, "deposit-return");
    provider_deposit_escrow_ = 0;
  }
  return Decision::ok();
}

void ContractSession::advance_if_all_served() {
  const auto any_open_dispute = [&] {
    for (const auto& [addr, t] : trades_)
      if (t.dispute_open) return true;
    return false;
  };
  if (phase_ == ContractPhase::Trading) {
    if (any_open_dispute()) set_phase(ContractPhase::Dispute, "dispute");
    return;
  }
  if (phase_ != ContractPhase::ProviderSendsGoods) return;
  for (const auto& [addr, t] : trades_)
    if (!t.delivered && !t.compensated) return;
  set_phase(ContractPhase::Trading, "all-served");
  if (any_open_dispute()) set_phase(ContractPhase::Dispute, "dispute");
}

bool ContractSession::trade_resolved(const TradeRecord& trade) {
  return trade.compensated || trade.completed || trade.ladder_settled;
}

void ContractSession::compensate(const Address& winner, TradeRecord& trade,
                                 std::string_view why) {
  const Coin base = config_.base_price;
  const Coin size = commitments_.at(winner).size;
  const u128 penalty = static_cast<u128>(base) * size;
  if (penalty > provider_deposit_escrow_)
    throw std::logic_error("provider deposit cannot cover compensation");
  pay(winner, trade.price_escrow, "trade-refund " + std::string(why));
  trade.price_escrow = 0;
  pay(winner, Coin(penalty), "compensation base_price*size=" + std::to_string(Coin(penalty)));
  provider_deposit_escrow_ -= Coin(penalty);
  trade.compensated = true;
}

void ContractSession::default_settle_unserved() {
  for (auto& [addr, trade] : trades_) {
    if (trade.delivered || trade.compensated) continue;
    ledger_.log(EventKind::StateChange, contract_, addr, "default-settlement undelivered");
    compensate(addr, trade, "undelivered");
  }
  // Compensated trades count as acted on; the session proceeds to Trading
  // and the final settlement later returns whatever deposit remains.
  advance_if_all_served();
}

void ContractSession::serve_segment(const Address& winner, TradeRecord& trade,
                                    std::uint32_t segment) {
  trade.served = segment;
  ledger_.log(EventKind::StateChange, contract_, winner,
              "serve segment=" + std::to_string(segment));
}

bool ContractSession::grant_valid_for(const Address& winner, const VMGrant& grant) const {
  const auto& bid = commitments_.at(winner).bid;
  return grant.config_ok && grant.bundle == bid.bundle;
}

std::optional<VMGrant> open_grant(const SealedGrant& sealed, const Address& opener) {
  if (opener != sealed.recipient) return std::nullopt;
  return sealed.payload;
}

}  // namespace vmauction
