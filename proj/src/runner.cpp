#include "vmauction/runner.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "vmauction/ledger.hpp"
#include "vmauction/session.hpp"

namespace vmauction {

namespace {

// Runner-side view of one scripted user while the session runs.
struct UserCtx {
  const UserScript* script = nullptr;
  Address addr;
  std::array<std::uint8_t, kNonceBytes> nonce{};
  bool open_attempted = false;
  bool responded = false;  // reacted to delivered goods
  bool reclaimed = false;
  bool settled = false;
  bool reseal_attempted = false;
  std::optional<Clock> delivered_at;
  std::optional<Clock> disputed_at;
  std::optional<Clock> resealed_at;
};

class Runner {
 public:
  explicit Runner(const Scenario& sc)
      : sc_(sc), provider_(ledger_.create_account(sc.provider.seed, sc.provider_balance())) {
    if (sc_.adjudicated) adjudicator_ = ledger_.create_account(kAdjudicatorSeed, 0);
    std::vector<Address> users;
    ctx_.resize(sc_.users.size());
    std::mt19937_64 rng(sc_.nonce_seed);
    for (std::size_t i = 0; i < sc_.users.size(); ++i) {
      ctx_[i].script = &sc_.users[i];
      ctx_[i].addr = ledger_.create_account(sc_.users[i].seed, sc_.user_balance(i));
      for (auto& b : ctx_[i].nonce) b = std::uint8_t(rng());
      users.push_back(ctx_[i].addr);
    }
    order_.resize(ctx_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(),
              [&](std::size_t a, std::size_t b) { return ctx_[a].addr < ctx_[b].addr; });

    SessionConfig config;
    config.sid = sc_.sid;
    config.guaranty = sc_.guaranty;
    config.base_price = sc_.base_price;
    config.deadlines = sc_.deadlines;
    config.supply = sc_.supply;
    config.ladder = sc_.ladder;
    session_.emplace(ledger_, std::move(config), provider_, std::move(users), adjudicator_);
  }

  RunResult run() {
    Clock horizon = sc_.deadlines.dispute_by;
    if (sc_.ladder) horizon = std::max(horizon, session_->ladder_end());
    horizon += 2;
    for (Clock t = 1; t <= horizon; ++t) {
      ledger_.advance_time(t);
      tick(t);
    }
    if (session_->phase() != ContractPhase::Settled &&
        session_->phase() != ContractPhase::Aborted)
      throw std::logic_error("scenario did not reach a terminal phase");
    RunResult result;
    result.trace = ledger_.trace_text();
    result.report = check_fairness(sc_, result.trace);
    return result;
  }

 private:
  void tick(Clock t) {
    poke_if_due();
    if (t == 1) commits();
    opens(t);
    auction_steps();
    reclaims(t);
    deliver(t);
    if (sc_.adjudicated) {
      adjudicated_responses(t);
      reseals(t);
      adjudications(t);
    } else {
      ladder_actions(t);
    }
    finalize(t);
  }

  // Liveness pokes come from an honest party (any party may; one is enough).
  void poke_if_due() {
    if (!session_->deadline_advance_due()) return;
    if (sc_.provider.strategy == ProviderStrategy::Honest) {
      session_->poke(provider_, sc_.provider.seed);
      return;
    }
    for (std::size_t i : order_) {
      if (ctx_[i].script->strategy == UserStrategy::Honest) {
        session_->poke(ctx_[i].addr, ctx_[i].script->seed);
        return;
      }
    }
    session_->poke(provider_, sc_.provider.seed);
  }

  void commits() {
    for (std::size_t i : order_) {
      UserCtx& c = ctx_[i];
      const Digest digest =
          commitment_digest(serialize_bid(c.script->bid), c.nonce, c.addr, sc_.sid);
      session_->submit_commitment(c.addr, c.script->seed, digest, sc_.guaranty);
    }
  }

  void opens(Clock t) {
    if (t < 2 || session_->phase() != ContractPhase::UserOpensCommitment) return;
    for (std::size_t i : order_) {
      UserCtx& c = ctx_[i];
      if (c.open_attempted) continue;
      const auto state = session_->state_of(c.addr);
      if (!state || state->kind != StateKind::UserSentCommitment) {
        c.open_attempted = true;
        continue;
      }
      switch (c.script->strategy) {
        case UserStrategy::AbortAfterCommit:
          break;  // committed, now silent
        case UserStrategy::OpenAltered:
          session_->open_commitment(c.addr, c.script->seed, c.script->altered, c.nonce,
                                    c.script->altered.price);
          break;
        default:
          session_->open_commitment(c.addr, c.script->seed, c.script->bid, c.nonce,
                                    c.script->bid.price);
          break;
      }
      c.open_attempted = true;
    }
  }

  void auction_steps() {
    if (sc_.abandon_auction || session_->phase() != ContractPhase::Auction) return;
    if (!session_->refund_plan()) session_->settle_refunds();
    if (session_->phase() == ContractPhase::Auction && !session_->auction_ran()) {
      session_->run_auction();
      auction_at_ = ledger_.now();
    }
  }

  void reclaims(Clock t) {
    if (!sc_.abandon_auction || t <= sc_.deadlines.auction_by) return;
    for (std::size_t i : order_) {
      UserCtx& c = ctx_[i];
      if (c.reclaimed) continue;
      c.reclaimed = true;
      auto it = session_->commitments().find(c.addr);
      if (it == session_->commitments().end()) continue;
      if (it->second.guaranty_escrow == 0 && it->second.deposit_escrow == 0) continue;
      session_->reclaim_after_timeout(c.addr, c.script->seed);
    }
  }

  VMGrant delivery_payload(const UserCtx& c) const {
    VMGrant g;
    g.recipient = c.addr;
    g.bundle = c.script->bid.bundle;
    switch (sc_.provider.strategy) {
      case ProviderStrategy::InvalidGrant:
      case ProviderStrategy::InvalidGrantThenValid:
      case ProviderStrategy::SilentInDispute:
        g.config_ok = false;
        break;
      case ProviderStrategy::ShutdownAfterSegment:
        g.active_until_segment = sc_.provider.shutdown_after;
        break;
      default:
        break;
    }
    return g;
  }

  void deliver(Clock t) {
    if (delivery_done_ || session_->phase() != ContractPhase::ProviderSendsGoods) return;
    if (sc_.provider.strategy == ProviderStrategy::NoDelivery) {
      delivery_done_ = true;
      return;
    }
    if (!auction_at_ || t <= *auction_at_) return;  // provider reacts a tick later
    for (std::size_t i : order_) {
      UserCtx& c = ctx_[i];
      if (!session_->trades().count(c.addr)) continue;
      session_->provider_deliver(provider_, sc_.provider.seed, c.addr,
                                 SealedGrant{c.addr, delivery_payload(c)});
      c.delivered_at = t;
    }
    delivery_done_ = true;
  }

  // Whether the goods this user holds match what it bid for.
  bool goods_valid(const UserCtx& c) const {
    const auto grant = open_grant(session_->trades().at(c.addr).grant, c.addr);
    return grant && grant->config_ok && grant->bundle == c.script->bid.bundle;
  }

  void adjudicated_responses(Clock t) {
    for (std::size_t i : order_) {
      UserCtx& c = ctx_[i];
      if (c.responded || !c.delivered_at || t <= *c.delivered_at) continue;
      const auto state = session_->state_of(c.addr);
      if (!state || state->kind != StateKind::UserReceivedGoods) continue;
      c.responded = true;
      const bool dispute =
          c.script->strategy == UserStrategy::FalseDispute || !goods_valid(c);
      if (dispute) {
        session_->raise_dispute(c.addr, c.script->seed);
        c.disputed_at = t;
      } else {
        session_->accept_goods(c.addr, c.script->seed);
      }
    }
  }

  void reseals(Clock t) {
    const ProviderStrategy p = sc_.provider.strategy;
    const bool responsive = p == ProviderStrategy::Honest || p == ProviderStrategy::InvalidGrant ||
                            p == ProviderStrategy::InvalidGrantThenValid;
    if (!responsive || t > sc_.deadlines.dispute_by) return;
    for (std::size_t i : order_) {
      UserCtx& c = ctx_[i];
      if (c.reseal_attempted || !c.disputed_at || t <= *c.disputed_at) continue;
      if (!session_->trades().at(c.addr).dispute_open) continue;
      VMGrant payload;
      payload.recipient = c.addr;
      payload.bundle = c.script->bid.bundle;
      payload.config_ok = p != ProviderStrategy::InvalidGrant;
      session_->provider_reseal(provider_, sc_.provider.seed, c.addr,
                                SealedGrant{*adjudicator_, payload});
      c.reseal_attempted = true;
      c.resealed_at = t;
    }
  }

  void adjudications(Clock t) {
    for (std::size_t i : order_) {
      UserCtx& c = ctx_[i];
      auto it = session_->trades().find(c.addr);
      if (it == session_->trades().end() || !it->second.dispute_open) continue;
      const bool ready = (c.resealed_at && t > *c.resealed_at) || t > sc_.deadlines.dispute_by;
      if (ready) session_->adjudicate(*adjudicator_, kAdjudicatorSeed, c.addr);
    }
  }

  void ladder_actions(Clock t) {
    const std::uint32_t segments = sc_.ladder->segments;
    for (std::size_t i : order_) {
      UserCtx& c = ctx_[i];
      auto it = session_->trades().find(c.addr);
      if (it == session_->trades().end() || !it->second.delivered) continue;

      // One-shot reaction to the delivered goods: an honest winner holding
      // wrong goods disaffirms before anything else.
      if (!c.responded && c.delivered_at && t > *c.delivered_at) {
        c.responded = true;
        if (c.script->strategy == UserStrategy::Honest && !goods_valid(c))
          session_->disaffirm(c.addr, c.script->seed);
      }

      const TradeRecord& trade = it->second;
      if (!trade.ladder_settled && !trade.disaffirmed && trade.confirmed < segments) {
        const std::uint32_t next = trade.confirmed + 1;
        if (t == session_->segment_deadline(next) && confirms(c, next))
          session_->confirm(c.addr, c.script->seed, next);
      }

      const TradeRecord& now = it->second;  // refresh after a confirm
      if (!c.settled && !now.ladder_settled && session_->phase() == ContractPhase::Trading) {
        const bool ended = now.disaffirmed || now.confirmed == segments ||
                           t > session_->segment_deadline(now.confirmed + 1);
        if (ended) {
          session_->settle_ladder(c.addr, c.script->seed, c.addr);
          c.settled = true;
        }
      }
    }
  }

  // Would this user send confirmation `segment` now? Honest users confirm
  // segments that were actually served under valid goods; quitters stop at
  // their scripted segment; never-confirmers never speak.
  bool confirms(const UserCtx& c, std::uint32_t segment) const {
    const auto grant = open_grant(session_->trades().at(c.addr).grant, c.addr);
    const bool served = grant && grant->active_until_segment >= segment;
    switch (c.script->strategy) {
      case UserStrategy::Honest:
        return goods_valid(c) && served;
      case UserStrategy::StopAfterSegment:
        return segment <= c.script->stop_after && served;
      case UserStrategy::NeverConfirm:
        return false;
      default:
        return false;  // other roles cannot hold a ladder trade
    }
  }

  void finalize(Clock t) {
    if (finalized_ || t <= sc_.deadlines.dispute_by) return;
    const ContractPhase phase = session_->phase();
    if (phase != ContractPhase::Trading && phase != ContractPhase::Dispute) return;
    for (const auto& [addr, trade] : session_->trades()) {
      if (trade.dispute_open) return;
      if (sc_.ladder && trade.delivered &&
          !(trade.compensated || trade.completed || trade.ladder_settled))
        return;
    }
    session_->finalize_trade();
    finalized_ = true;
  }

  const Scenario& sc_;
  Ledger ledger_;
  Address provider_;
  std::optional<Address> adjudicator_;
  std::vector<UserCtx> ctx_;
  std::vector<std::size_t> order_;
  std::optional<ContractSession> session_;
  std::optional<Clock> auction_at_;
  bool delivery_done_ = false;
  bool finalized_ = false;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario) { return Runner(scenario).run(); }

}  // namespace vmauction
