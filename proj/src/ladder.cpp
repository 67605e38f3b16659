#include <stdexcept>

#include "vmauction/session.hpp"

namespace vmauction {

namespace {

constexpr std::uint8_t kLadderWindow =
    phase_bit(ContractPhase::ProviderSendsGoods) | phase_bit(ContractPhase::Trading);

}  // namespace

Decision ContractSession::confirm(const Address& actor, std::string_view seed,
                                  std::uint32_t segment) {
  GuardEnv env = base_env(actor, seed, kLadderWindow);
  env.required_state = using_segment(segment);
  if (!config_.ladder) {
    env.extra_ok = false;
    env.extra_detail = "confirmations only exist in ladder trade";
  } else {
    env.deadline = segment_deadline(segment);
    auto it = trades_.find(actor);
    if (it == trades_.end() || !it->second.delivered) {
      env.extra_ok = false;
      env.extra_detail = "no delivered trade to confirm";
    } else if (it->second.ladder_settled) {
      env.extra_ok = false;
      env.extra_detail = "ladder already settled";
    } else if (it->second.disaffirmed) {
      env.extra_ok = false;
      env.extra_detail = "goods were disaffirmed";
    } else if (segment != it->second.confirmed + 1 || segment > config_.ladder->segments) {
      env.extra_ok = false;
      env.extra_detail = "confirmation out of sequence: next is segment " +
                         std::to_string(it->second.confirmed + 1);
    }
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "confirm");

  TradeRecord& trade = trades_.at(actor);
  trade.confirmed = segment;
  ledger_.log(EventKind::StateChange, actor, contract_,
              "confirm segment=" + std::to_string(segment));
  if (segment < config_.ladder->segments) {
    set_state(actor, using_segment(segment + 1), "confirmed");
    // The next segment is only actually up while the provider keeps it up.
    if (trade.grant.payload.active_until_segment >= segment + 1)
      serve_segment(actor, trade, segment + 1);
  }
  return Decision::ok();
}

Decision ContractSession::disaffirm(const Address& actor, std::string_view seed) {
  GuardEnv env = base_env(actor, seed, kLadderWindow);
  env.required_state = using_segment(1);
  if (!config_.ladder) {
    env.extra_ok = false;
    env.extra_detail = "disaffirm only exists in ladder trade";
  } else {
    env.deadline = segment_deadline(1);
    auto it = trades_.find(actor);
    if (it == trades_.end() || !it->second.delivered) {
      env.extra_ok = false;
      env.extra_detail = "no delivered trade to disaffirm";
    } else if (it->second.ladder_settled) {
      env.extra_ok = false;
      env.extra_detail = "ladder already settled";
    } else if (it->second.confirmed > 0) {
      env.extra_ok = false;
      env.extra_detail = "usage already confirmed";
    }
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "disaffirm");

  TradeRecord& trade = trades_.at(actor);
  // A repeated disaffirmation changes nothing and is not an offense.
  if (trade.disaffirmed) return Decision::ok();
  trade.disaffirmed = true;
  ledger_.log(EventKind::StateChange, actor, contract_, "disaffirm");
  return Decision::ok();
}

Decision ContractSession::settle_ladder(const Address& actor, std::string_view seed,
                                        const Address& winner) {
  GuardEnv env = base_env(actor, seed, phase_bit(ContractPhase::Trading));
  auto it = trades_.find(winner);
  if (!config_.ladder) {
    env.extra_ok = false;
    env.extra_detail = "no ladder to settle";
  } else if (actor != provider_ && actor != winner) {
    env.extra_ok = false;
    env.extra_detail = "only the provider or the winner settles a ladder";
  } else if (it == trades_.end() || !it->second.delivered) {
    env.extra_ok = false;
    env.extra_detail = "no delivered trade to settle";
  } else if (it->second.ladder_settled) {
    env.extra_ok = false;
    env.extra_detail = "ladder already settled";
  } else if (!it->second.disaffirmed && it->second.confirmed < config_.ladder->segments &&
             ledger_.now() <= segment_deadline(it->second.confirmed + 1)) {
    env.extra_ok = false;
    env.extra_detail = "ladder is still live: segment " +
                       std::to_string(it->second.confirmed + 1) + " is not overdue";
  }
  if (Decision d = check_guard(env); !d.admitted())
    return reject(actor, std::move(d), "settle_ladder");

  TradeRecord& trade = it->second;
  const auto& l = *config_.ladder;
  // Confirmed fraction of the charge to the provider, exact complement back
  // to the winner.
  const Coin provider_share =
      Coin(static_cast<u128>(trade.confirmed) * trade.price / l.segments);
  const Coin winner_share = trade.price - provider_share;
  pay(provider_, provider_share,
      "ladder-payment winner=" + winner.hex() + " confirmed=" +
          std::to_string(trade.confirmed) + "/" + std::to_string(l.segments));
  pay(winner, winner_share, "ladder-refund");
  trade.price_escrow = 0;
  trade.ladder_settled = true;
  trade.completed = true;
  return Decision::ok();
}

}  // namespace vmauction
