#include "vmauction/protocol.hpp"

#include <stdexcept>

namespace vmauction {

std::string to_string(const ParticipantState& s) {
  switch (s.kind) {
    case StateKind::UserInitState: return "UserInitState";
    case StateKind::UserSentCommitment: return "UserSentCommitment";
    case StateKind::UserOpenedCommitment: return "UserOpenedCommitment";
    case StateKind::UserFailsToOpenCommitment: return "UserFailsToOpenCommitment";
    case StateKind::UserWinsAtTheAuction: return "UserWinsAtTheAuction";
    case StateKind::UserFailsInTheAuction: return "UserFailsInTheAuction";
    case StateKind::UserReceivedGoods: return "UserReceivedGoods";
    case StateKind::WrongGoods: return "WrongGoods";
    case StateKind::Using: return "Using(" + std::to_string(s.segment) + ")";
    case StateKind::ProviderInitState: return "ProviderInitState";
    case StateKind::ProviderSentGoods: return "ProviderSentGoods";
  }
  throw std::logic_error("unknown participant state");
}

std::string_view to_string(ContractPhase phase) {
  switch (phase) {
    case ContractPhase::UserSendsCommitment: return "UserSendsCommitment";
    case ContractPhase::UserOpensCommitment: return "UserOpensCommitment";
    case ContractPhase::Auction: return "Auction";
    case ContractPhase::ProviderSendsGoods: return "ProviderSendsGoods";
    case ContractPhase::Trading: return "Trading";
    case ContractPhase::Dispute: return "Dispute";
    case ContractPhase::Settled: return "Settled";
    case ContractPhase::Aborted: return "Aborted";
  }
  throw std::logic_error("unknown phase");
}

std::string_view to_string(Reject r) {
  switch (r) {
    case Reject::None: return "none";
    case Reject::Auth: return "auth";
    case Reject::Phase: return "phase";
    case Reject::State: return "state";
    case Reject::Extra: return "extra";
    case Reject::Deadline: return "deadline";
    case Reject::Config: return "config";
  }
  throw std::logic_error("unknown reject reason");
}

Decision check_guard(const GuardEnv& env) {
  if (!env.authenticated) return Decision::fail(Reject::Auth, "sender authentication failed");
  if ((env.allowed_phases & phase_bit(env.phase)) == 0) {
    std::string allowed;
    for (unsigned p = 0; p < 8; ++p) {
      if ((env.allowed_phases & (1u << p)) == 0) continue;
      if (!allowed.empty()) allowed += '/';
      allowed += to_string(ContractPhase(p));
    }
    return Decision::fail(Reject::Phase, "phase is " + std::string(to_string(env.phase)) +
                                             ", action requires " + allowed);
  }
  if (env.required_state) {
    if (!env.state)
      return Decision::fail(Reject::State, "sender holds no participant state, action requires " +
                                               to_string(*env.required_state));
    if (*env.state != *env.required_state)
      return Decision::fail(Reject::State, "sender state is " + to_string(*env.state) +
                                               ", action requires " +
                                               to_string(*env.required_state));
  }
  if (!env.extra_ok) return Decision::fail(Reject::Extra, env.extra_detail);
  if (env.now > env.deadline)
    return Decision::fail(Reject::Deadline, "deadline " + std::to_string(env.deadline) +
                                                " passed at " + std::to_string(env.now));
  return Decision::ok();
}

bool is_participant_edge(const ParticipantState& from, const ParticipantState& to) {
  using K = StateKind;
  if (from.kind == K::Using)
    return to.kind == K::Using && to.segment == from.segment + 1;
  switch (from.kind) {
    case K::UserInitState:
      return to.kind == K::UserSentCommitment;
    case K::UserSentCommitment:
      return to.kind == K::UserOpenedCommitment || to.kind == K::UserFailsToOpenCommitment;
    case K::UserOpenedCommitment:
      return to.kind == K::UserWinsAtTheAuction || to.kind == K::UserFailsInTheAuction;
    case K::UserWinsAtTheAuction:
      return to.kind == K::UserReceivedGoods;
    case K::UserReceivedGoods:
      return to.kind == K::WrongGoods || (to.kind == K::Using && to.segment == 1);
    case K::WrongGoods:
      // Resolved in the user's favor with valid goods forwarded.
      return to.kind == K::Using && to.segment == 1;
    case K::ProviderInitState:
      return to.kind == K::ProviderSentGoods;
    default:
      return false;
  }
}

bool is_phase_edge(ContractPhase from, ContractPhase to) {
  using P = ContractPhase;
  switch (from) {
    case P::UserSendsCommitment:
      return to == P::UserOpensCommitment || to == P::Aborted;
    case P::UserOpensCommitment:
      return to == P::Auction || to == P::Aborted;
    case P::Auction:
      // Straight to Settled when nobody wins; Aborted when the allocation
      // never ran and the reclaim window opened.
      return to == P::ProviderSendsGoods || to == P::Settled || to == P::Aborted;
    case P::ProviderSendsGoods:
      return to == P::Trading || to == P::Settled;
    case P::Trading:
      return to == P::Dispute || to == P::Settled;
    case P::Dispute:
      return to == P::Settled;
    case P::Settled:
    case P::Aborted:
      return false;
  }
  return false;
}

}  // namespace vmauction
