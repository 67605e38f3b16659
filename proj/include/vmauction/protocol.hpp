#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "vmauction/ledger.hpp"

namespace vmauction {

// Per-participant protocol states. Using carries the current ladder segment.
enum class StateKind : std::uint8_t {
  UserInitState,
  UserSentCommitment,
  UserOpenedCommitment,
  UserFailsToOpenCommitment,
  UserWinsAtTheAuction,
  UserFailsInTheAuction,
  UserReceivedGoods,
  WrongGoods,
  Using,
  ProviderInitState,
  ProviderSentGoods,
};

struct ParticipantState {
  StateKind kind = StateKind::UserInitState;
  std::uint32_t segment = 0;  // meaningful only for Using
  bool operator==(const ParticipantState&) const = default;
};

inline ParticipantState using_segment(std::uint32_t i) { return {StateKind::Using, i}; }

std::string to_string(const ParticipantState& s);

enum class ContractPhase : std::uint8_t {
  UserSendsCommitment,
  UserOpensCommitment,
  Auction,
  ProviderSendsGoods,
  Trading,
  Dispute,
  Settled,
  Aborted,
};

std::string_view to_string(ContractPhase phase);

// Rejection reasons, in the order the guard checks them.
enum class Reject : std::uint8_t { None, Auth, Phase, State, Extra, Deadline, Config };

std::string_view to_string(Reject r);

struct Decision {
  Reject reject = Reject::None;
  std::string detail;
  bool admitted() const { return reject == Reject::None; }
  static Decision ok() { return {}; }
  static Decision fail(Reject r, std::string detail) { return {r, std::move(detail)}; }
};

constexpr std::uint8_t phase_bit(ContractPhase p) {
  return std::uint8_t(1u << unsigned(p));
}

// One guarded action: admitted iff the sender authenticates, the contract
// phase is one the action allows, the sender's own state matches what the
// action requires, any action-specific predicate holds, and the deadline
// has not passed. Checked in exactly that order.
struct GuardEnv {
  bool authenticated = false;
  ContractPhase phase = ContractPhase::UserSendsCommitment;
  std::uint8_t allowed_phases = 0;
  std::optional<ParticipantState> state;           // sender's state, if a participant
  std::optional<ParticipantState> required_state;  // nullopt skips the check
  bool extra_ok = true;
  std::string extra_detail;       // reported when extra_ok is false
  Clock now = 0;
  Clock deadline = kNoDeadline;   // inclusive: now <= deadline admits
  static constexpr Clock kNoDeadline = ~Clock(0);
};

Decision check_guard(const GuardEnv& env);

// Legal transitions of the per-participant state machine. Using(i) advances
// only to Using(i+1).
bool is_participant_edge(const ParticipantState& from, const ParticipantState& to);

// Contract phases only move forward along the declared order; Aborted is
// reachable from any live pre-trade phase, Settled only from trade phases.
bool is_phase_edge(ContractPhase from, ContractPhase to);

}  // namespace vmauction
