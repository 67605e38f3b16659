#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmauction/auction.hpp"
#include "vmauction/ledger.hpp"
#include "vmauction/protocol.hpp"

namespace vmauction {

struct Deadlines {
  Clock commit_by = 0;   // last tick to submit a commitment
  Clock open_by = 0;     // last tick to open one
  Clock auction_by = 0;  // allocation must have run by here, else reclaim opens
  Clock deliver_by = 0;  // provider must have served every winner
  Clock dispute_by = 0;  // last tick for dispute-resolution actions
};

struct LadderParams {
  std::uint32_t segments = 1;  // e
  Clock usage_total = 1;       // service duration, split into e uniform segments
  Coin tolerate = 0;           // largest per-trade loss the provider accepts
};

struct SessionConfig {
  std::uint64_t sid = 0;
  Coin guaranty = 0;    // escrow required with every commitment
  Coin base_price = 0;  // per-size-unit floor: eligibility and compensation rate
  Deadlines deadlines;
  ProviderSupply supply;
  std::optional<LadderParams> ladder;  // present: ladder trade; absent: adjudicated
};

// The goods: the granted bundle, whether the VM configuration honors the
// service agreement, and through which ladder segment the provider actually
// keeps the VMs up (simulation ground truth for shutdown strategies).
struct VMGrant {
  static constexpr std::uint32_t kNoShutdown = ~std::uint32_t(0);
  Address recipient;
  std::vector<std::uint32_t> bundle;
  bool config_ok = true;
  std::uint32_t active_until_segment = kNoShutdown;
};

// Delivery wrapper standing in for recipient-keyed encryption: only the
// sealed-to address can read the payload.
struct SealedGrant {
  Address recipient;
  VMGrant payload;
};

// The sealing rule: yields the payload iff opener is the sealed-to address.
std::optional<VMGrant> open_grant(const SealedGrant& sealed, const Address& opener);

struct CommitmentRecord {
  Address owner;
  Digest digest{};
  Coin guaranty_escrow = 0;
  bool opened = false;
  Bid bid;            // valid once opened
  Coin size = 0;      // weighted bundle size, set on open
  Coin deposit_escrow = 0;
};

struct TradeRecord {
  Coin price = 0;         // charge fixed by the auction
  Coin price_escrow = 0;  // held until completion or compensation
  bool delivered = false;
  SealedGrant grant;
  bool dispute_open = false;
  bool disputed = false;
  std::optional<SealedGrant> reseal;  // adjudicator's copy
  bool compensated = false;
  bool completed = false;
  // Ladder bookkeeping.
  std::uint32_t confirmed = 0;  // highest confirmed segment
  std::uint32_t served = 0;     // highest segment actually made available
  bool disaffirmed = false;
  bool ladder_settled = false;
};

struct RefundPlan {
  Coin pool = 0;             // forfeited guaranties
  std::uint32_t failed = 0;  // commitments never opened
  std::vector<std::pair<Address, Coin>> refunds;  // per opener: guaranty + bonus share
  Coin remainder = 0;        // pool dust, goes to the provider
};

// One auction session run against a ledger: escrows, the phase machine, the
// allocation, and one of the two trade mechanisms. Every operation is
// guarded; a failed guard appends a Reject event and changes nothing.
class ContractSession {
 public:
  ContractSession(Ledger& ledger, SessionConfig config, Address provider,
                  std::vector<Address> users, std::optional<Address> adjudicator);

  // --- commitment phase ---
  Decision submit_commitment(const Address& actor, std::string_view seed, const Digest& digest,
                             Coin guaranty);
  Decision open_commitment(const Address& actor, std::string_view seed, const Bid& bid,
                           std::span<const std::uint8_t> nonce, Coin deposit);
  // Returns guaranties to openers plus the forfeit-pool bonus, split across
  // eligible openers pro rata by scaled density; must run before the
  // allocation.
  Decision settle_refunds();

  struct ReclaimResult {
    Decision decision;
    Coin amount = 0;
  };
  // A user pulls back whatever escrow it still holds once the allocation
  // deadline passed without the auction ever running.
  ReclaimResult reclaim_after_timeout(const Address& actor, std::string_view seed);

  // --- auction ---
  Decision run_auction();

  // --- trade, both mechanisms ---
  Decision provider_deliver(const Address& actor, std::string_view seed, const Address& winner,
                            SealedGrant grant);
  Decision accept_goods(const Address& actor, std::string_view seed);
  Decision finalize_trade();

  // --- adjudicated trade ---
  Decision raise_dispute(const Address& actor, std::string_view seed);
  Decision provider_reseal(const Address& actor, std::string_view seed, const Address& winner,
                           SealedGrant grant);
  Decision adjudicate(const Address& actor, std::string_view seed, const Address& winner);

  // --- ladder trade ---
  Decision confirm(const Address& actor, std::string_view seed, std::uint32_t segment);
  Decision disaffirm(const Address& actor, std::string_view seed);
  Decision settle_ladder(const Address& actor, std::string_view seed, const Address& winner);

  // Deadline-driven phase advance; any registered party may poke.
  Decision poke(const Address& actor, std::string_view seed);
  // True when a poke right now would move the phase machine.
  bool deadline_advance_due() const;

  // --- queries ---
  ContractPhase phase() const { return phase_; }
  std::optional<ParticipantState> state_of(const Address& addr) const;
  const Address& contract_address() const { return contract_; }
  const Address& provider_address() const { return provider_; }
  const SessionConfig& config() const { return config_; }
  bool auction_ran() const { return auction_ran_; }
  const std::optional<RefundPlan>& refund_plan() const { return refund_plan_; }
  const std::map<Address, CommitmentRecord>& commitments() const { return commitments_; }
  const std::map<Address, TradeRecord>& trades() const { return trades_; }

  // Ranked allocation result, one entry per opener, best density first.
  struct RankedBidder {
    Address addr;
    bool won = false;
    Coin price = 0;
    std::optional<Address> critical;
  };
  const std::vector<RankedBidder>& ranking() const { return ranking_; }

  // Ladder segment i must be confirmed by this tick.
  Clock segment_deadline(std::uint32_t segment) const;
  Clock ladder_end() const;

 private:
  GuardEnv base_env(const Address& actor, std::string_view seed, std::uint8_t phases) const;
  Decision reject(const Address& actor, Decision d, std::string_view op);
  void set_phase(ContractPhase next, std::string_view why);
  void set_state(const Address& who, ParticipantState next, std::string_view why);
  void pay(const Address& to, Coin amount, std::string note);      // contract -> to
  void collect(const Address& from, Coin amount, std::string note);  // from -> contract
  bool is_user(const Address& addr) const;
  bool is_party(const Address& addr) const;
  bool no_commitment_pending() const;
  void mark_non_openers();
  // Runs every deadline-driven phase move that is due; shared by poke and
  // reclaim_after_timeout.
  bool advance_deadline_phases();
  void advance_if_all_served();
  void abort_session();
  void default_settle_unserved();
  void compensate(const Address& winner, TradeRecord& trade, std::string_view why);
  void serve_segment(const Address& winner, TradeRecord& trade, std::uint32_t segment);
  bool grant_valid_for(const Address& winner, const VMGrant& grant) const;
  static bool trade_resolved(const TradeRecord& trade);

  Ledger& ledger_;
  SessionConfig config_;
  Address contract_;
  std::string contract_seed_;
  Address provider_;
  std::vector<Address> users_;
  std::optional<Address> adjudicator_;
  ContractPhase phase_ = ContractPhase::UserSendsCommitment;
  std::map<Address, ParticipantState> states_;
  std::map<Address, CommitmentRecord> commitments_;
  std::map<Address, TradeRecord> trades_;
  std::optional<RefundPlan> refund_plan_;
  std::vector<RankedBidder> ranking_;
  Coin provider_deposit_escrow_ = 0;
  Coin forfeit_pool_ = 0;
  std::uint32_t forfeited_count_ = 0;
  Clock open_phase_entered_ = 0;
  bool open_phase_seen_ = false;
  bool auction_ran_ = false;
};

}  // namespace vmauction
