#include <vector>

#include "doctest.h"
#include "fixture.hpp"
#include "vmauction/session.hpp"

using namespace vmauction;

TEST_CASE("commit then open with the committed bid") {
  SessionFixture fx(2, basic_config(5, 1, {5}, {1}));
  fx.ledger.advance_time(1);
  CHECK(fx.commit(0, {{2}, 6}).admitted());
  CHECK(fx.ledger.balance(fx.users[0]) == 995);  // guaranty escrowed
  CHECK(fx.commit(1, {{1}, 4}).admitted());
  CHECK(fx.session->phase() == ContractPhase::UserOpensCommitment);

  fx.ledger.advance_time(2);
  CHECK(fx.open(0, {{2}, 6}).admitted());
  CHECK(fx.ledger.balance(fx.users[0]) == 989);  // plus deposit 6
  CHECK(fx.session->state_of(fx.users[0])->kind == StateKind::UserOpenedCommitment);
  CHECK(fx.open(1, {{1}, 4}).admitted());
  CHECK(fx.session->phase() == ContractPhase::Auction);
}

TEST_CASE("commitment guards") {
  SessionFixture fx(2, basic_config(5, 1, {5}, {1}));
  fx.ledger.advance_time(1);

  // Wrong seed.
  CHECK(fx.session->submit_commitment(fx.users[0], "not-the-seed", fx.digest_for(0, {{1}, 2}), 5)
            .reject == Reject::Auth);
  // Wrong guaranty amount.
  CHECK(fx.session->submit_commitment(fx.users[0], fx.seed(0), fx.digest_for(0, {{1}, 2}), 4)
            .reject == Reject::Extra);
  CHECK(fx.commit(0, {{1}, 2}).admitted());
  // Double commit.
  CHECK(fx.commit(0, {{1}, 2}).reject == Reject::State);
  // Commit after the deadline.
  fx.ledger.advance_time(3);
  CHECK(fx.commit(1, {{1}, 2}).reject == Reject::Deadline);
}

TEST_CASE("opening an altered bid forfeits the guaranty immediately") {
  SessionFixture fx(2, basic_config(5, 1, {5}, {1}));
  fx.ledger.advance_time(1);
  fx.commit(0, {{2}, 3});
  fx.commit(1, {{1}, 5});
  fx.ledger.advance_time(2);

  const Decision d = fx.open(0, {{2}, 9});  // committed to price 3, opens 9
  CHECK(d.reject == Reject::Extra);
  CHECK(fx.session->state_of(fx.users[0])->kind == StateKind::UserFailsToOpenCommitment);
  CHECK(fx.ledger.balance(fx.users[0]) == 995);  // guaranty gone, no deposit taken

  // A burned opening shot does not block the phase: the other opener finishes
  // the phase alone.
  CHECK(fx.open(1, {{1}, 5}).admitted());
  CHECK(fx.session->phase() == ContractPhase::Auction);

  // The forfeited guaranty funds the opener bonus: 5 + pool 5 = 10.
  CHECK(fx.session->settle_refunds().admitted());
  CHECK(fx.session->refund_plan()->pool == 5);
  CHECK(fx.ledger.balance(fx.users[1]) == 1000 - 5 + 5);  // deposit 5 still held
}

TEST_CASE("wrong nonce forfeits too") {
  SessionFixture fx(1, basic_config(5, 1, {5}, {1}));
  fx.ledger.advance_time(1);
  fx.commit(0, {{2}, 3});
  fx.ledger.advance_time(2);
  auto bad_nonce = fx.nonces[0];
  bad_nonce[0] ^= 1;
  CHECK(fx.session->open_commitment(fx.users[0], fx.seed(0), {{2}, 3}, bad_nonce, 3).reject ==
        Reject::Extra);
  CHECK(fx.session->state_of(fx.users[0])->kind == StateKind::UserFailsToOpenCommitment);
}

TEST_CASE("a silent commitment is marked failed only after the deadline") {
  SessionFixture fx(2, basic_config(5, 1, {5}, {1}));
  fx.ledger.advance_time(1);
  fx.commit(0, {{2}, 3});
  fx.commit(1, {{1}, 5});
  fx.ledger.advance_time(2);
  fx.open(1, {{1}, 5});
  CHECK(fx.session->phase() == ContractPhase::UserOpensCommitment);
  CHECK(fx.session->state_of(fx.users[0])->kind == StateKind::UserSentCommitment);

  // Past the open deadline a poke sweeps the non-opener and moves on.
  fx.ledger.advance_time(5);
  CHECK(fx.session->deadline_advance_due());
  CHECK(fx.session->poke(fx.provider, "provider").admitted());
  CHECK(fx.session->state_of(fx.users[0])->kind == StateKind::UserFailsToOpenCommitment);
  CHECK(fx.session->phase() == ContractPhase::Auction);

  // Opening after the sweep is permanently rejected without a second forfeit.
  const Coin before = fx.ledger.balance(fx.users[0]);
  CHECK(fx.open(0, {{2}, 3}).reject == Reject::Phase);
  CHECK(fx.ledger.balance(fx.users[0]) == before);
}

TEST_CASE("refund split: one non-opener, one eligible opener") {
  // guaranty 5, base price 1; openers (price 5, size 1) and (price 1, size 4).
  // The second misses the eligibility floor 1 <= 1/sqrt(4), so the whole pool
  // of 5 goes to the first: refunds 10 and 5.
  SessionFixture fx(3, basic_config(5, 1, {5}, {1}));
  fx.ledger.advance_time(1);
  fx.commit(0, {{1}, 5});
  fx.commit(1, {{4}, 1});
  fx.commit(2, {{1}, 3});
  fx.ledger.advance_time(2);
  fx.open(0, {{1}, 5});
  fx.open(1, {{4}, 1});
  // User 2 never opens.
  fx.ledger.advance_time(5);
  fx.session->poke(fx.provider, "provider");
  CHECK(fx.session->settle_refunds().admitted());

  const RefundPlan& plan = *fx.session->refund_plan();
  CHECK(plan.pool == 5);
  CHECK(plan.failed == 1);
  CHECK(plan.remainder == 0);
  REQUIRE(plan.refunds.size() == 2);
  CHECK(plan.refunds[0].second + plan.refunds[1].second == 15);
  for (const auto& [addr, amount] : plan.refunds) {
    if (addr == fx.users[0]) CHECK(amount == 10);
    if (addr == fx.users[1]) CHECK(amount == 5);
  }
}

TEST_CASE("refund split: two non-openers, pro-rata shares with dust") {
  // Pool 10 over eligible densities 3 and 1: shares 7 and 2, dust 1 to the
  // provider; refunds 12 and 7.
  SessionFixture fx(4, basic_config(5, 1, {4}, {1}));
  fx.ledger.advance_time(1);
  for (std::size_t i = 0; i < 4; ++i)
    fx.commit(i, i == 2 ? Bid{{1}, 3} : i == 3 ? Bid{{1}, 1} : Bid{{2}, 6});
  fx.ledger.advance_time(2);
  fx.open(2, {{1}, 3});
  fx.open(3, {{1}, 1});
  fx.ledger.advance_time(5);
  fx.session->poke(fx.provider, "provider");

  const Coin provider_before = fx.ledger.balance(fx.provider);
  CHECK(fx.session->settle_refunds().admitted());
  const RefundPlan& plan = *fx.session->refund_plan();
  CHECK(plan.pool == 10);
  CHECK(plan.failed == 2);
  CHECK(plan.remainder == 1);
  CHECK(plan.remainder < plan.refunds.size() + plan.failed);  // dust below head count
  for (const auto& [addr, amount] : plan.refunds) {
    if (addr == fx.users[2]) CHECK(amount == 12);
    if (addr == fx.users[3]) CHECK(amount == 7);
  }
  CHECK(fx.ledger.balance(fx.provider) == provider_before + 1);
}

TEST_CASE("no eligible opener sends the whole pool to the provider") {
  // base price 3: opener density 2 < 3, ineligible; aborter's guaranty 5 all
  // lands with the provider.
  SessionFixture fx(2, basic_config(5, 3, {1}, {1}));
  fx.ledger.advance_time(1);
  fx.commit(0, {{1}, 4});
  fx.commit(1, {{1}, 2});
  fx.ledger.advance_time(2);
  fx.open(1, {{1}, 2});
  fx.ledger.advance_time(5);
  fx.session->poke(fx.provider, "provider");

  const Coin provider_before = fx.ledger.balance(fx.provider);
  CHECK(fx.session->settle_refunds().admitted());
  const RefundPlan& plan = *fx.session->refund_plan();
  CHECK(plan.pool == 5);
  CHECK(plan.remainder == 5);
  CHECK(fx.ledger.balance(fx.provider) == provider_before + 5);
  for (const auto& [addr, amount] : plan.refunds)
    if (addr == fx.users[1]) CHECK(amount == 5);  // guaranty back, no bonus
}

TEST_CASE("refunds cannot be settled twice or before the phase") {
  SessionFixture fx(1, basic_config(5, 1, {5}, {1}));
  fx.ledger.advance_time(1);
  CHECK(fx.session->settle_refunds().reject == Reject::Phase);
  fx.commit(0, {{1}, 2});
  fx.ledger.advance_time(2);
  fx.open(0, {{1}, 2});
  CHECK(fx.session->settle_refunds().admitted());
  CHECK(fx.session->settle_refunds().reject == Reject::Extra);
}

TEST_CASE("reclaim after the auction never ran") {
  SessionFixture fx(2, basic_config(5, 1, {5}, {1}));
  fx.commit_and_open({{{2}, 6}, {{1}, 4}});
  // Nobody runs the auction; past its deadline the session aborts and users
  // pull everything back.
  fx.ledger.advance_time(7);
  const auto r0 = fx.session->reclaim_after_timeout(fx.users[0], fx.seed(0));
  CHECK(r0.decision.admitted());
  CHECK(r0.amount == 11);  // guaranty 5 + deposit 6
  CHECK(fx.session->phase() == ContractPhase::Aborted);
  CHECK(fx.ledger.balance(fx.users[0]) == 1000);
  const auto r1 = fx.session->reclaim_after_timeout(fx.users[1], fx.seed(1));
  CHECK(r1.amount == 9);
  // Second reclaim is an admitted no-op.
  const auto again = fx.session->reclaim_after_timeout(fx.users[0], fx.seed(0));
  CHECK(again.decision.admitted());
  CHECK(again.amount == 0);

  // Premature reclaim is rejected.
  SessionFixture early(1, basic_config(5, 1, {5}, {1}));
  early.commit_and_open({{{2}, 6}});
  early.ledger.advance_time(5);
  CHECK(early.session->reclaim_after_timeout(early.users[0], "u0").decision.reject ==
        Reject::Extra);
}
