#include <vector>

#include "doctest.h"
#include "fixture.hpp"
#include "vmauction/session.hpp"

using namespace vmauction;

namespace {

// Worked instance: capacity 5, base price 2; winners u0 (charge 4) and u2
// (charge 0), loser u1; provider deposit 10.
struct TradeFixture : SessionFixture {
  const std::vector<Bid> bids{{{4}, 10}, {{2}, 3}, {{1}, 3}};

  TradeFixture() : SessionFixture(3, basic_config(5, 2, {5}, {1})) {
    commit_and_open(bids);
    session->settle_refunds();
    session->run_auction();
  }

  Decision deliver(std::size_t i) {
    return session->provider_deliver(provider, "provider", users[i], valid_grant(i, bids[i]));
  }

  SealedGrant invalid_grant_for(std::size_t i) const {
    SealedGrant g = valid_grant(i, bids[i]);
    g.payload.config_ok = false;
    return g;
  }
};

}  // namespace

TEST_CASE("allocation opens trades for winners only") {
  TradeFixture fx;
  CHECK(fx.session->phase() == ContractPhase::ProviderSendsGoods);
  CHECK(fx.session->trades().count(fx.users[0]) == 1);
  CHECK(fx.session->trades().count(fx.users[1]) == 0);
  CHECK(fx.session->trades().count(fx.users[2]) == 1);
  CHECK(fx.session->trades().at(fx.users[0]).price == 4);
  CHECK(fx.session->trades().at(fx.users[0]).price_escrow == 4);
  CHECK(fx.session->trades().at(fx.users[2]).price == 0);
  // Loser got everything back; winner's charge stays escrowed.
  CHECK(fx.ledger.balance(fx.users[1]) == 1000);
  CHECK(fx.ledger.balance(fx.users[0]) == 996);
  CHECK(fx.session->state_of(fx.users[1])->kind == StateKind::UserFailsInTheAuction);
}

TEST_CASE("grant sealing: only the recipient can open") {
  const SealedGrant sealed{Address::from_seed("a"), VMGrant{Address::from_seed("a"), {1}, true, 0}};
  CHECK(open_grant(sealed, Address::from_seed("a")).has_value());
  CHECK_FALSE(open_grant(sealed, Address::from_seed("b")).has_value());
}

TEST_CASE("delivery guards") {
  TradeFixture fx;
  fx.ledger.advance_time(3);
  // Only the provider delivers: a user actor is not in the provider's
  // delivery state, so the state guard fires.
  CHECK(fx.session->provider_deliver(fx.users[0], "u0", fx.users[0], fx.valid_grant(0, fx.bids[0]))
            .reject == Reject::State);
  // Only to winners.
  CHECK(fx.session->provider_deliver(fx.provider, "provider", fx.users[1],
                                     fx.valid_grant(1, fx.bids[1]))
            .reject == Reject::Extra);
  // Grant must be sealed to the winner.
  SealedGrant misaddressed = fx.valid_grant(0, fx.bids[0]);
  misaddressed.recipient = fx.users[1];
  CHECK(fx.session->provider_deliver(fx.provider, "provider", fx.users[0], misaddressed).reject ==
        Reject::Extra);

  CHECK(fx.deliver(0).admitted());
  // No double delivery.
  CHECK(fx.deliver(0).reject == Reject::Extra);
  CHECK(fx.session->state_of(fx.users[0])->kind == StateKind::UserReceivedGoods);

  // Past the delivery deadline the window is closed.
  fx.ledger.advance_time(10);
  CHECK(fx.deliver(2).reject == Reject::Deadline);
}

TEST_CASE("accept then finalize pays the provider and returns the deposit") {
  TradeFixture fx;
  fx.ledger.advance_time(3);
  fx.deliver(0);
  fx.deliver(2);
  CHECK(fx.session->phase() == ContractPhase::Trading);
  fx.ledger.advance_time(4);
  CHECK(fx.session->accept_goods(fx.users[0], "u0").admitted());
  CHECK(fx.session->state_of(fx.users[0])->segment == 1);
  CHECK(fx.session->accept_goods(fx.users[2], "u2").admitted());

  // Too early: settlement opens only after the dispute deadline.
  CHECK(fx.session->finalize_trade().reject == Reject::Extra);
  const Coin provider_before = fx.ledger.balance(fx.provider);
  fx.ledger.advance_time(15);
  CHECK(fx.session->finalize_trade().admitted());
  // Charge 4 plus the full deposit 10 flow back at settlement, not earlier.
  CHECK(fx.ledger.balance(fx.provider) == provider_before + 4 + 10);
  CHECK(fx.session->phase() == ContractPhase::Settled);
  CHECK(fx.ledger.balance(fx.users[0]) == 996);  // paid exactly the charge
  CHECK(fx.ledger.balance(fx.users[2]) == 1000);  // zero charge
}

TEST_CASE("dispute, reseal to the adjudicator, invalid verdict compensates") {
  TradeFixture fx;
  fx.ledger.advance_time(3);
  fx.session->provider_deliver(fx.provider, "provider", fx.users[0], fx.invalid_grant_for(0));
  fx.deliver(2);
  fx.ledger.advance_time(4);

  CHECK(fx.session->raise_dispute(fx.users[0], "u0").admitted());
  CHECK(fx.session->state_of(fx.users[0])->kind == StateKind::WrongGoods);
  CHECK(fx.session->phase() == ContractPhase::Dispute);
  // One dispute per trade.
  CHECK(fx.session->raise_dispute(fx.users[0], "u0").reject == Reject::State);

  // The adjudicator must wait for the reseal while the window is open.
  CHECK(fx.session->adjudicate(*fx.adjudicator, "adjudicator", fx.users[0]).reject ==
        Reject::Extra);
  // The reseal must go to the adjudicator, not back to the winner.
  CHECK(fx.session->provider_reseal(fx.provider, "provider", fx.users[0],
                                    fx.invalid_grant_for(0))
            .reject == Reject::Extra);
  SealedGrant reseal = fx.invalid_grant_for(0);
  reseal.recipient = *fx.adjudicator;
  CHECK(fx.session->provider_reseal(fx.provider, "provider", fx.users[0], reseal).admitted());

  const Coin winner_before = fx.ledger.balance(fx.users[0]);
  fx.ledger.advance_time(5);
  CHECK(fx.session->adjudicate(*fx.adjudicator, "adjudicator", fx.users[0]).admitted());
  // Wrong goods: charge 4 back plus compensation base_price * size = 2*4 = 8.
  CHECK(fx.ledger.balance(fx.users[0]) == winner_before + 4 + 8);
  CHECK(fx.session->trades().at(fx.users[0]).compensated);

  // Settlement: only u2's (zero) charge completes; deposit returns minus the
  // 8 paid out.
  fx.session->accept_goods(fx.users[2], "u2");
  fx.ledger.advance_time(15);
  const Coin provider_before = fx.ledger.balance(fx.provider);
  CHECK(fx.session->finalize_trade().admitted());
  CHECK(fx.ledger.balance(fx.provider) == provider_before + 2);  // 10 - 8
}

TEST_CASE("valid goods survive a false dispute") {
  TradeFixture fx;
  fx.ledger.advance_time(3);
  fx.deliver(0);
  fx.deliver(2);
  fx.ledger.advance_time(4);
  fx.session->raise_dispute(fx.users[0], "u0");
  SealedGrant reseal = fx.valid_grant(0, fx.bids[0]);
  reseal.recipient = *fx.adjudicator;
  fx.session->provider_reseal(fx.provider, "provider", fx.users[0], reseal);
  fx.ledger.advance_time(5);
  CHECK(fx.session->adjudicate(*fx.adjudicator, "adjudicator", fx.users[0]).admitted());
  // Valid verdict: the winner ends up using the goods and still pays.
  CHECK(fx.session->state_of(fx.users[0])->kind == StateKind::Using);
  // The forwarded grant is sealed for the winner now.
  const auto forwarded = open_grant(fx.session->trades().at(fx.users[0]).grant, fx.users[0]);
  REQUIRE(forwarded.has_value());
  CHECK(forwarded->bundle == fx.bids[0].bundle);

  fx.session->accept_goods(fx.users[2], "u2");
  fx.ledger.advance_time(15);
  const Coin provider_before = fx.ledger.balance(fx.provider);
  CHECK(fx.session->finalize_trade().admitted());
  CHECK(fx.ledger.balance(fx.provider) == provider_before + 4 + 10);
}

TEST_CASE("silent provider loses by default judgment after the deadline") {
  TradeFixture fx;
  fx.ledger.advance_time(3);
  fx.session->provider_deliver(fx.provider, "provider", fx.users[0], fx.invalid_grant_for(0));
  fx.deliver(2);
  fx.ledger.advance_time(4);
  fx.session->raise_dispute(fx.users[0], "u0");
  // No reseal ever arrives; past the dispute deadline the adjudicator rules
  // against the provider.
  fx.ledger.advance_time(15);
  const Coin winner_before = fx.ledger.balance(fx.users[0]);
  CHECK(fx.session->adjudicate(*fx.adjudicator, "adjudicator", fx.users[0]).admitted());
  CHECK(fx.ledger.balance(fx.users[0]) == winner_before + 4 + 8);
}

TEST_CASE("undelivered winners are compensated at the delivery deadline") {
  TradeFixture fx;
  // Provider never delivers; a poke past deliver_by settles the defaults:
  // every winner gets its charge back plus base_price * size.
  fx.ledger.advance_time(10);
  CHECK(fx.session->deadline_advance_due());
  CHECK(fx.session->poke(fx.users[0], "u0").admitted());
  CHECK(fx.ledger.balance(fx.users[0]) == 1000 + 8);   // charge 4 back, net +8
  CHECK(fx.ledger.balance(fx.users[2]) == 1000 + 2);   // +2*1
  CHECK(fx.session->phase() == ContractPhase::Trading);

  // The deposit residue comes back only at settlement.
  fx.ledger.advance_time(15);
  const Coin provider_before = fx.ledger.balance(fx.provider);
  CHECK(fx.session->finalize_trade().admitted());
  CHECK(fx.ledger.balance(fx.provider) == provider_before);  // 10 - 8 - 2 = 0 left
  CHECK(fx.session->phase() == ContractPhase::Settled);
}

TEST_CASE("finalize refuses while a dispute is open") {
  TradeFixture fx;
  fx.ledger.advance_time(3);
  fx.session->provider_deliver(fx.provider, "provider", fx.users[0], fx.invalid_grant_for(0));
  fx.deliver(2);
  fx.ledger.advance_time(4);
  fx.session->raise_dispute(fx.users[0], "u0");
  fx.session->accept_goods(fx.users[2], "u2");
  fx.ledger.advance_time(15);
  CHECK(fx.session->finalize_trade().reject == Reject::Extra);
  fx.session->adjudicate(*fx.adjudicator, "adjudicator", fx.users[0]);
  CHECK(fx.session->finalize_trade().admitted());
}
