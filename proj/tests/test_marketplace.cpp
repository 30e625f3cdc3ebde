#include <catch_amalgamated.hpp>

#include "harness.hpp"
#include "trident/marketplace.hpp"

using namespace trident;
using Catch::Approx;

namespace {

const std::string kSys(kSystemCaller);

AdvertTags example_tags() { return {10.0, 1_tok, "IDS", "industrial", {"DDoS", "botnet"}}; }

struct Fixture {
    Market m;

    Outcome as(const std::string& who, Operation op) { return m.apply({who, std::move(op)}); }

    void join(const std::string& who, Tokens wallet, Tokens burn = 1_tok) {
        REQUIRE(accepted(as(kSys, cmd::Mint{who, wallet + burn})));
        const auto k = PartyKeys::derive(1, who);
        REQUIRE(accepted(as(who, cmd::Register{burn, k.signing.verify, k.encryption.pub})));
    }
    ObjectId id(const Outcome& o) {
        REQUIRE(accepted(o));
        return std::get<Event>(o).object;
    }
    ObjectId advert(const std::string& who) { return id(as(who, cmd::Advertise{example_tags()})); }
    ObjectId offer(const std::string& who, ObjectId ad, Tokens fee = 5_tok, Tokens dep = 1_tok) {
        return id(as(who, cmd::MkOffer{ad, fee, dep}));
    }
    ObjectId subscribe(const std::string& pub, ObjectId off) {
        return id(as(pub, cmd::AccOffer{off, Bytes{1, 2, 3}}));
    }
    Tokens bal(const std::string& who) const { return m.state().balance(who); }
    Tokens escrow() const { return m.state().escrow; }
};

RejectCode code(const Outcome& o) {
    REQUIRE_FALSE(accepted(o));
    return std::get<Rejection>(o).code;
}

} // namespace

TEST_CASE("register burns the payment and sets the prior") {
    Fixture f;
    f.join("alice", 10_tok);
    CHECK(f.bal("alice") == 10_tok);
    CHECK(f.m.state().burned == 1_tok);
    CHECK(f.m.trust_of("alice", {}).f == 0.5);
    CHECK(f.m.trust_of("alice", {}).E == 0.5);

    f.join("bob", 0_tok, 20_tok);
    CHECK(f.m.trust_of("bob", {}).f == Approx(0.8145).margin(1e-4));

    const auto k = PartyKeys::derive(1, "alice");
    CHECK(code(f.as("alice", cmd::Register{1_tok, k.signing.verify, k.encryption.pub})) ==
          RejectCode::AlreadyRegistered);
    f.as(kSys, cmd::Mint{"carol", 5_tok});
    CHECK(code(f.as("carol", cmd::Register{0_tok, k.signing.verify, k.encryption.pub})) ==
          RejectCode::InvalidArgument);
    CHECK(code(f.as("carol", cmd::Register{6_tok, k.signing.verify, k.encryption.pub})) ==
          RejectCode::InsufficientBalance);
    CHECK(code(f.as("carol", cmd::Register{1_tok, {}, k.encryption.pub})) == RejectCode::InvalidArgument);
    CHECK(f.m.state().conserved());
}

TEST_CASE("only the system mints and ticks") {
    Fixture f;
    f.join("alice", 10_tok);
    CHECK(code(f.as("alice", cmd::Mint{"alice", 5_tok})) == RejectCode::Unauthorized);
    CHECK(code(f.as("alice", cmd::Tick{3})) == RejectCode::Unauthorized);
    CHECK(code(f.as(kSys, cmd::Mint{"@escrow", 5_tok})) == RejectCode::InvalidArgument);
    const auto clock = f.m.state().clock;
    REQUIRE(accepted(f.as(kSys, cmd::Tick{3})));
    CHECK(f.m.state().clock == clock + 3);
    CHECK(code(f.as(kSys, cmd::Tick{0})) == RejectCode::InvalidArgument);
}

TEST_CASE("advertise") {
    Fixture f;
    f.join("bob", 10_tok);
    const auto a1 = f.advert("bob");
    const auto a2 = f.advert("bob");
    CHECK(a1 != a2);
    CHECK(f.m.state().adverts.at(a1).tags == example_tags());
    CHECK(code(f.as("mallory", cmd::Advertise{example_tags()})) == RejectCode::Unregistered);
    auto bad = example_tags();
    bad.throughput_per_hour = 0;
    CHECK(code(f.as("bob", cmd::Advertise{bad})) == RejectCode::InvalidArgument);
    bad = example_tags();
    bad.network_type.clear();
    CHECK(code(f.as("bob", cmd::Advertise{bad})) == RejectCode::InvalidArgument);
}

TEST_CASE("offers move fee and deposit into escrow") {
    Fixture f;
    f.join("bob", 0_tok);
    f.join("alice", 10_tok);
    const auto ad = f.advert("bob");
    f.offer("alice", ad);
    CHECK(f.bal("alice") == 4_tok);
    CHECK(f.escrow() == 6_tok);
    CHECK(code(f.as("alice", cmd::MkOffer{ad, 5_tok, 1_tok})) == RejectCode::InsufficientBalance);
    CHECK(code(f.as("alice", cmd::MkOffer{ad, 1_tok, 0_tok})) == RejectCode::InvalidArgument);
    CHECK(code(f.as("alice", cmd::MkOffer{ad + 100, 1_tok, 1_tok})) == RejectCode::UnknownAdvert);
    CHECK(f.bal("alice") == 4_tok);
}

TEST_CASE("deleting offers refunds the maker") {
    Fixture f;
    f.join("bob", 0_tok);
    f.join("alice", 10_tok);
    f.join("carol", 0_tok);
    const auto ad = f.advert("bob");
    const auto o1 = f.offer("alice", ad);
    CHECK(code(f.as("carol", cmd::DelOffer{o1})) == RejectCode::Unauthorized);
    REQUIRE(accepted(f.as("alice", cmd::DelOffer{o1})));
    CHECK(f.bal("alice") == 10_tok);
    const auto o2 = f.offer("alice", ad);
    REQUIRE(accepted(f.as("bob", cmd::DelOffer{o2})));
    CHECK(f.bal("alice") == 10_tok);
    CHECK(f.bal("bob") == 0_tok);
    CHECK(f.escrow() == 0_tok);
    CHECK(f.m.state().offer_deposits.at(o1) == DepositFate::MakerRefund);
    CHECK(code(f.as("alice", cmd::DelOffer{o2})) == RejectCode::UnknownOffer);
}

TEST_CASE("accepting an offer pays the fee and keeps the deposit") {
    Fixture f;
    f.join("bob", 0_tok);
    f.join("alice", 10_tok);
    const auto ad = f.advert("bob");
    const auto off = f.offer("alice", ad);
    CHECK(code(f.as("alice", cmd::AccOffer{off, Bytes{1}})) == RejectCode::Unauthorized);
    const auto sub = f.subscribe("bob", off);
    CHECK(f.bal("bob") == 5_tok);
    CHECK(f.escrow() == 1_tok);
    const auto& s = f.m.state().subscriptions.at(sub);
    CHECK(s.subscriber == "alice");
    CHECK_FALSE(s.rated);
    CHECK(s.sealed_endpoint == Bytes{1, 2, 3});
    CHECK(code(f.as("bob", cmd::AccOffer{off, Bytes{1}})) == RejectCode::UnknownOffer);
    CHECK(f.m.state().escrow_consistent());
}

TEST_CASE("self-dealing is allowed but flagged") {
    Fixture f;
    f.join("bob", 10_tok);
    const auto ad = f.advert("bob");
    const auto off = f.offer("bob", ad);
    const auto out = f.as("bob", cmd::AccOffer{off, Bytes{1}});
    REQUIRE(accepted(out));
    CHECK(std::get<Event>(out).has_flag("self-dealing"));
}

TEST_CASE("removing an advert refunds live offers") {
    Fixture f;
    f.join("bob", 0_tok);
    f.join("alice", 10_tok);
    f.join("carol", 10_tok);
    f.join("dave", 0_tok);
    const auto ad = f.advert("bob");
    f.offer("alice", ad);
    f.offer("carol", ad);
    CHECK(f.escrow() == 12_tok);
    CHECK(code(f.as("dave", cmd::RmAdvert{ad})) == RejectCode::Unauthorized);
    REQUIRE(accepted(f.as("bob", cmd::RmAdvert{ad})));
    CHECK(f.escrow() == 0_tok);
    CHECK(f.bal("alice") == 10_tok);
    CHECK(f.bal("carol") == 10_tok);
    CHECK(f.m.state().adverts.empty());
    CHECK(f.m.state().offers.empty());

    const auto empty = f.advert("bob");
    const auto before = f.escrow();
    REQUIRE(accepted(f.as("bob", cmd::RmAdvert{empty})));
    CHECK(f.escrow() == before);
}

TEST_CASE("ratings refund once, finalize once") {
    Fixture f;
    f.join("bob", 0_tok);
    f.join("alice", 10_tok);
    const auto ad = f.advert("bob");
    const auto sub = f.subscribe("bob", f.offer("alice", ad));
    CHECK(code(f.as("bob", cmd::Rate{sub, 0.9})) == RejectCode::Unauthorized);
    CHECK(code(f.as("alice", cmd::Rate{sub, 1.5})) == RejectCode::InvalidArgument);

    auto out = f.as("alice", cmd::Rate{sub, 0.9});
    REQUIRE(accepted(out));
    CHECK(std::get<Event>(out).has_flag("positive"));
    CHECK(f.bal("alice") == 5_tok);
    CHECK(f.m.state().ratings.at("bob") == Evidence{1, 0});
    CHECK(f.m.state().offer_deposits.at(f.m.state().subscriptions.at(sub).offer) == DepositFate::SubscriberRefund);

    out = f.as("alice", cmd::Rate{sub, 0.2});
    REQUIRE(accepted(out));
    CHECK(f.bal("alice") == 5_tok);
    CHECK(f.m.state().ratings.at("bob") == Evidence{0, 1});

    CHECK(code(f.as("alice", cmd::Rate{sub, 0.7})) == RejectCode::RatingLimit);
    CHECK(f.m.state().ratings.at("bob") == Evidence{0, 1});
}

TEST_CASE("rating window expires") {
    MarketConfig cfg;
    cfg.rate_deadline = 5;
    Fixture f{Market(cfg)};
    f.join("bob", 0_tok);
    f.join("alice", 10_tok);
    const auto sub = f.subscribe("bob", f.offer("alice", f.advert("bob")));
    REQUIRE(accepted(f.as(kSys, cmd::Tick{4})));
    // now = created + 5: still inside the window.
    REQUIRE(accepted(f.as("alice", cmd::Rate{sub, 1.0})));
    REQUIRE(accepted(f.as(kSys, cmd::Tick{10})));
    CHECK(code(f.as("alice", cmd::Rate{sub, 1.0})) == RejectCode::Expired);
}

TEST_CASE("unsubscribing") {
    Fixture f;
    f.join("bob", 0_tok);
    f.join("alice", 20_tok);
    f.join("carol", 0_tok);
    const auto ad = f.advert("bob");
    const auto rated = f.subscribe("bob", f.offer("alice", ad));
    const auto unrated = f.subscribe("bob", f.offer("alice", ad));
    REQUIRE(accepted(f.as("alice", cmd::Rate{rated, 1.0})));

    CHECK(code(f.as("carol", cmd::Unsubscribe{rated})) == RejectCode::Unauthorized);
    const auto bal = f.bal("alice");
    auto out = f.as("alice", cmd::Unsubscribe{rated});
    REQUIRE(accepted(out));
    CHECK(std::get<Event>(out).transfers.empty());
    CHECK(f.bal("alice") == bal);

    out = f.as("bob", cmd::Unsubscribe{unrated});
    REQUIRE(accepted(out));
    CHECK(std::get<Event>(out).has_flag("deposit-forfeit"));
    CHECK(f.m.state().sink == 1_tok);
    CHECK(f.escrow() == 0_tok);
    CHECK(f.m.state().conserved());
}

TEST_CASE("trust through the market") {
    Fixture f;
    f.join("bob", 0_tok);
    TrustConfig cfg;
    for (int i = 0; i < 4; ++i) {
        const std::string who = "buyer" + std::to_string(i);
        f.join(who, 10_tok);
        const auto sub = f.subscribe("bob", f.offer(who, f.advert("bob")));
        REQUIRE(accepted(f.as(who, cmd::Rate{sub, i < 3 ? 0.8 : 0.1})));
    }
    const auto s = f.m.trust_of("bob", cfg);
    const double ce = 14.0 * 4 / (2.0 * 10 + 14.0 * 4);
    CHECK(s.E == Approx(ce * 0.75 + (1 - ce) * 0.5));
    CHECK_THROWS_AS(f.m.trust_of("nobody", cfg), std::out_of_range);
}

TEST_CASE("stream deposits: post, adjudicate, reclaim") {
    MarketConfig cfg;
    cfg.reclaim_delay = 10;
    Fixture f{Market(cfg)};
    f.join("seller", 20_tok);
    f.join("alice", 0_tok);
    f.join("carol", 0_tok);
    const auto ad = f.advert("seller");
    CHECK(code(f.as("alice", cmd::PostDeposit{ad, 1_tok})) == RejectCode::Unauthorized);
    CHECK(code(f.as("seller", cmd::PostDeposit{ad, 100_tok})) == RejectCode::InsufficientBalance);
    const auto dep = f.id(f.as("seller", cmd::PostDeposit{ad, 9_tok}));
    CHECK(f.escrow() == 9_tok);

    const auto keys = PartyKeys::derive(1, "seller");
    Producer a(dep, keys.signing);
    Producer b = a;
    const auto x = a.produce({Alert{1, "a", "b", "c", "d", ""}}).head;
    const auto y = b.produce({Alert{1, "a", "b", "c", "e", ""}}).head;

    // A proof by someone else's key, and a challenge unrelated to the proof.
    Producer imp(dep, PartyKeys::derive(1, "carol").signing);
    Producer imp2 = imp;
    const auto ix = imp.produce({Alert{}}).head;
    const auto iy = imp2.produce({Alert{1}}).head;
    CHECK(code(f.as("carol", cmd::Adjudicate{dep, {"alice", ix}, {ix, iy}})) == RejectCode::InvalidProof);
    CHECK_FALSE(accepted(f.as("carol", cmd::Adjudicate{dep, {"alice", ix}, {x, y}})));
    CHECK(code(f.as("carol", cmd::Adjudicate{dep, {"nobody", x}, {x, y}})) == RejectCode::InvalidArgument);

    CHECK(code(f.as("seller", cmd::Reclaim{dep})) == RejectCode::TooEarly);
    const auto out = f.as("carol", cmd::Adjudicate{dep, {"alice", x}, {x, y}});
    REQUIRE(accepted(out));
    CHECK(f.bal("alice") == Tokens::from_milli(6000));
    CHECK(f.bal("carol") == Tokens::from_milli(3000));
    CHECK(f.escrow() == 0_tok);
    CHECK(code(f.as("carol", cmd::Adjudicate{dep, {"alice", x}, {x, y}})) == RejectCode::DepositClosed);
    CHECK(code(f.as("seller", cmd::Reclaim{dep})) == RejectCode::DepositClosed);
    CHECK(f.m.state().conserved());
}

TEST_CASE("reclaim after takedown and delay") {
    MarketConfig cfg;
    cfg.reclaim_delay = 10;
    Fixture f{Market(cfg)};
    f.join("seller", 20_tok);
    f.join("alice", 0_tok);
    const auto ad = f.advert("seller");
    const auto dep = f.id(f.as("seller", cmd::PostDeposit{ad, Tokens::parse("7.001")}));
    REQUIRE(accepted(f.as("seller", cmd::RmAdvert{ad})));
    const auto takedown = *f.m.state().stream_deposits.at(dep).takedown_at;
    CHECK(code(f.as("alice", cmd::Reclaim{dep})) == RejectCode::Unauthorized);
    while (f.m.state().clock + 1 < takedown + 10) {
        CHECK(code(f.as("seller", cmd::Reclaim{dep})) == RejectCode::TooEarly);
        REQUIRE(accepted(f.as(kSys, cmd::Tick{1})));
    }
    const auto bal = f.bal("seller");
    REQUIRE(accepted(f.as("seller", cmd::Reclaim{dep})));
    CHECK(f.bal("seller") - bal == Tokens::parse("7.001"));
    CHECK(f.m.state().stream_deposits.at(dep).status == DepositStatus::Reclaimed);
}

TEST_CASE("the 2:1 split rounds toward the prover") {
    for (std::int64_t milli : {1, 2, 3, 1000, 9001}) {
        MarketConfig cfg;
        Fixture f{Market(cfg)};
        f.join("seller", 20_tok);
        f.join("alice", 0_tok);
        f.join("carol", 0_tok);
        const auto ad = f.advert("seller");
        const auto dep = f.id(f.as("seller", cmd::PostDeposit{ad, Tokens::from_milli(milli)}));
        const auto keys = PartyKeys::derive(1, "seller");
        Producer a(dep, keys.signing);
        Producer b = a;
        const auto x = a.produce({Alert{1}}).head;
        const auto y = b.produce({Alert{2}}).head;
        REQUIRE(accepted(f.as("carol", cmd::Adjudicate{dep, {"alice", y}, {x, y}})));
        CHECK(f.bal("alice").milli() == milli * 2 / 3);
        CHECK(f.bal("carol").milli() == milli - milli * 2 / 3);
    }
}

TEST_CASE("rejections leave state and log untouched; replay reproduces state") {
    Fixture f;
    f.join("bob", 0_tok);
    f.join("alice", 10_tok);
    const auto ad = f.advert("bob");
    const auto log_size = f.m.log().size();
    const auto before = f.m.state();
    CHECK_FALSE(accepted(f.as("carol", cmd::RmAdvert{ad})));
    CHECK(f.m.state() == before);
    CHECK(f.m.log().size() == log_size);
    f.subscribe("bob", f.offer("alice", ad));

    const Market replayed = Market::replay(f.m.state().config, f.m.log());
    CHECK(replayed.state() == f.m.state());
    CHECK(Market::replay({}, {}).state() == Market().state());

    auto log = f.m.log();
    log[3].event.kind = "tampered";
    CHECK_THROWS_AS(Market::replay(f.m.state().config, log), ReplayError);
}

TEST_CASE("fuzzed sequences keep every invariant") {
    const auto r = harness::fuzz_market(99, 2000, 30, 50);
    INFO(r.first_failure);
    CHECK(r.ok());
    CHECK(r.accepted > r.commands / 10);
}
