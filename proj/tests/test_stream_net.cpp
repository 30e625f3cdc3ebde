#include <catch_amalgamated.hpp>

#include <sstream>

#include "harness.hpp"
#include "trident/stream_net.hpp"

using namespace trident;

TEST_CASE("endpoint parsing") {
    const auto ep = Endpoint::parse("127.0.0.1:9000");
    CHECK(ep.host == "127.0.0.1");
    CHECK(ep.port == 9000);
    CHECK(ep.to_string() == "127.0.0.1:9000");
    CHECK_THROWS_AS(Endpoint::parse("127.0.0.1"), StreamNetError);
    CHECK_THROWS_AS(Endpoint::parse(":80"), StreamNetError);
    CHECK_THROWS_AS(Endpoint::parse("host:99999"), StreamNetError);
    CHECK_THROWS_AS(Endpoint::parse("host:x1"), StreamNetError);
}

TEST_CASE("sealed endpoints open only for the buyer and only if the seller signed") {
    const auto seller = PartyKeys::derive(8, "seller");
    const auto buyer = PartyKeys::derive(8, "buyer");
    const auto other = PartyKeys::derive(8, "other");
    const Endpoint ep{"10.1.2.3", 4444};
    const Bytes sealed = seal_endpoint(ep, seller.signing, buyer.encryption.pub);

    const auto opened = open_endpoint(sealed, buyer.encryption, seller.signing.verify);
    REQUIRE(opened);
    CHECK(opened->to_string() == "10.1.2.3:4444");
    CHECK_FALSE(open_endpoint(sealed, other.encryption, seller.signing.verify));
    CHECK_FALSE(open_endpoint(sealed, buyer.encryption, other.signing.verify));
    Bytes bent = sealed;
    bent[bent.size() / 2] ^= 1;
    CHECK_FALSE(open_endpoint(bent, buyer.encryption, seller.signing.verify));
    // Signed by someone else, sealed to the right buyer.
    const Bytes forged = seal_endpoint(ep, other.signing, buyer.encryption.pub);
    CHECK_FALSE(open_endpoint(forged, buyer.encryption, seller.signing.verify));
}

TEST_CASE("nonce message binds the subscription") {
    const Bytes nonce(kNonceSize, 3);
    CHECK(nonce_message(1, nonce) != nonce_message(2, nonce));
    CHECK(nonce_message(1, nonce) == nonce_message(1, nonce));
    CHECK(nonce_message(1, nonce) != nonce_message(1, Bytes(kNonceSize, 4)));
}

TEST_CASE("session registry allows one live session per subscription") {
    SessionRegistry r;
    CHECK(r.claim(4));
    CHECK_FALSE(r.claim(4));
    CHECK(r.claim(5));
    CHECK(r.live() == 2);
    r.release(4);
    CHECK(r.claim(4));
    r.release(4);
    r.release(5);
    CHECK(r.live() == 0);
}

TEST_CASE("handshake accepts only the subscriber's fresh signature") {
    const auto cases = harness::handshake_matrix(12);
    REQUIRE(cases.size() == 4);
    for (const auto& c : cases) {
        INFO(to_string(c.fault) << ": " << c.reason);
        CHECK(c.accepted == c.expect_accept);
    }
    CHECK(cases[0].fault == BuyerFault::None);
    CHECK(cases[0].accepted);
}

TEST_CASE("unknown subscriptions are refused") {
    DemoConfig cfg;
    cfg.buyers = 1;
    cfg.batches = 1;
    Listener listener;
    const DemoWorld w = build_demo_world(cfg, {"127.0.0.1", listener.port()});
    auto snap = std::make_shared<const MarketState>(w.market.state());
    StreamServer server(std::move(listener), lookup_in(snap, w.seller),
                        [](const SellerHandshake&, Connection&) {});
    server.start();
    const PartyId& buyer = w.buyers.at(0);
    Connection c = Connection::connect("127.0.0.1", server.port());
    const auto hs = handshake_buyer(c, 999'999, buyer, w.keys.at(buyer).signing);
    CHECK_FALSE(hs.accepted);
    c.close();
    server.stop();
}

TEST_CASE("reclaim rule") {
    StreamDeposit d;
    CHECK_FALSE(reclaim_allowed(d, 1'000'000, 10));
    d.takedown_at = 50;
    CHECK_FALSE(reclaim_allowed(d, 59, 10));
    CHECK(reclaim_allowed(d, 60, 10));
    CHECK(reclaim_allowed(d, 61, 10));
    d.status = DepositStatus::Adjudicated;
    CHECK_FALSE(reclaim_allowed(d, 61, 10));
}

TEST_CASE("fault names parse") {
    for (auto f : {StreamFault::None, StreamFault::ForkAtK, StreamFault::BadSignature})
        CHECK(parse_stream_fault(to_string(f)) == f);
    CHECK_FALSE(parse_stream_fault("meltdown"));
}

TEST_CASE("loopback demo, honest seller") {
    DemoConfig cfg;
    cfg.batches = 12;
    cfg.batch_size = 3;
    cfg.seed = 21;
    std::ostringstream transcript;
    const auto r = run_stream_demo(cfg, transcript);
    REQUIRE(r.buyers.size() == 2);
    for (const auto& b : r.buyers) {
        CHECK(b.handshake_accepted);
        CHECK(b.verified == 12);
        CHECK_FALSE(b.failure);
    }
    CHECK(r.proofs == 0);
    CHECK_FALSE(r.payout);
    REQUIRE(r.reclaim);
    CHECK(r.conserved);
}

TEST_CASE("loopback demo, forked seller pays out") {
    DemoConfig cfg;
    cfg.batches = 12;
    cfg.batch_size = 2;
    cfg.fault = StreamFault::ForkAtK;
    cfg.fault_index = 5;
    std::ostringstream transcript;
    const auto r = run_stream_demo(cfg, transcript);
    for (const auto& b : r.buyers) CHECK(b.verified == 12); // each branch is self-consistent
    CHECK(r.proofs > 0);
    REQUIRE(r.payout);
    CHECK(r.reclaim_rejected_after_payout);
    CHECK_FALSE(r.reclaim);
    CHECK(r.conserved);
}

TEST_CASE("loopback demo, bad signature is caught at the index") {
    DemoConfig cfg;
    cfg.batches = 10;
    cfg.batch_size = 2;
    cfg.fault = StreamFault::BadSignature;
    cfg.fault_index = 4;
    std::ostringstream transcript;
    const auto r = run_stream_demo(cfg, transcript);
    bool caught = false;
    for (const auto& b : r.buyers) {
        if (b.failure) {
            CHECK(*b.failure == VerifyStatus::BadSignature);
            REQUIRE(b.failure_index);
            CHECK(*b.failure_index == 4);
            CHECK(b.verified == 4);
            caught = true;
        }
    }
    CHECK(caught);
    CHECK_FALSE(r.payout);
    CHECK(r.conserved);
}
