#include <catch_amalgamated.hpp>

#include "harness.hpp"
#include "trident/stream_chain.hpp"

using namespace trident;

namespace {

const PartyKeys& producer_keys() {
    static const PartyKeys k = PartyKeys::derive(3, "producer");
    return k;
}

std::vector<Alert> batch(std::uint64_t i, const std::string& tag = "") {
    return {Alert{i, "10.0.0.1", "10.0.0.2", "portscan", "medium" + tag, ""},
            Alert{i + 1, "10.0.0.3", "10.0.0.2", "ddos", "high" + tag, R"({"type":"indicator"})"}};
}

} // namespace

TEST_CASE("payload serialization separates fields") {
    const std::vector<Alert> a{Alert{1, "ab", "c", "", "", ""}};
    const std::vector<Alert> b{Alert{1, "a", "bc", "", "", ""}};
    CHECK(serialize_payload(a) != serialize_payload(b));
    CHECK(serialize_payload(a) == serialize_payload(a));
}

TEST_CASE("chain hashes follow H(prev || payload)") {
    std::vector<std::vector<Alert>> payloads{batch(0), batch(10), batch(20)};
    const auto chain = derive_chain(payloads);
    REQUIRE(chain.size() == 3);
    CHECK(chain[0] == sha256(serialize_payload(payloads[0])));
    Bytes joined(chain[0].begin(), chain[0].end());
    const auto p1 = serialize_payload(payloads[1]);
    joined.insert(joined.end(), p1.begin(), p1.end());
    CHECK(chain[1] == sha256(joined));
    CHECK(chain[2] == chain_step(chain[1], serialize_payload(payloads[2])));
}

TEST_CASE("an honest stream verifies batch by batch") {
    Producer prod(5, producer_keys().signing);
    Consumer cons(5, producer_keys().signing.verify);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto b = prod.produce(batch(i));
        CHECK(b.head.index == i);
        CHECK(b.head.stream_id == 5);
        REQUIRE(cons.verify(b) == VerifyStatus::Ok);
    }
    CHECK(cons.next_index() == 20);
    REQUIRE(cons.held(19));
    CHECK_FALSE(cons.held(20));
}

TEST_CASE("consumer rejects tampering, gaps and foreign streams") {
    Producer prod(5, producer_keys().signing);
    const auto b0 = prod.produce(batch(0));
    const auto b1 = prod.produce(batch(1));

    SECTION("payload altered after signing") {
        Consumer c(5, producer_keys().signing.verify);
        auto bad = b0;
        bad.payload[0].assessment = "low";
        CHECK(c.verify(bad) == VerifyStatus::ChainMismatch);
        CHECK(c.next_index() == 0);
        CHECK(c.verify(b0) == VerifyStatus::Ok);
    }
    SECTION("signature flipped") {
        Consumer c(5, producer_keys().signing.verify);
        auto bad = b0;
        bad.head.signature[0] ^= 1;
        CHECK(c.verify(bad) == VerifyStatus::BadSignature);
    }
    SECTION("skipped batch") {
        Consumer c(5, producer_keys().signing.verify);
        CHECK(c.verify(b1) == VerifyStatus::ChainMismatch);
    }
    SECTION("replayed batch") {
        Consumer c(5, producer_keys().signing.verify);
        REQUIRE(c.verify(b0) == VerifyStatus::Ok);
        CHECK(c.verify(b0) == VerifyStatus::ChainMismatch);
    }
    SECTION("another stream's batch") {
        Consumer c(6, producer_keys().signing.verify);
        CHECK(c.verify(b0) != VerifyStatus::Ok);
    }
    SECTION("wrong producer key") {
        Consumer c(5, PartyKeys::derive(3, "other").signing.verify);
        CHECK(c.verify(b0) == VerifyStatus::BadSignature);
    }
}

TEST_CASE("closed producers refuse to sign") {
    Producer prod(1, producer_keys().signing);
    prod.close();
    CHECK_THROWS_AS(prod.produce(batch(0)), StreamError);
}

TEST_CASE("a fork yields a proof at and after the fork only") {
    Producer a(9, producer_keys().signing);
    for (int i = 0; i < 3; ++i) a.produce(batch(i));
    Producer b = a;
    Consumer ca(9, producer_keys().signing.verify), cb(9, producer_keys().signing.verify);
    Producer replay(9, producer_keys().signing);
    for (int i = 0; i < 3; ++i) {
        const auto x = replay.produce(batch(i));
        REQUIRE(ca.verify(x) == VerifyStatus::Ok);
        REQUIRE(cb.verify(x) == VerifyStatus::Ok);
    }
    for (int i = 3; i < 6; ++i) {
        REQUIRE(ca.verify(a.produce(batch(i))) == VerifyStatus::Ok);
        REQUIRE(cb.verify(b.produce(batch(i, "!"))) == VerifyStatus::Ok);
    }
    for (std::uint64_t i = 0; i < 6; ++i) {
        const auto ch = make_challenge(ca, "buyer-a", i);
        const auto proof = respond_to_challenge(ch, cb);
        if (i < 3) {
            CHECK_FALSE(proof);
        } else {
            REQUIRE(proof);
            CHECK(valid_proof(*proof, producer_keys().signing.verify));
            CHECK(proof_matches(ch, *proof));
            CHECK_FALSE(valid_proof(*proof, PartyKeys::derive(3, "x").signing.verify));
        }
    }
    CHECK_THROWS_AS(make_challenge(ca, "buyer-a", 6), StreamError);
}

TEST_CASE("forged claims earn no proof") {
    Producer a(9, producer_keys().signing);
    Consumer c(9, producer_keys().signing.verify);
    REQUIRE(c.verify(a.produce(batch(0))) == VerifyStatus::Ok);
    Challenge ch = make_challenge(c, "x", 0);
    ch.claim.chain_hash[0] ^= 1; // signature no longer matches
    Consumer other(9, producer_keys().signing.verify);
    Producer b(9, producer_keys().signing);
    REQUIRE(other.verify(b.produce(batch(0, "?"))) == VerifyStatus::Ok);
    CHECK_FALSE(respond_to_challenge(ch, other));
}

TEST_CASE("proof validity rules") {
    Producer a(2, producer_keys().signing);
    Producer b = a;
    const auto x = a.produce(batch(0)).head;
    const auto y = b.produce(batch(0, "#")).head;
    const auto key = producer_keys().signing.verify;
    CHECK(valid_proof({x, y}, key));
    CHECK_FALSE(valid_proof({x, x}, key));  // same hash is no equivocation
    auto z = y;
    z.index = 1;
    CHECK_FALSE(valid_proof({x, z}, key));  // different index
    auto w = y;
    w.stream_id = 3;
    CHECK_FALSE(valid_proof({x, w}, key));  // different stream
}

TEST_CASE("randomized fork harness, small") {
    const auto f = harness::fork_scenarios(1, 40, true);
    CHECK(f.proofs_found == f.expected_proofs);
    CHECK(f.spurious_proofs == 0);
    CHECK(f.payout_failures == 0);
    const auto h = harness::fork_scenarios(2, 40, false);
    CHECK(h.spurious_proofs == 0);
    CHECK(h.early_reclaim_accepted == 0);
    CHECK(h.reclaim_failures == 0);
    INFO(f.first_failure << h.first_failure);
}
