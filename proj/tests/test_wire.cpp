#include <catch_amalgamated.hpp>

#include <thread>

#include "trident/wire.hpp"

using namespace trident;

TEST_CASE("frames carry a big-endian length and a JSON body") {
    const Json msg = make_message(MsgKind::Hello, {{"subscription", 7}, {"subscriber", "alice"}});
    const Bytes frame = encode_frame(msg);
    const std::uint32_t len = (frame[0] << 24) | (frame[1] << 16) | (frame[2] << 8) | frame[3];
    CHECK(len == frame.size() - 4);
    const Json back = decode_frame(frame);
    CHECK(back == msg);
    CHECK(message_kind(back) == MsgKind::Hello);
    CHECK(back.at("kind") == "HELLO");
}

TEST_CASE("message kinds round-trip through their names") {
    for (auto k : {MsgKind::Hello, MsgKind::Nonce, MsgKind::NonceSig, MsgKind::Accept, MsgKind::Reject,
                   MsgKind::Batch, MsgKind::Challenge, MsgKind::Proof}) {
        CHECK(parse_msg_kind(to_string(k)) == k);
    }
    CHECK_FALSE(parse_msg_kind("GOODBYE"));
    CHECK_THROWS_AS(message_kind(Json{{"kind", "GOODBYE"}}), WireError);
    CHECK_THROWS_AS(message_kind(Json::object()), WireError);
}

TEST_CASE("malformed frames are rejected") {
    CHECK_THROWS_AS(decode_frame(Bytes{0, 0}), WireError);
    CHECK_THROWS_AS(decode_frame(Bytes{0, 0, 0, 5, '{'}), WireError);
    const Bytes junk{0, 0, 0, 3, 'a', 'b', 'c'};
    CHECK_THROWS_AS(decode_frame(junk), WireError);
    const Bytes huge{0xff, 0xff, 0xff, 0xff};
    CHECK_THROWS_AS(decode_frame(huge), WireError);
}

TEST_CASE("loopback send and receive") {
    Listener listener;
    REQUIRE(listener.port() != 0);
    std::thread server([&] {
        auto conn = listener.accept();
        REQUIRE(conn);
        const Json m = conn->receive();
        conn->send(make_message(MsgKind::Accept, {{"echo", m.at("n")}}));
    });
    Connection c = Connection::connect("127.0.0.1", listener.port());
    c.send(make_message(MsgKind::Hello, {{"n", 41}}));
    const Json reply = c.receive();
    server.join();
    CHECK(message_kind(reply) == MsgKind::Accept);
    CHECK(reply.at("echo") == 41);
    // Peer closed: the next read fails.
    CHECK_THROWS_AS(c.receive(), WireError);
}

TEST_CASE("receive times out") {
    Listener listener;
    std::thread server([&] {
        auto conn = listener.accept();
        std::this_thread::sleep_for(std::chrono::milliseconds(400));
    });
    Connection c = Connection::connect("127.0.0.1", listener.port());
    c.set_timeout(std::chrono::milliseconds(100));
    CHECK_THROWS_AS(c.receive(), WireError);
    server.join();
}

TEST_CASE("connecting to a closed port fails") {
    std::uint16_t port = 0;
    {
        Listener l;
        port = l.port();
    }
    CHECK_THROWS_AS(Connection::connect("127.0.0.1", port, std::chrono::milliseconds(500)), WireError);
}

TEST_CASE("shutdown unblocks accept") {
    Listener l;
    std::thread t([&] { CHECK_FALSE(l.accept()); });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    l.shutdown();
    t.join();
}
