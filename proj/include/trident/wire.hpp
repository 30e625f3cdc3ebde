#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "trident/codec.hpp"

namespace trident {

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class MsgKind { Hello, Nonce, NonceSig, Accept, Reject, Batch, Challenge, Proof };
const char* to_string(MsgKind k);
std::optional<MsgKind> parse_msg_kind(std::string_view s);

inline constexpr std::uint32_t kMaxFrame = 16u << 20;

// Frame = 4-byte big-endian body length, then the JSON body. The body
// always carries a "kind" field.
Json make_message(MsgKind kind, Json fields = Json::object());
MsgKind message_kind(const Json& msg); // throws WireError

Bytes encode_frame(const Json& msg);
// Decodes one complete frame; throws WireError on bad length or JSON.
Json decode_frame(ByteView frame);

// A connected TCP stream. Move-only; closes on destruction.
class Connection {
public:
    Connection() = default;
    explicit Connection(int fd);
    Connection(Connection&& o) noexcept;
    Connection& operator=(Connection&& o) noexcept;
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;
    ~Connection();

    static Connection connect(const std::string& host, std::uint16_t port,
                              std::chrono::milliseconds timeout = std::chrono::seconds(10));

    void send(const Json& msg);
    Json receive();
    void set_timeout(std::chrono::milliseconds timeout);
    void close();
    bool open() const { return fd_ >= 0; }

private:
    void write_all(const std::uint8_t* data, std::size_t n);
    void read_exact(std::uint8_t* data, std::size_t n);

    int fd_ = -1;
};

class Listener {
public:
    // Port 0 picks an ephemeral port.
    explicit Listener(const std::string& host = "127.0.0.1", std::uint16_t port = 0);
    Listener(Listener&& o) noexcept;
    Listener& operator=(Listener&&) = delete;
    Listener(const Listener&) = delete;
    ~Listener();

    std::uint16_t port() const { return port_; }
    const std::string& host() const { return host_; }
    // Returns nullopt once the listener is shut down.
    std::optional<Connection> accept();
    void shutdown();

private:
    int fd_ = -1;
    std::string host_;
    std::uint16_t port_ = 0;
};

} // namespace trident
