#include "trident/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

namespace trident {

namespace {

constexpr std::array<const char*, 8> kKindNames = {"HELLO",  "NONCE", "NONCE_SIG", "ACCEPT",
                                                   "REJECT", "BATCH", "CHALLENGE", "PROOF"};

std::string sys_error(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw WireError("not an IPv4 address: " + host);
    }
    return addr;
}

} // namespace

const char* to_string(MsgKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<MsgKind> parse_msg_kind(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (s == kKindNames[i]) return static_cast<MsgKind>(i);
    }
    return std::nullopt;
}

Json make_message(MsgKind kind, Json fields) {
    Json msg{{"kind", to_string(kind)}};
    for (auto& [k, v] : fields.items()) msg[k] = std::move(v);
    return msg;
}

MsgKind message_kind(const Json& msg) {
    if (!msg.is_object() || !msg.contains("kind") || !msg["kind"].is_string()) {
        throw WireError("message without a kind");
    }
    auto k = parse_msg_kind(msg["kind"].get<std::string>());
    if (!k) throw WireError("unknown message kind " + msg["kind"].get<std::string>());
    return *k;
}

Bytes encode_frame(const Json& msg) {
    const std::string body = msg.dump();
    if (body.size() > kMaxFrame) throw WireError("frame exceeds size limit");
    CanonicalWriter w;
    w.bytes(as_bytes(body));
    return w.take();
}

Json decode_frame(ByteView frame) {
    if (frame.size() < 4) throw WireError("truncated frame header");
    const std::uint32_t len = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                              (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
    if (len > kMaxFrame) throw WireError("frame exceeds size limit");
    if (frame.size() != 4 + std::size_t{len}) throw WireError("frame length mismatch");
    try {
        return Json::parse(frame.begin() + 4, frame.end());
    } catch (const Json::parse_error& e) {
        throw WireError(std::string("malformed frame body: ") + e.what());
    }
}

Connection::Connection(int fd) : fd_(fd) {}

Connection::Connection(Connection&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }

Connection& Connection::operator=(Connection&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

Connection::~Connection() { close(); }

Connection Connection::connect(const std::string& host, std::uint16_t port,
                               std::chrono::milliseconds timeout) {
    const sockaddr_in addr = make_addr(host, port);
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw WireError(sys_error("socket"));
    Connection conn(fd);
    conn.set_timeout(timeout);
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        throw WireError(sys_error("connect"));
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return conn;
}

void Connection::set_timeout(std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void Connection::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

void Connection::write_all(const std::uint8_t* data, std::size_t n) {
    while (n > 0) {
        const ssize_t k = ::send(fd_, data, n, MSG_NOSIGNAL);
        if (k < 0) {
            if (errno == EINTR) continue;
            throw WireError(sys_error("send"));
        }
        data += k;
        n -= static_cast<std::size_t>(k);
    }
}

void Connection::read_exact(std::uint8_t* data, std::size_t n) {
    while (n > 0) {
        const ssize_t k = ::recv(fd_, data, n, 0);
        if (k == 0) throw WireError("connection closed by peer");
        if (k < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) throw WireError("receive timed out");
            throw WireError(sys_error("recv"));
        }
        data += k;
        n -= static_cast<std::size_t>(k);
    }
}

void Connection::send(const Json& msg) {
    if (fd_ < 0) throw WireError("send on closed connection");
    const Bytes frame = encode_frame(msg);
    write_all(frame.data(), frame.size());
}

Json Connection::receive() {
    if (fd_ < 0) throw WireError("receive on closed connection");
    Bytes frame(4);
    read_exact(frame.data(), 4);
    const std::uint32_t len = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                              (std::uint32_t{frame[2]} << 8) | std::uint32_t{frame[3]};
    if (len > kMaxFrame) throw WireError("frame exceeds size limit");
    frame.resize(4 + std::size_t{len});
    read_exact(frame.data() + 4, len);
    return decode_frame(frame);
}

Listener::Listener(const std::string& host, std::uint16_t port) : host_(host) {
    const sockaddr_in addr = make_addr(host, port);
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) throw WireError(sys_error("socket"));
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(fd_, 64) != 0) {
        const std::string err = sys_error("bind/listen");
        ::close(fd_);
        throw WireError(err);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

Listener::Listener(Listener&& o) noexcept : fd_(o.fd_), host_(std::move(o.host_)), port_(o.port_) {
    o.fd_ = -1;
}

Listener::~Listener() {
    shutdown();
    if (fd_ >= 0) ::close(fd_);
}

std::optional<Connection> Listener::accept() {
    while (true) {
        const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd >= 0) {
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return Connection(fd);
        }
        if (errno == EINTR || errno == ECONNABORTED) continue;
        return std::nullopt;
    }
}

void Listener::shutdown() {
    // Unblocks a thread sitting in accept().
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

} // namespace trident
