#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trident {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;
using Digest = std::array<std::uint8_t, kDigestSize>;

class CryptoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Initializes libsodium once; safe to call from any thread.
void crypto_init();

Digest sha256(ByteView data);

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);
std::string to_base64(ByteView data);
Bytes from_base64(std::string_view text);

Bytes random_bytes(std::size_t n);

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Canonical serialization: integers big-endian, byte strings and text
// prefixed by a 4-byte big-endian length, fixed-size digests written raw.
class CanonicalWriter {
public:
    CanonicalWriter& u8(std::uint8_t v);
    CanonicalWriter& u32(std::uint32_t v);
    CanonicalWriter& u64(std::uint64_t v);
    CanonicalWriter& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
    CanonicalWriter& bytes(ByteView v);
    CanonicalWriter& text(std::string_view v) { return bytes(as_bytes(v)); }
    CanonicalWriter& raw(ByteView v);

    const Bytes& data() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

struct SigningKeyPair {
    Bytes secret;
    Bytes verify; // public verification key
};

// Abstract sign/verify so the protocol code does not depend on one scheme.
class SignatureScheme {
public:
    virtual ~SignatureScheme() = default;
    virtual std::string_view name() const = 0;
    virtual SigningKeyPair keypair_from_seed(ByteView seed32) const = 0;
    virtual Bytes sign(ByteView secret, ByteView message) const = 0;
    virtual bool verify(ByteView verify_key, ByteView message, ByteView signature) const = 0;
};

// Ed25519; deterministic, so traces that sign are reproducible.
class Ed25519Scheme final : public SignatureScheme {
public:
    std::string_view name() const override { return "ed25519"; }
    SigningKeyPair keypair_from_seed(ByteView seed32) const override;
    Bytes sign(ByteView secret, ByteView message) const override;
    bool verify(ByteView verify_key, ByteView message, ByteView signature) const override;
};

const SignatureScheme& default_scheme();

// ---------------------------------------------------------------------------
// Public-key encryption for sealing endpoints (X25519 sealed boxes)
// ---------------------------------------------------------------------------

struct EncryptionKeyPair {
    Bytes secret;
    Bytes pub;
};

EncryptionKeyPair encryption_keypair_from_seed(ByteView seed32);
Bytes seal(ByteView recipient_pub, ByteView plaintext);
std::optional<Bytes> unseal(const EncryptionKeyPair& recipient, ByteView ciphertext);

// Everything a party holds: signing pair plus encryption pair.
struct PartyKeys {
    SigningKeyPair signing;
    EncryptionKeyPair encryption;

    // Deterministic keys from a root seed and a party label.
    static PartyKeys derive(std::uint64_t root_seed, std::string_view label);
};

} // namespace trident
