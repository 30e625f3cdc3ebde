#include "trident/crypto.hpp"

#include <sodium.h>

#include <mutex>


namespace trident {

void crypto_init() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw CryptoError("libsodium initialization failed");
    });
}

Digest sha256(ByteView data) {
    crypto_init();
    Digest out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

std::string to_hex(ByteView data) {
    std::string out(data.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
    out.pop_back();
    return out;
}

Bytes from_hex(std::string_view hex) {
    Bytes out(hex.size() / 2 + 1);
    std::size_t len = 0;
    const char* end = nullptr;
    if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &len, &end) != 0 ||
        end != hex.data() + hex.size()) {
        throw CryptoError("malformed hex string");
    }
    out.resize(len);
    return out;
}

std::string to_base64(ByteView data) {
    constexpr int variant = sodium_base64_VARIANT_ORIGINAL;
    std::string out(sodium_base64_ENCODED_LEN(data.size(), variant), '\0');
    sodium_bin2base64(out.data(), out.size(), data.data(), data.size(), variant);
    out.resize(out.size() - 1);
    return out;
}

Bytes from_base64(std::string_view text) {
    Bytes out(text.size() / 4 * 3 + 3);
    std::size_t len = 0;
    const char* end = nullptr;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                          sodium_base64_VARIANT_ORIGINAL) != 0 ||
        end != text.data() + text.size()) {
        throw CryptoError("malformed base64 field");
    }
    out.resize(len);
    return out;
}

Bytes random_bytes(std::size_t n) {
    crypto_init();
    Bytes out(n);
    randombytes_buf(out.data(), n);
    return out;
}

CanonicalWriter& CanonicalWriter::u8(std::uint8_t v) {
    out_.push_back(v);
    return *this;
}

CanonicalWriter& CanonicalWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

CanonicalWriter& CanonicalWriter::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

CanonicalWriter& CanonicalWriter::bytes(ByteView v) {
    if (v.size() > UINT32_MAX) throw CryptoError("field too long for canonical encoding");
    u32(static_cast<std::uint32_t>(v.size()));
    return raw(v);
}

CanonicalWriter& CanonicalWriter::raw(ByteView v) {
    out_.insert(out_.end(), v.begin(), v.end());
    return *this;
}

SigningKeyPair Ed25519Scheme::keypair_from_seed(ByteView seed32) const {
    crypto_init();
    if (seed32.size() != crypto_sign_SEEDBYTES) throw CryptoError("ed25519 seed must be 32 bytes");
    SigningKeyPair kp{Bytes(crypto_sign_SECRETKEYBYTES), Bytes(crypto_sign_PUBLICKEYBYTES)};
    crypto_sign_seed_keypair(kp.verify.data(), kp.secret.data(), seed32.data());
    return kp;
}

Bytes Ed25519Scheme::sign(ByteView secret, ByteView message) const {
    crypto_init();
    if (secret.size() != crypto_sign_SECRETKEYBYTES) throw CryptoError("bad ed25519 secret key");
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret.data());
    return sig;
}

bool Ed25519Scheme::verify(ByteView verify_key, ByteView message, ByteView signature) const {
    crypto_init();
    if (verify_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) {
        return false;
    }
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       verify_key.data()) == 0;
}

const SignatureScheme& default_scheme() {
    static const Ed25519Scheme scheme;
    return scheme;
}

EncryptionKeyPair encryption_keypair_from_seed(ByteView seed32) {
    crypto_init();
    if (seed32.size() != crypto_box_SEEDBYTES) throw CryptoError("box seed must be 32 bytes");
    EncryptionKeyPair kp{Bytes(crypto_box_SECRETKEYBYTES), Bytes(crypto_box_PUBLICKEYBYTES)};
    crypto_box_seed_keypair(kp.pub.data(), kp.secret.data(), seed32.data());
    return kp;
}

Bytes seal(ByteView recipient_pub, ByteView plaintext) {
    crypto_init();
    if (recipient_pub.size() != crypto_box_PUBLICKEYBYTES) throw CryptoError("bad encryption key");
    Bytes out(plaintext.size() + crypto_box_SEALBYTES);
    crypto_box_seal(out.data(), plaintext.data(), plaintext.size(), recipient_pub.data());
    return out;
}

std::optional<Bytes> unseal(const EncryptionKeyPair& recipient, ByteView ciphertext) {
    crypto_init();
    if (ciphertext.size() < crypto_box_SEALBYTES ||
        recipient.pub.size() != crypto_box_PUBLICKEYBYTES ||
        recipient.secret.size() != crypto_box_SECRETKEYBYTES) {
        return std::nullopt;
    }
    Bytes out(ciphertext.size() - crypto_box_SEALBYTES);
    if (crypto_box_seal_open(out.data(), ciphertext.data(), ciphertext.size(), recipient.pub.data(),
                             recipient.secret.data()) != 0) {
        return std::nullopt;
    }
    return out;
}

namespace {

Bytes seed_bytes(std::uint64_t root, std::string_view label, std::string_view purpose) {
    CanonicalWriter w;
    w.text("trident/key-seed/v1").u64(root).text(label).text(purpose);
    const Digest d = sha256(w.data());
    return Bytes(d.begin(), d.end());
}

} // namespace

PartyKeys PartyKeys::derive(std::uint64_t root_seed, std::string_view label) {
    PartyKeys keys;
    keys.signing = default_scheme().keypair_from_seed(seed_bytes(root_seed, label, "sign"));
    keys.encryption = encryption_keypair_from_seed(seed_bytes(root_seed, label, "encrypt"));
    return keys;
}

} // namespace trident
