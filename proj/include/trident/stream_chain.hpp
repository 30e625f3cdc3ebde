#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trident/crypto.hpp"

namespace trident {

class StreamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultBatchSize = 10;

// Generic alert record. `passthrough` carries an externally formatted
// payload (for example a STIX JSON object) and is never inspected.
struct Alert {
    std::uint64_t time = 0;
    std::string source;
    std::string target;
    std::string classification;
    std::string assessment;
    std::string passthrough;

    bool operator==(const Alert&) const = default;
};

Bytes serialize_payload(const std::vector<Alert>& alerts);

// H(prev || payload), with an absent prev for the first batch.
Digest chain_step(const std::optional<Digest>& prev, ByteView serialized_payload);

// Re-derives every chain hash from the payloads alone.
std::vector<Digest> derive_chain(const std::vector<std::vector<Alert>>& payloads);

// The bytes the producer signs for one batch head.
Bytes head_message(std::uint64_t stream_id, std::uint64_t index, const Digest& chain_hash);

// A producer-signed (index, chain_hash) pair.
struct SignedHead {
    std::uint64_t stream_id = 0;
    std::uint64_t index = 0;
    Digest chain_hash{};
    Bytes signature;

    bool verify(ByteView producer_key, const SignatureScheme& scheme = default_scheme()) const;
    bool operator==(const SignedHead&) const = default;
};

struct SignedBatch {
    SignedHead head;
    std::vector<Alert> payload;

    bool operator==(const SignedBatch&) const = default;
};

// Single-writer chain state. Copying a producer is how the tests fork it.
class Producer {
public:
    Producer(std::uint64_t stream_id, SigningKeyPair keys,
             const SignatureScheme& scheme = default_scheme());

    SignedBatch produce(std::vector<Alert> alerts);

    void close() { closed_ = true; }
    bool closed() const { return closed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t next_index() const { return next_index_; }
    const Bytes& verify_key() const { return keys_.verify; }

private:
    std::uint64_t stream_id_;
    SigningKeyPair keys_;
    const SignatureScheme* scheme_;
    std::optional<Digest> head_;
    std::uint64_t next_index_ = 0;
    bool closed_ = false;
};

enum class VerifyStatus { Ok, ChainMismatch, BadSignature };
const char* to_string(VerifyStatus s);

class Consumer {
public:
    Consumer(std::uint64_t stream_id, Bytes producer_key,
             const SignatureScheme& scheme = default_scheme());

    // Leaves the state untouched unless the result is Ok.
    VerifyStatus verify(const SignedBatch& batch);

    const SignedHead* held(std::uint64_t index) const;
    std::uint64_t next_index() const { return next_index_; }
    std::uint64_t stream_id() const { return stream_id_; }
    const Bytes& producer_key() const { return producer_key_; }
    const SignatureScheme& scheme() const { return *scheme_; }

private:
    std::uint64_t stream_id_;
    Bytes producer_key_;
    const SignatureScheme* scheme_;
    std::optional<Digest> head_;
    std::uint64_t next_index_ = 0;
    std::map<std::uint64_t, SignedHead> heads_;
};

struct Challenge {
    std::string challenger;
    SignedHead claim;

    bool operator==(const Challenge&) const = default;
};

struct EquivocationProof {
    SignedHead first;
    SignedHead second;

    bool operator==(const EquivocationProof&) const = default;
};

// Throws StreamError when the consumer has not verified `index`.
Challenge make_challenge(const Consumer& consumer, std::string challenger, std::uint64_t index);

// A proof exists iff the local head at the challenged index differs from
// the (validly signed) claim.
std::optional<EquivocationProof> respond_to_challenge(const Challenge& challenge,
                                                      const Consumer& consumer);

bool valid_proof(const EquivocationProof& proof, ByteView producer_key,
                 const SignatureScheme& scheme = default_scheme());

// A proof supports a challenge when one of its heads is the challenged claim.
bool proof_matches(const Challenge& challenge, const EquivocationProof& proof);

} // namespace trident
