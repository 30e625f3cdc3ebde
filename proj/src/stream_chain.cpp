#include "trident/stream_chain.hpp"

namespace trident {

namespace {

constexpr std::string_view kHeadDomain = "TRIDENT-NE-v1";

void write_alert(CanonicalWriter& w, const Alert& a) {
    w.u64(a.time)
        .text(a.source)
        .text(a.target)
        .text(a.classification)
        .text(a.assessment)
        .text(a.passthrough);
}

} // namespace

Bytes serialize_payload(const std::vector<Alert>& alerts) {
    if (alerts.size() > UINT32_MAX) throw StreamError("batch too large");
    CanonicalWriter w;
    w.u32(static_cast<std::uint32_t>(alerts.size()));
    for (const auto& a : alerts) write_alert(w, a);
    return w.take();
}

Digest chain_step(const std::optional<Digest>& prev, ByteView serialized_payload) {
    Bytes buf;
    buf.reserve((prev ? kDigestSize : 0) + serialized_payload.size());
    if (prev) buf.insert(buf.end(), prev->begin(), prev->end());
    buf.insert(buf.end(), serialized_payload.begin(), serialized_payload.end());
    return sha256(buf);
}

std::vector<Digest> derive_chain(const std::vector<std::vector<Alert>>& payloads) {
    std::vector<Digest> out;
    out.reserve(payloads.size());
    std::optional<Digest> prev;
    for (const auto& p : payloads) {
        prev = chain_step(prev, serialize_payload(p));
        out.push_back(*prev);
    }
    return out;
}

Bytes head_message(std::uint64_t stream_id, std::uint64_t index, const Digest& chain_hash) {
    CanonicalWriter w;
    w.text(kHeadDomain).u64(stream_id).u64(index).raw(chain_hash);
    return w.take();
}

bool SignedHead::verify(ByteView producer_key, const SignatureScheme& scheme) const {
    return scheme.verify(producer_key, head_message(stream_id, index, chain_hash), signature);
}

Producer::Producer(std::uint64_t stream_id, SigningKeyPair keys, const SignatureScheme& scheme)
    : stream_id_(stream_id), keys_(std::move(keys)), scheme_(&scheme) {}

SignedBatch Producer::produce(std::vector<Alert> alerts) {
    if (closed_) throw StreamError("stream is closed; no further batches may be produced");
    SignedBatch batch;
    batch.payload = std::move(alerts);
    const Digest h = chain_step(head_, serialize_payload(batch.payload));
    batch.head.stream_id = stream_id_;
    batch.head.index = next_index_;
    batch.head.chain_hash = h;
    batch.head.signature = scheme_->sign(keys_.secret, head_message(stream_id_, next_index_, h));
    head_ = h;
    ++next_index_;
    return batch;
}

const char* to_string(VerifyStatus s) {
    switch (s) {
    case VerifyStatus::Ok: return "ok";
    case VerifyStatus::ChainMismatch: return "chain-mismatch";
    case VerifyStatus::BadSignature: return "bad-signature";
    }
    return "?";
}

Consumer::Consumer(std::uint64_t stream_id, Bytes producer_key, const SignatureScheme& scheme)
    : stream_id_(stream_id), producer_key_(std::move(producer_key)), scheme_(&scheme) {}

VerifyStatus Consumer::verify(const SignedBatch& batch) {
    const SignedHead& h = batch.head;
    if (!h.verify(producer_key_, *scheme_)) return VerifyStatus::BadSignature;
    if (h.stream_id != stream_id_ || h.index != next_index_) return VerifyStatus::ChainMismatch;
    const Digest expect = chain_step(head_, serialize_payload(batch.payload));
    if (expect != h.chain_hash) return VerifyStatus::ChainMismatch;
    head_ = expect;
    heads_.emplace(h.index, h);
    ++next_index_;
    return VerifyStatus::Ok;
}

const SignedHead* Consumer::held(std::uint64_t index) const {
    auto it = heads_.find(index);
    return it == heads_.end() ? nullptr : &it->second;
}

Challenge make_challenge(const Consumer& consumer, std::string challenger, std::uint64_t index) {
    const SignedHead* h = consumer.held(index);
    if (!h) throw StreamError("no verified batch at index " + std::to_string(index));
    return Challenge{std::move(challenger), *h};
}

std::optional<EquivocationProof> respond_to_challenge(const Challenge& challenge,
                                                      const Consumer& consumer) {
    const SignedHead& claim = challenge.claim;
    if (claim.stream_id != consumer.stream_id()) return std::nullopt;
    const SignedHead* local = consumer.held(claim.index);
    if (!local || local->chain_hash == claim.chain_hash) return std::nullopt;
    if (!claim.verify(consumer.producer_key(), consumer.scheme())) return std::nullopt;
    return EquivocationProof{claim, *local};
}

bool valid_proof(const EquivocationProof& proof, ByteView producer_key,
                 const SignatureScheme& scheme) {
    const auto& a = proof.first;
    const auto& b = proof.second;
    return a.stream_id == b.stream_id && a.index == b.index && a.chain_hash != b.chain_hash &&
           a.verify(producer_key, scheme) && b.verify(producer_key, scheme);
}

bool proof_matches(const Challenge& challenge, const EquivocationProof& proof) {
    return proof.first == challenge.claim || proof.second == challenge.claim;
}

} // namespace trident
