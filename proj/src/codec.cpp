#include "trident/codec.hpp"

#include <algorithm>

namespace trident {

Json bytes_json(ByteView b) { return to_base64(b); }

Bytes bytes_from(const Json& j) { return from_base64(j.get<std::string>()); }

Json digest_json(const Digest& d) { return to_base64(d); }

Digest digest_from(const Json& j) {
    const Bytes b = bytes_from(j);
    if (b.size() != kDigestSize) throw CodecError("digest must be 32 bytes");
    Digest d{};
    std::copy(b.begin(), b.end(), d.begin());
    return d;
}

void to_json(Json& j, const Tokens& t) { j = t.to_string(); }

void from_json(const Json& j, Tokens& t) {
    try {
        t = Tokens::parse(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw CodecError(e.what());
    }
}

void to_json(Json& j, const Alert& a) {
    j = Json{{"time", a.time},
             {"source", a.source},
             {"target", a.target},
             {"classification", a.classification},
             {"assessment", a.assessment}};
    if (!a.passthrough.empty()) j["passthrough"] = a.passthrough;
}

void from_json(const Json& j, Alert& a) {
    a.time = j.at("time").get<std::uint64_t>();
    a.source = j.at("source").get<std::string>();
    a.target = j.at("target").get<std::string>();
    a.classification = j.at("classification").get<std::string>();
    a.assessment = j.at("assessment").get<std::string>();
    a.passthrough = j.value("passthrough", std::string{});
}

void to_json(Json& j, const SignedHead& h) {
    j = Json{{"stream", h.stream_id},
             {"index", h.index},
             {"chain_hash", digest_json(h.chain_hash)},
             {"signature", bytes_json(h.signature)}};
}

void from_json(const Json& j, SignedHead& h) {
    h.stream_id = j.at("stream").get<std::uint64_t>();
    h.index = j.at("index").get<std::uint64_t>();
    h.chain_hash = digest_from(j.at("chain_hash"));
    h.signature = bytes_from(j.at("signature"));
}

void to_json(Json& j, const SignedBatch& b) { j = Json{{"head", b.head}, {"payload", b.payload}}; }

void from_json(const Json& j, SignedBatch& b) {
    b.head = j.at("head").get<SignedHead>();
    b.payload = j.at("payload").get<std::vector<Alert>>();
}

void to_json(Json& j, const Challenge& c) { j = Json{{"challenger", c.challenger}, {"claim", c.claim}}; }

void from_json(const Json& j, Challenge& c) {
    c.challenger = j.at("challenger").get<std::string>();
    c.claim = j.at("claim").get<SignedHead>();
}

void to_json(Json& j, const EquivocationProof& p) { j = Json{{"first", p.first}, {"second", p.second}}; }

void from_json(const Json& j, EquivocationProof& p) {
    p.first = j.at("first").get<SignedHead>();
    p.second = j.at("second").get<SignedHead>();
}

void to_json(Json& j, const MarketConfig& c) {
    j = Json{{"burn_baseline", c.burn_baseline},
             {"rate_deadline", c.rate_deadline},
             {"reclaim_delay", c.reclaim_delay},
             {"challenger_share", {c.challenger_share_num, c.challenger_share_den}}};
}

void from_json(const Json& j, MarketConfig& c) {
    c.burn_baseline = j.at("burn_baseline").get<Tokens>();
    c.rate_deadline = j.at("rate_deadline").get<std::uint64_t>();
    c.reclaim_delay = j.at("reclaim_delay").get<std::uint64_t>();
    const auto& share = j.at("challenger_share");
    c.challenger_share_num = share.at(0).get<std::uint32_t>();
    c.challenger_share_den = share.at(1).get<std::uint32_t>();
}

void to_json(Json& j, const AdvertTags& t) {
    j = Json{{"throughput_per_hour", t.throughput_per_hour},
             {"price_per_batch", t.price_per_batch},
             {"detector_type", t.detector_type},
             {"network_type", t.network_type},
             {"attack_types", t.attack_types}};
}

void from_json(const Json& j, AdvertTags& t) {
    t.throughput_per_hour = j.at("throughput_per_hour").get<double>();
    t.price_per_batch = j.at("price_per_batch").get<Tokens>();
    t.detector_type = j.at("detector_type").get<std::string>();
    t.network_type = j.at("network_type").get<std::string>();
    t.attack_types = j.at("attack_types").get<std::vector<std::string>>();
}

void to_json(Json& j, const Transfer& t) { j = Json{{"from", t.from}, {"to", t.to}, {"amount", t.amount}}; }

void from_json(const Json& j, Transfer& t) {
    t.from = j.at("from").get<std::string>();
    t.to = j.at("to").get<std::string>();
    t.amount = j.at("amount").get<Tokens>();
}

void to_json(Json& j, const Event& e) {
    j = Json{{"kind", e.kind}};
    if (e.object != 0) j["object"] = e.object;
    if (!e.transfers.empty()) j["transfers"] = e.transfers;
    if (!e.flags.empty()) j["flags"] = e.flags;
}

void from_json(const Json& j, Event& e) {
    e.kind = j.at("kind").get<std::string>();
    e.object = j.value("object", ObjectId{0});
    e.transfers = j.contains("transfers") ? j.at("transfers").get<std::vector<Transfer>>()
                                          : std::vector<Transfer>{};
    e.flags = j.contains("flags") ? j.at("flags").get<std::vector<std::string>>()
                                  : std::vector<std::string>{};
}

namespace {

struct ArgsWriter {
    Json operator()(const cmd::Mint& c) const { return {{"to", c.to}, {"amount", c.amount}}; }
    Json operator()(const cmd::Tick& c) const { return {{"steps", c.steps}}; }
    Json operator()(const cmd::Register& c) const {
        Json j{{"payment", c.payment}, {"verify_key", bytes_json(c.verify_key)}};
        if (!c.encryption_key.empty()) j["encryption_key"] = bytes_json(c.encryption_key);
        return j;
    }
    Json operator()(const cmd::Advertise& c) const { return {{"tags", c.tags}}; }
    Json operator()(const cmd::RmAdvert& c) const { return {{"advert", c.advert}}; }
    Json operator()(const cmd::MkOffer& c) const {
        return {{"advert", c.advert}, {"fee", c.fee}, {"deposit", c.deposit}};
    }
    Json operator()(const cmd::DelOffer& c) const { return {{"offer", c.offer}}; }
    Json operator()(const cmd::AccOffer& c) const {
        return {{"offer", c.offer}, {"sealed_endpoint", bytes_json(c.sealed_endpoint)}};
    }
    Json operator()(const cmd::Unsubscribe& c) const { return {{"subscription", c.subscription}}; }
    Json operator()(const cmd::Rate& c) const {
        return {{"subscription", c.subscription}, {"rating", c.rating}};
    }
    Json operator()(const cmd::PostDeposit& c) const {
        return {{"advert", c.advert}, {"amount", c.amount}};
    }
    Json operator()(const cmd::Adjudicate& c) const {
        return {{"deposit", c.deposit}, {"challenge", c.challenge}, {"proof", c.proof}};
    }
    Json operator()(const cmd::Reclaim& c) const { return {{"deposit", c.deposit}}; }
};

} // namespace

Json operation_args(const Operation& op) { return std::visit(ArgsWriter{}, op); }

Operation operation_from(std::string_view name, const Json& a) {
    auto id = [&](const char* key) { return a.at(key).get<ObjectId>(); };
    if (name == "mint") return cmd::Mint{a.at("to").get<std::string>(), a.at("amount").get<Tokens>()};
    if (name == "tick") return cmd::Tick{a.at("steps").get<std::uint64_t>()};
    if (name == "register") {
        Bytes enc = a.contains("encryption_key") ? bytes_from(a.at("encryption_key")) : Bytes{};
        return cmd::Register{a.at("payment").get<Tokens>(), bytes_from(a.at("verify_key")),
                             std::move(enc)};
    }
    if (name == "advertise") return cmd::Advertise{a.at("tags").get<AdvertTags>()};
    if (name == "rm_advert") return cmd::RmAdvert{id("advert")};
    if (name == "mk_offer") {
        return cmd::MkOffer{id("advert"), a.at("fee").get<Tokens>(), a.at("deposit").get<Tokens>()};
    }
    if (name == "del_offer") return cmd::DelOffer{id("offer")};
    if (name == "acc_offer") return cmd::AccOffer{id("offer"), bytes_from(a.at("sealed_endpoint"))};
    if (name == "unsubscribe") return cmd::Unsubscribe{id("subscription")};
    if (name == "rate") return cmd::Rate{id("subscription"), a.at("rating").get<double>()};
    if (name == "post_deposit") return cmd::PostDeposit{id("advert"), a.at("amount").get<Tokens>()};
    if (name == "adjudicate") {
        return cmd::Adjudicate{id("deposit"), a.at("challenge").get<Challenge>(),
                               a.at("proof").get<EquivocationProof>()};
    }
    if (name == "reclaim") return cmd::Reclaim{id("deposit")};
    throw CodecError("unknown operation '" + std::string(name) + "'");
}

} // namespace trident
