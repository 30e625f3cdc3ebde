#include "trident/marketplace.hpp"

#include <algorithm>
#include <cmath>

namespace trident {

bool valid_party_id(std::string_view id) {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](char ch) {
        return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
               ch == '_' || ch == '.' || ch == '-';
    });
}

void MarketConfig::validate() const {
    if (burn_baseline <= Tokens{}) throw std::invalid_argument("burn baseline must be > 0");
    if (challenger_share_den == 0 || challenger_share_num > challenger_share_den) {
        throw std::invalid_argument("challenger share must be a fraction in [0,1]");
    }
}

std::optional<std::string> AdvertTags::problem() const {
    if (!(throughput_per_hour > 0.0) || !std::isfinite(throughput_per_hour)) {
        return "throughput must be > 0";
    }
    if (price_per_batch < Tokens{}) return "price per batch must be >= 0";
    if (detector_type.empty()) return "detector type must be nonempty";
    if (network_type.empty()) return "network type must be nonempty";
    return std::nullopt;
}

const char* to_string(DepositStatus s) {
    switch (s) {
    case DepositStatus::Live: return "live";
    case DepositStatus::Adjudicated: return "adjudicated";
    case DepositStatus::Reclaimed: return "reclaimed";
    }
    return "?";
}

const char* to_string(DepositFate f) {
    switch (f) {
    case DepositFate::Pending: return "pending";
    case DepositFate::MakerRefund: return "maker-refund";
    case DepositFate::SubscriberRefund: return "subscriber-refund";
    case DepositFate::Forfeited: return "forfeited";
    }
    return "?";
}

const char* to_string(RejectCode c) {
    switch (c) {
    case RejectCode::Unregistered: return "unregistered";
    case RejectCode::AlreadyRegistered: return "already-registered";
    case RejectCode::InvalidArgument: return "invalid-argument";
    case RejectCode::UnknownAdvert: return "unknown-advert";
    case RejectCode::UnknownOffer: return "unknown-offer";
    case RejectCode::UnknownSubscription: return "unknown-subscription";
    case RejectCode::UnknownDeposit: return "unknown-deposit";
    case RejectCode::Unauthorized: return "unauthorized";
    case RejectCode::InsufficientBalance: return "insufficient-balance";
    case RejectCode::RatingLimit: return "rating-limit";
    case RejectCode::Expired: return "expired";
    case RejectCode::DepositClosed: return "deposit-closed";
    case RejectCode::TooEarly: return "too-early";
    case RejectCode::InvalidProof: return "invalid-proof";
    }
    return "?";
}

const char* op_name(const Operation& op) {
    static constexpr const char* names[] = {
        "mint",    "tick",      "register",    "advertise", "rm_advert",    "mk_offer", "del_offer",
        "acc_offer", "unsubscribe", "rate", "post_deposit", "adjudicate", "reclaim"};
    static_assert(std::size(names) == std::variant_size_v<Operation>);
    return names[op.index()];
}

bool Event::has_flag(std::string_view f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

Tokens MarketState::balance(const PartyId& id) const {
    auto it = balances.find(id);
    return it == balances.end() ? Tokens{} : it->second;
}

bool MarketState::conserved() const {
    Tokens total = escrow + sink;
    for (const auto& [id, b] : balances) {
        if (b < Tokens{}) return false;
        total += b;
    }
    return total == minted - burned;
}

bool MarketState::escrow_consistent() const {
    Tokens held;
    for (const auto& [id, o] : offers) held += o.fee + o.deposit;
    for (const auto& [id, s] : subscriptions) {
        if (!s.rated) held += s.deposit;
    }
    for (const auto& [id, d] : stream_deposits) {
        if (d.status == DepositStatus::Live) held += d.amount;
    }
    return held == escrow;
}

namespace {

Rejection reject(RejectCode code, std::string message) { return {code, std::move(message)}; }

std::string id_str(ObjectId id) { return std::to_string(id); }

// Each handler validates everything first and only then mutates.
class Applier {
public:
    Applier(MarketState& s, const PartyId& caller)
        : s_(s), caller_(caller), now_(s.clock + 1) {}

    // Clock steps this command consumes once applied.
    std::uint64_t advance() const { return advance_; }

    Outcome operator()(const cmd::Mint& c) {
        if (caller_ != kSystemCaller) return reject(RejectCode::Unauthorized, "only the system may mint");
        if (!valid_party_id(c.to)) return reject(RejectCode::InvalidArgument, "bad recipient id");
        if (c.amount <= Tokens{}) return reject(RejectCode::InvalidArgument, "mint amount must be > 0");
        s_.minted += c.amount;
        s_.balances[c.to] += c.amount;
        return Event{"minted", 0, {{std::string(kMintAccount), c.to, c.amount}}, {}};
    }

    Outcome operator()(const cmd::Tick& c) {
        if (caller_ != kSystemCaller) return reject(RejectCode::Unauthorized, "only the system may tick");
        if (c.steps == 0) return reject(RejectCode::InvalidArgument, "tick needs steps >= 1");
        advance_ = c.steps;
        return Event{"tick", 0, {}, {}};
    }

    Outcome operator()(const cmd::Register& c) {
        if (!valid_party_id(caller_)) return reject(RejectCode::InvalidArgument, "bad party id");
        if (s_.registered(caller_)) {
            return reject(RejectCode::AlreadyRegistered, caller_ + " is already registered");
        }
        if (c.payment <= Tokens{}) return reject(RejectCode::InvalidArgument, "payment must be > 0");
        if (c.verify_key.empty()) return reject(RejectCode::InvalidArgument, "missing public key");
        if (s_.balance(caller_) < c.payment) {
            return reject(RejectCode::InsufficientBalance, "balance below registration payment");
        }
        s_.balances[caller_] -= c.payment;
        s_.burned += c.payment;
        s_.parties.emplace(caller_, Party{caller_, c.verify_key, c.encryption_key, c.payment, now_});
        s_.ratings.emplace(caller_, Evidence{});
        return Event{"registered", 0, {{caller_, std::string(kBurnAccount), c.payment}}, {}};
    }

    Outcome operator()(const cmd::Advertise& c) {
        if (auto r = require_registered()) return *r;
        if (auto why = c.tags.problem()) return reject(RejectCode::InvalidArgument, *why);
        const ObjectId id = s_.next_id++;
        s_.adverts.emplace(id, Advert{id, caller_, c.tags, {}, {}});
        return Event{"advertised", id, {}, {}};
    }

    Outcome operator()(const cmd::RmAdvert& c) {
        if (auto r = require_registered()) return *r;
        auto it = s_.adverts.find(c.advert);
        if (it == s_.adverts.end()) return reject(RejectCode::UnknownAdvert, "no advert " + id_str(c.advert));
        if (it->second.publisher != caller_) {
            return reject(RejectCode::Unauthorized, "only the publisher may remove an advert");
        }
        Event ev{"advert-removed", c.advert, {}, {}};
        for (ObjectId oid : it->second.offers) {
            const Offer& o = s_.offers.at(oid);
            release(o.maker, o.fee + o.deposit, ev);
            s_.offer_deposits[oid] = DepositFate::MakerRefund;
            s_.offers.erase(oid);
        }
        for (ObjectId sid : it->second.subscriptions) {
            const Subscription& sub = s_.subscriptions.at(sid);
            if (!sub.rated) forfeit(sub, ev);
            s_.subscriptions.erase(sid);
        }
        for (auto& [did, d] : s_.stream_deposits) {
            if (d.advert == c.advert && !d.takedown_at) d.takedown_at = now_;
        }
        s_.adverts.erase(it);
        return ev;
    }

    Outcome operator()(const cmd::MkOffer& c) {
        if (auto r = require_registered()) return *r;
        if (!s_.adverts.contains(c.advert)) {
            return reject(RejectCode::UnknownAdvert, "no advert " + id_str(c.advert));
        }
        if (c.fee < Tokens{}) return reject(RejectCode::InvalidArgument, "fee must be >= 0");
        if (c.deposit <= Tokens{}) return reject(RejectCode::InvalidArgument, "a deposit must be provided");
        if (s_.balance(caller_) < c.fee + c.deposit) {
            return reject(RejectCode::InsufficientBalance, "balance below fee + deposit");
        }
        const ObjectId id = s_.next_id++;
        s_.balances[caller_] -= c.fee + c.deposit;
        s_.escrow += c.fee + c.deposit;
        s_.offers.emplace(id, Offer{id, c.advert, caller_, c.fee, c.deposit});
        s_.adverts.at(c.advert).offers.insert(id);
        s_.offer_deposits.emplace(id, DepositFate::Pending);
        return Event{"offer-made", id, {{caller_, std::string(kEscrowAccount), c.fee + c.deposit}}, {}};
    }

    Outcome operator()(const cmd::DelOffer& c) {
        if (auto r = require_registered()) return *r;
        auto it = s_.offers.find(c.offer);
        if (it == s_.offers.end()) return reject(RejectCode::UnknownOffer, "no offer " + id_str(c.offer));
        const Offer o = it->second;
        Advert& adv = s_.adverts.at(o.advert);
        if (caller_ != o.maker && caller_ != adv.publisher) {
            return reject(RejectCode::Unauthorized, "caller is neither offer maker nor publisher");
        }
        Event ev{"offer-deleted", o.id, {}, {}};
        release(o.maker, o.fee + o.deposit, ev);
        s_.offer_deposits[o.id] = DepositFate::MakerRefund;
        adv.offers.erase(o.id);
        s_.offers.erase(it);
        return ev;
    }

    Outcome operator()(const cmd::AccOffer& c) {
        if (auto r = require_registered()) return *r;
        auto it = s_.offers.find(c.offer);
        if (it == s_.offers.end()) return reject(RejectCode::UnknownOffer, "no offer " + id_str(c.offer));
        const Offer o = it->second;
        Advert& adv = s_.adverts.at(o.advert);
        if (caller_ != adv.publisher) {
            return reject(RejectCode::Unauthorized, "only the publisher may accept an offer");
        }
        if (c.sealed_endpoint.empty()) {
            return reject(RejectCode::InvalidArgument, "sealed endpoint must be nonempty");
        }
        const ObjectId id = s_.next_id++;
        Event ev{"offer-accepted", id, {}, {}};
        if (o.maker == adv.publisher) ev.flags.emplace_back("self-dealing");
        if (o.fee > Tokens{}) release(adv.publisher, o.fee, ev);
        Subscription sub;
        sub.id = id;
        sub.advert = o.advert;
        sub.offer = o.id;
        sub.subscriber = o.maker;
        sub.fee = o.fee;
        sub.deposit = o.deposit;
        sub.sealed_endpoint = c.sealed_endpoint;
        sub.created_at = now_;
        s_.subscriptions.emplace(id, std::move(sub));
        adv.offers.erase(o.id);
        adv.subscriptions.insert(id);
        s_.offers.erase(it);
        return ev;
    }

    Outcome operator()(const cmd::Unsubscribe& c) {
        if (auto r = require_registered()) return *r;
        auto it = s_.subscriptions.find(c.subscription);
        if (it == s_.subscriptions.end()) {
            return reject(RejectCode::UnknownSubscription, "no subscription " + id_str(c.subscription));
        }
        const Subscription& sub = it->second;
        Advert& adv = s_.adverts.at(sub.advert);
        if (caller_ != sub.subscriber && caller_ != adv.publisher) {
            return reject(RejectCode::Unauthorized, "caller is neither subscriber nor publisher");
        }
        Event ev{"unsubscribed", sub.id, {}, {}};
        if (!sub.rated) forfeit(sub, ev);
        adv.subscriptions.erase(sub.id);
        s_.subscriptions.erase(it);
        return ev;
    }

    Outcome operator()(const cmd::Rate& c) {
        if (auto r = require_registered()) return *r;
        auto it = s_.subscriptions.find(c.subscription);
        if (it == s_.subscriptions.end()) {
            return reject(RejectCode::UnknownSubscription, "no subscription " + id_str(c.subscription));
        }
        Subscription& sub = it->second;
        if (caller_ != sub.subscriber) {
            return reject(RejectCode::Unauthorized, "only the subscriber may rate");
        }
        if (!(c.rating >= 0.0 && c.rating <= 1.0)) {
            return reject(RejectCode::InvalidArgument, "rating must be in [0,1]");
        }
        if (sub.ratings_given >= 2) {
            return reject(RejectCode::RatingLimit, "rating already finalized");
        }
        if (now_ - sub.created_at > s_.config.rate_deadline) {
            return reject(RejectCode::Expired, "rating window has expired");
        }
        const PartyId& publisher = s_.adverts.at(sub.advert).publisher;
        Evidence& ev_pub = s_.ratings[publisher];
        if (sub.contribution) {
            (*sub.contribution ? ev_pub.positive : ev_pub.negative) -= 1;
        }
        const bool positive = c.rating >= 0.5;
        (positive ? ev_pub.positive : ev_pub.negative) += 1;
        sub.contribution = positive;
        ++sub.ratings_given;

        Event ev{"rated", sub.id, {}, {positive ? "positive" : "negative"}};
        if (publisher == caller_) ev.flags.emplace_back("self-dealing");
        if (!sub.rated) {
            sub.rated = true;
            release(sub.subscriber, sub.deposit, ev);
            s_.offer_deposits[sub.offer] = DepositFate::SubscriberRefund;
            ev.flags.emplace_back("deposit-refund");
        } else {
            ev.flags.emplace_back("rating-finalized");
        }
        return ev;
    }

    Outcome operator()(const cmd::PostDeposit& c) {
        if (auto r = require_registered()) return *r;
        auto it = s_.adverts.find(c.advert);
        if (it == s_.adverts.end()) return reject(RejectCode::UnknownAdvert, "no advert " + id_str(c.advert));
        if (it->second.publisher != caller_) {
            return reject(RejectCode::Unauthorized, "only the publisher may post a stream deposit");
        }
        if (c.amount <= Tokens{}) return reject(RejectCode::InvalidArgument, "deposit must be > 0");
        if (s_.balance(caller_) < c.amount) {
            return reject(RejectCode::InsufficientBalance, "balance below stream deposit");
        }
        const ObjectId id = s_.next_id++;
        s_.balances[caller_] -= c.amount;
        s_.escrow += c.amount;
        s_.stream_deposits.emplace(id, StreamDeposit{id, caller_, c.advert, c.amount, now_,
                                                     std::nullopt, DepositStatus::Live});
        return Event{"stream-deposit-posted", id, {{caller_, std::string(kEscrowAccount), c.amount}}, {}};
    }

    Outcome operator()(const cmd::Adjudicate& c) {
        if (auto r = require_registered()) return *r;
        auto it = s_.stream_deposits.find(c.deposit);
        if (it == s_.stream_deposits.end()) {
            return reject(RejectCode::UnknownDeposit, "no stream deposit " + id_str(c.deposit));
        }
        StreamDeposit& d = it->second;
        if (d.status != DepositStatus::Live) {
            return reject(RejectCode::DepositClosed, std::string("deposit already ") + to_string(d.status));
        }
        if (!s_.registered(c.challenge.challenger)) {
            return reject(RejectCode::InvalidArgument, "challenger is not registered");
        }
        const Party& producer = s_.parties.at(d.producer);
        const bool ok = c.challenge.claim.stream_id == d.id && c.proof.first.stream_id == d.id &&
                        proof_matches(c.challenge, c.proof) &&
                        valid_proof(c.proof, producer.verify_key);
        if (!ok) return reject(RejectCode::InvalidProof, "proof does not verify under producer key");

        const auto& cfg = s_.config;
        const Tokens to_challenger = Tokens::from_milli(
            d.amount.milli() * cfg.challenger_share_num / cfg.challenger_share_den);
        const Tokens to_prover = d.amount - to_challenger;
        Event ev{"adjudicated", d.id, {}, {}};
        release(c.challenge.challenger, to_challenger, ev);
        release(caller_, to_prover, ev);
        d.status = DepositStatus::Adjudicated;
        return ev;
    }

    Outcome operator()(const cmd::Reclaim& c) {
        if (auto r = require_registered()) return *r;
        auto it = s_.stream_deposits.find(c.deposit);
        if (it == s_.stream_deposits.end()) {
            return reject(RejectCode::UnknownDeposit, "no stream deposit " + id_str(c.deposit));
        }
        StreamDeposit& d = it->second;
        if (d.producer != caller_) return reject(RejectCode::Unauthorized, "only the producer may reclaim");
        if (d.status != DepositStatus::Live) {
            return reject(RejectCode::DepositClosed, std::string("deposit already ") + to_string(d.status));
        }
        if (!d.takedown_at) return reject(RejectCode::TooEarly, "advert has not been taken down");
        if (now_ < *d.takedown_at + s_.config.reclaim_delay) {
            return reject(RejectCode::TooEarly, "reclaim delay has not elapsed");
        }
        Event ev{"deposit-reclaimed", d.id, {}, {}};
        release(d.producer, d.amount, ev);
        d.status = DepositStatus::Reclaimed;
        return ev;
    }

private:
    std::optional<Rejection> require_registered() const {
        if (!s_.registered(caller_)) return reject(RejectCode::Unregistered, caller_ + " is not registered");
        return std::nullopt;
    }

    void release(const PartyId& to, Tokens amount, Event& ev) {
        s_.escrow -= amount;
        s_.balances[to] += amount;
        ev.transfers.push_back({std::string(kEscrowAccount), to, amount});
    }

    void forfeit(const Subscription& sub, Event& ev) {
        s_.escrow -= sub.deposit;
        s_.sink += sub.deposit;
        s_.offer_deposits[sub.offer] = DepositFate::Forfeited;
        ev.transfers.push_back({std::string(kEscrowAccount), std::string(kSinkAccount), sub.deposit});
        ev.flags.emplace_back("deposit-forfeit");
    }

    MarketState& s_;
    const PartyId& caller_;
    std::uint64_t now_;
    std::uint64_t advance_ = 1;
};

} // namespace

Market::Market(MarketConfig config) {
    config.validate();
    state_.config = config;
}

Outcome Market::apply(const Command& command) {
    // Handlers mutate only after every check passed, so a rejection leaves
    // the state untouched; the clock moves only for applied commands.
    Applier applier(state_, command.caller);
    Outcome out = std::visit(applier, command.op);
    if (auto* ev = std::get_if<Event>(&out)) {
        ++state_.seq;
        state_.clock += applier.advance();
        log_.push_back({state_.seq, command, *ev});
    }
    return out;
}

TrustScore Market::trust_of(const PartyId& party, const TrustConfig& cfg) const {
    const Party& p = state_.parties.at(party);
    TrustConfig local = cfg;
    local.burn_baseline = state_.config.burn_baseline;
    return score(state_.ratings.at(party), p.burned, local);
}

Market Market::replay(const MarketConfig& config, const std::vector<LogEntry>& log) {
    Market m(config);
    for (std::size_t i = 0; i < log.size(); ++i) {
        const LogEntry& e = log[i];
        if (e.seq != m.state_.seq + 1) throw ReplayError(i + 1, "sequence number out of order");
        Outcome out = m.apply(e.command);
        if (auto* rej = std::get_if<Rejection>(&out)) {
            throw ReplayError(i + 1, std::string("command rejected on replay: ") + rej->message);
        }
        if (std::get<Event>(out) != e.event) throw ReplayError(i + 1, "event differs from the log");
    }
    return m;
}

} // namespace trident
