#include "trident/stream_net.hpp"

#include <charconv>
#include <map>
#include <ostream>
#include <sstream>

#include "trident/rng.hpp"

namespace trident {

Endpoint Endpoint::parse(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        throw StreamNetError("endpoint must look like host:port");
    }
    unsigned port = 0;
    const auto digits = text.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || port == 0 || port > 65535) {
        throw StreamNetError("bad port in endpoint '" + std::string(text) + "'");
    }
    return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

namespace {

constexpr std::string_view kEndpointDomain = "TRIDENT-EP-v1";
constexpr std::string_view kNonceDomain = "TRIDENT-HS-v1";

Bytes endpoint_message(std::string_view endpoint) {
    CanonicalWriter w;
    w.text(kEndpointDomain).text(endpoint);
    return w.take();
}

// Minimal reader for the sealed-endpoint plaintext.
std::optional<Bytes> read_field(ByteView data, std::size_t& pos) {
    if (data.size() - pos < 4) return std::nullopt;
    const std::uint32_t len = (std::uint32_t{data[pos]} << 24) | (std::uint32_t{data[pos + 1]} << 16) |
                              (std::uint32_t{data[pos + 2]} << 8) | std::uint32_t{data[pos + 3]};
    pos += 4;
    if (data.size() - pos < len) return std::nullopt;
    Bytes out(data.begin() + static_cast<std::ptrdiff_t>(pos),
              data.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
    return out;
}

} // namespace

Bytes seal_endpoint(const Endpoint& ep, const SigningKeyPair& seller, ByteView buyer_encryption_pub) {
    const std::string text = ep.to_string();
    CanonicalWriter w;
    w.text(text).bytes(default_scheme().sign(seller.secret, endpoint_message(text)));
    return seal(buyer_encryption_pub, w.data());
}

std::optional<Endpoint> open_endpoint(ByteView sealed, const EncryptionKeyPair& buyer,
                                      ByteView seller_verify_key) {
    const auto plain = unseal(buyer, sealed);
    if (!plain) return std::nullopt;
    std::size_t pos = 0;
    const auto text = read_field(*plain, pos);
    const auto sig = text ? read_field(*plain, pos) : std::nullopt;
    if (!sig || pos != plain->size()) return std::nullopt;
    const std::string ep(text->begin(), text->end());
    if (!default_scheme().verify(seller_verify_key, endpoint_message(ep), *sig)) return std::nullopt;
    try {
        return Endpoint::parse(ep);
    } catch (const StreamNetError&) {
        return std::nullopt;
    }
}

Bytes nonce_message(ObjectId subscription, ByteView nonce) {
    CanonicalWriter w;
    w.text(kNonceDomain).u64(subscription).bytes(nonce);
    return w.take();
}

SubscriptionLookup lookup_in(std::shared_ptr<const MarketState> snapshot, PartyId seller) {
    return [snapshot = std::move(snapshot), seller = std::move(seller)](
               ObjectId id) -> std::optional<SubscriberInfo> {
        auto it = snapshot->subscriptions.find(id);
        if (it == snapshot->subscriptions.end()) return std::nullopt;
        const Subscription& sub = it->second;
        if (snapshot->adverts.at(sub.advert).publisher != seller) return std::nullopt;
        auto party = snapshot->parties.find(sub.subscriber);
        if (party == snapshot->parties.end()) return std::nullopt;
        return SubscriberInfo{sub.subscriber, party->second.verify_key};
    };
}

bool SessionRegistry::claim(ObjectId subscription) {
    std::lock_guard lock(mu_);
    return live_.insert(subscription).second;
}

void SessionRegistry::release(ObjectId subscription) {
    std::lock_guard lock(mu_);
    live_.erase(subscription);
}

std::size_t SessionRegistry::live() const {
    std::lock_guard lock(mu_);
    return live_.size();
}

namespace {

SellerHandshake refuse(Connection& conn, SellerHandshake hs, std::string reason) {
    hs.reason = std::move(reason);
    try {
        conn.send(make_message(MsgKind::Reject, {{"reason", hs.reason}}));
    } catch (const WireError&) {
        // The peer may already be gone; the refusal stands either way.
    }
    conn.close();
    return hs;
}

} // namespace

SellerHandshake handshake_seller(Connection& conn, const SubscriptionLookup& lookup,
                                 SessionRegistry& sessions, const SignatureScheme& scheme) {
    SellerHandshake hs;
    try {
        const Json hello = conn.receive();
        if (message_kind(hello) != MsgKind::Hello) return refuse(conn, hs, "expected HELLO");
        hs.subscription = hello.at("subscription").get<ObjectId>();
        hs.subscriber = hello.at("subscriber").get<std::string>();

        const auto info = lookup(hs.subscription);
        if (!info || info->subscriber != hs.subscriber) return refuse(conn, hs, "unknown subscription");
        if (!sessions.claim(hs.subscription)) {
            return refuse(conn, hs, "a session is already live for this subscription");
        }

        try {
            const Bytes nonce = random_bytes(kNonceSize);
            conn.send(make_message(MsgKind::Nonce, {{"nonce", bytes_json(nonce)}}));
            const Json reply = conn.receive();
            if (message_kind(reply) != MsgKind::NonceSig) {
                sessions.release(hs.subscription);
                return refuse(conn, hs, "expected NONCE_SIG");
            }
            const Bytes sig = bytes_from(reply.at("signature"));
            if (!scheme.verify(info->verify_key, nonce_message(hs.subscription, nonce), sig)) {
                sessions.release(hs.subscription);
                return refuse(conn, hs, "nonce signature does not verify");
            }
            conn.send(make_message(MsgKind::Accept));
        } catch (...) {
            sessions.release(hs.subscription);
            throw;
        }
        hs.accepted = true;
        return hs;
    } catch (const std::exception& e) {
        hs.accepted = false;
        hs.reason = std::string("handshake aborted: ") + e.what();
        conn.close();
        return hs;
    }
}

const char* to_string(BuyerFault f) {
    switch (f) {
    case BuyerFault::None: return "correct-key";
    case BuyerFault::WrongKey: return "wrong-key";
    case BuyerFault::TamperedNonce: return "tampered-nonce";
    case BuyerFault::ReplayedSignature: return "replayed-nonce";
    }
    return "?";
}

BuyerHandshake handshake_buyer(Connection& conn, ObjectId subscription, const PartyId& buyer,
                               const SigningKeyPair& keys, const BuyerOptions& options,
                               const SignatureScheme& scheme) {
    BuyerHandshake hs;
    try {
        conn.send(make_message(MsgKind::Hello, {{"subscription", subscription}, {"subscriber", buyer}}));
        const Json first = conn.receive();
        if (message_kind(first) == MsgKind::Reject) {
            hs.reason = first.value("reason", std::string("rejected"));
            return hs;
        }
        if (message_kind(first) != MsgKind::Nonce) throw WireError("expected NONCE");
        hs.nonce = bytes_from(first.at("nonce"));
        if (hs.nonce.size() != kNonceSize) throw WireError("nonce has the wrong length");

        switch (options.fault) {
        case BuyerFault::None:
            hs.signature = scheme.sign(keys.secret, nonce_message(subscription, hs.nonce));
            break;
        case BuyerFault::WrongKey:
            hs.signature = scheme.sign(options.wrong_key.secret, nonce_message(subscription, hs.nonce));
            break;
        case BuyerFault::TamperedNonce: {
            Bytes bent = hs.nonce;
            bent[0] ^= 0x01;
            hs.signature = scheme.sign(keys.secret, nonce_message(subscription, bent));
            break;
        }
        case BuyerFault::ReplayedSignature:
            hs.signature = options.replay_signature;
            break;
        }
        conn.send(make_message(MsgKind::NonceSig, {{"signature", bytes_json(hs.signature)}}));
        const Json verdict = conn.receive();
        if (message_kind(verdict) == MsgKind::Accept) {
            hs.accepted = true;
        } else {
            hs.reason = verdict.value("reason", std::string("rejected"));
        }
    } catch (const std::exception& e) {
        hs.accepted = false;
        hs.reason = e.what();
    }
    return hs;
}

BuyerSession establish_session(ByteView sealed_endpoint, const PartyKeys& buyer_keys,
                               ByteView seller_verify_key, ObjectId subscription,
                               const PartyId& buyer, const BuyerOptions& options) {
    const auto ep = open_endpoint(sealed_endpoint, buyer_keys.encryption, seller_verify_key);
    if (!ep) throw StreamNetError("sealed endpoint could not be opened");
    BuyerSession session;
    try {
        session.conn = Connection::connect(ep->host, ep->port);
    } catch (const WireError& e) {
        throw StreamNetError(std::string("cannot reach seller at ") + ep->to_string() + ": " + e.what());
    }
    session.handshake = handshake_buyer(session.conn, subscription, buyer, buyer_keys.signing, options);
    return session;
}

StreamServer::StreamServer(Listener listener, SubscriptionLookup lookup, SessionHandler handler)
    : listener_(std::move(listener)), lookup_(std::move(lookup)), handler_(std::move(handler)) {}

StreamServer::~StreamServer() { stop(); }

void StreamServer::start() {
    if (running_.exchange(true)) return;
    acceptor_ = std::thread([this] {
        while (running_) {
            auto conn = listener_.accept();
            if (!conn) break;
            std::lock_guard lock(mu_);
            workers_.emplace_back(&StreamServer::serve, this, std::move(*conn));
        }
    });
}

void StreamServer::stop() {
    if (!running_.exchange(false)) return;
    listener_.shutdown();
    if (acceptor_.joinable()) acceptor_.join();
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mu_);
        workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
}

std::vector<SellerHandshake> StreamServer::outcomes() const {
    std::lock_guard lock(outcomes_mu_);
    return outcomes_;
}

void StreamServer::serve(Connection conn) {
    conn.set_timeout(std::chrono::seconds(5));
    const SellerHandshake hs = handshake_seller(conn, lookup_, sessions_);
    {
        std::lock_guard lock(outcomes_mu_);
        outcomes_.push_back(hs);
    }
    if (!hs.accepted) return;
    try {
        handler_(hs, conn);
    } catch (const std::exception&) {
        // A failed session only ends that session.
    }
    // Release before closing so a reconnecting buyer finds the slot free.
    sessions_.release(hs.subscription);
    conn.close();
}

Outcome adjudicate(Market& market, const PartyId& prover, ObjectId deposit,
                   const Challenge& challenge, const EquivocationProof& proof) {
    return market.apply({prover, cmd::Adjudicate{deposit, challenge, proof}});
}

Outcome reclaim_deposit(Market& market, const PartyId& producer, ObjectId deposit) {
    return market.apply({producer, cmd::Reclaim{deposit}});
}

bool reclaim_allowed(const StreamDeposit& deposit, std::uint64_t now, std::uint64_t reclaim_delay) {
    return deposit.status == DepositStatus::Live && deposit.takedown_at &&
           now >= *deposit.takedown_at + reclaim_delay;
}

const char* to_string(StreamFault f) {
    switch (f) {
    case StreamFault::None: return "none";
    case StreamFault::ForkAtK: return "fork-at-k";
    case StreamFault::BadSignature: return "bad-signature";
    }
    return "?";
}

std::optional<StreamFault> parse_stream_fault(std::string_view s) {
    if (s == "none") return StreamFault::None;
    if (s == "fork-at-k") return StreamFault::ForkAtK;
    if (s == "bad-signature") return StreamFault::BadSignature;
    return std::nullopt;
}

namespace {

const char* kAttackClasses[] = {"DDoS", "botnet", "port-scan", "brute-force", "malware"};

std::vector<Alert> make_alerts(Rng& rng, std::uint64_t index, std::size_t n) {
    std::vector<Alert> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        Alert a;
        a.time = 1'600'000'000 + index * 60 + j;
        a.source = "10.0." + std::to_string(rng.next_u64() % 256) + "." + std::to_string(rng.next_u64() % 256);
        a.target = "192.168.1." + std::to_string(rng.next_u64() % 256);
        a.classification = kAttackClasses[rng.next_u64() % std::size(kAttackClasses)];
        a.assessment = std::to_string(rng.next_u64() % 100) + "%";
        out.push_back(std::move(a));
    }
    return out;
}

template <class T>
const T& expect_ok(const Outcome& o, const char* what) {
    if (const auto* rej = std::get_if<Rejection>(&o)) {
        throw StreamNetError(std::string(what) + " rejected: " + rej->message);
    }
    return std::get<T>(o);
}

std::mutex& demo_out_mutex() {
    static std::mutex mu;
    return mu;
}

std::string describe(const Event& ev) {
    std::string s = ev.kind;
    for (const auto& t : ev.transfers) {
        s += " [" + t.amount.to_string() + " " + t.from + " -> " + t.to + "]";
    }
    return s;
}

} // namespace

DemoWorld build_demo_world(const DemoConfig& config, const Endpoint& endpoint) {
    if (config.buyers < 1) throw StreamNetError("the demo needs at least one buyer");
    if (config.batches < 1) throw StreamNetError("the demo needs at least one batch");
    if (config.fault != StreamFault::None && config.fault_index >= config.batches) {
        throw StreamNetError("fault index must be below the batch count");
    }
    if (config.fault == StreamFault::ForkAtK && config.buyers < 2) {
        throw StreamNetError("fork-at-k needs at least two buyers");
    }

    DemoWorld w;
    w.config = config;
    w.market = Market(config.market);
    w.endpoint = endpoint;
    for (std::size_t i = 0; i < config.buyers; ++i) w.buyers.push_back("buyer" + std::to_string(i));
    w.keys.emplace(w.seller, PartyKeys::derive(config.seed, w.seller));
    for (const auto& b : w.buyers) w.keys.emplace(b, PartyKeys::derive(config.seed, b));

    Market& m = w.market;
    const PartyId system(kSystemCaller);
    for (const auto& [id, k] : w.keys) {
        expect_ok<Event>(m.apply({system, cmd::Mint{id, 100_tok}}), "mint");
        expect_ok<Event>(m.apply({id, cmd::Register{1_tok, k.signing.verify, k.encryption.pub}}), "register");
    }
    const AdvertTags tags{10.0, 1_tok, "IDS", "industrial", {"DDoS", "botnet"}};
    w.advert = expect_ok<Event>(m.apply({w.seller, cmd::Advertise{tags}}), "advertise").object;
    w.deposit = expect_ok<Event>(m.apply({w.seller, cmd::PostDeposit{w.advert, config.deposit}}),
                                 "post_deposit")
                    .object;
    for (const auto& b : w.buyers) {
        const ObjectId offer =
            expect_ok<Event>(m.apply({b, cmd::MkOffer{w.advert, 5_tok, 1_tok}}), "mk_offer").object;
        const Bytes sealed = seal_endpoint(endpoint, w.keys.at(w.seller).signing, w.keys.at(b).encryption.pub);
        w.subscription_of[b] =
            expect_ok<Event>(m.apply({w.seller, cmd::AccOffer{offer, sealed}}), "acc_offer").object;
    }

    // Chains are produced up front by the single writer; sessions only read.
    const std::size_t branches = config.fault == StreamFault::ForkAtK ? 2 : 1;
    w.chains.resize(branches);
    Rng rng = Rng(config.seed).split("stream_net/alerts");
    Rng fork_rng = Rng(config.seed).split("stream_net/fork-alerts");
    Producer producer(w.deposit, w.keys.at(w.seller).signing);
    std::optional<Producer> fork;
    for (std::uint64_t i = 0; i < config.batches; ++i) {
        if (branches == 2 && i == config.fault_index) fork = producer;
        w.chains[0].push_back(producer.produce(make_alerts(rng, i, config.batch_size)));
        if (fork) {
            w.chains[1].push_back(fork->produce(make_alerts(fork_rng, i, config.batch_size)));
        } else if (branches == 2) {
            w.chains[1].push_back(w.chains[0].back());
        }
    }
    if (config.fault == StreamFault::BadSignature) {
        w.chains[0][config.fault_index].head.signature[0] ^= 0x80;
    }
    for (std::size_t i = 0; i < w.buyers.size(); ++i) w.branch_of[w.buyers[i]] = i % branches;
    return w;
}

void run_demo_seller(const DemoWorld& world, Listener listener, std::size_t sessions,
                     std::ostream& out, std::chrono::seconds timeout) {
    auto snapshot = std::make_shared<const MarketState>(world.market.state());
    StreamServer server(std::move(listener), lookup_in(snapshot, world.seller),
                        [&](const SellerHandshake& hs, Connection& conn) {
                            for (const auto& batch : world.chains.at(world.branch_of.at(hs.subscriber))) {
                                conn.send(make_message(MsgKind::Batch, {{"batch", batch}}));
                            }
                        });
    server.start();
    out << "seller: listening on " << server.endpoint().to_string() << " (fault "
        << to_string(world.config.fault) << ")" << std::endl;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (server.outcomes().size() < sessions || server.sessions().live() > 0) {
        if (std::chrono::steady_clock::now() > deadline) {
            server.stop();
            throw StreamNetError("seller role: timed out waiting for buyers");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    server.stop();
    for (const auto& hs : server.outcomes()) {
        out << "seller: " << (hs.subscriber.empty() ? std::string("?") : hs.subscriber) << " "
            << (hs.accepted ? "accepted" : "rejected (" + hs.reason + ")") << '\n';
    }
}

BuyerReport run_demo_buyer(const DemoWorld& world, std::size_t index, Consumer& consumer,
                           std::string* error) {
    const PartyId& b = world.buyers.at(index);
    BuyerReport r;
    r.buyer = b;
    try {
        const Subscription& sub = world.market.state().subscriptions.at(world.subscription_of.at(b));
        BuyerSession s = establish_session(sub.sealed_endpoint, world.keys.at(b),
                                           world.keys.at(world.seller).signing.verify, sub.id, b);
        r.handshake_accepted = s.handshake.accepted;
        if (!s.handshake.accepted) {
            if (error) *error = "handshake rejected: " + s.handshake.reason;
            return r;
        }
        for (std::uint64_t n = 0; n < world.config.batches; ++n) {
            const Json msg = s.conn.receive();
            if (message_kind(msg) != MsgKind::Batch) throw WireError("expected BATCH");
            const auto batch = msg.at("batch").get<SignedBatch>();
            const VerifyStatus st = consumer.verify(batch);
            if (st != VerifyStatus::Ok) {
                r.failure = st;
                r.failure_index = batch.head.index;
                break;
            }
            ++r.verified;
        }
    } catch (const std::exception& e) {
        if (error) *error = std::string("buyer role: ") + e.what();
    }
    return r;
}

namespace {

void print_buyer(std::ostream& out, const BuyerReport& r, std::uint64_t batches, const std::string& error) {
    out << r.buyer << ": handshake " << (r.handshake_accepted ? "accepted" : "rejected") << ", verified "
        << r.verified << "/" << batches;
    if (r.failure) out << ", " << to_string(*r.failure) << " at index " << *r.failure_index;
    if (!error.empty()) out << ", " << error;
    out << '\n';
}

} // namespace

DemoReport run_stream_demo(const DemoConfig& config, std::ostream& out) {
    Listener listener("127.0.0.1", 0);
    DemoWorld world = build_demo_world(config, {listener.host(), listener.port()});
    Market& market = world.market;
    const PartyId system(kSystemCaller);
    out << "setup: advert #" << world.advert << ", stream deposit #" << world.deposit << " of "
        << config.deposit.to_string() << " tokens, " << world.buyers.size() << " subscriptions\n";

    const std::size_t impostors = config.fault == StreamFault::BadSignature ? 1 : 0;
    std::thread seller([&, l = std::move(listener)]() mutable {
        std::ostringstream seller_log;
        try {
            run_demo_seller(world, std::move(l), world.buyers.size() + impostors, seller_log);
        } catch (const std::exception& e) {
            seller_log << e.what() << '\n';
        }
        std::lock_guard lock(demo_out_mutex());
        out << seller_log.str();
    });

    DemoReport report;
    if (impostors) {
        // A stranger signs the nonce for buyer0's subscription with its own key.
        const PartyId& b = world.buyers[0];
        const Subscription& sub = market.state().subscriptions.at(world.subscription_of.at(b));
        BuyerOptions opts;
        opts.fault = BuyerFault::WrongKey;
        opts.wrong_key = PartyKeys::derive(config.seed, "impostor").signing;
        BuyerSession s = establish_session(sub.sealed_endpoint, world.keys.at(b),
                                           world.keys.at(world.seller).signing.verify, sub.id, b, opts);
        std::lock_guard lock(demo_out_mutex());
        out << "impostor for " << b << ": handshake "
            << (s.handshake.accepted ? "accepted" : "rejected (" + s.handshake.reason + ")") << '\n';
    }

    std::vector<Consumer> consumers;
    for (std::size_t i = 0; i < world.buyers.size(); ++i) {
        consumers.emplace_back(world.deposit, world.keys.at(world.seller).signing.verify);
    }
    report.buyers.resize(world.buyers.size());
    std::vector<std::string> errors(world.buyers.size());
    {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < world.buyers.size(); ++i) {
            threads.emplace_back([&, i] { report.buyers[i] = run_demo_buyer(world, i, consumers[i], &errors[i]); });
        }
        for (auto& t : threads) t.join();
    }
    seller.join();
    for (std::size_t i = 0; i < world.buyers.size(); ++i) print_buyer(out, report.buyers[i], config.batches, errors[i]);

    // Every buyer posts a challenge for each index it holds; the others
    // answer. Challenges and proofs travel as wire frames.
    std::optional<std::pair<Challenge, EquivocationProof>> first;
    PartyId first_prover;
    for (std::size_t i = 0; i < world.buyers.size(); ++i) {
        for (std::uint64_t idx = 0; idx < consumers[i].next_index(); ++idx) {
            const Json cmsg = make_message(
                MsgKind::Challenge, {{"challenge", make_challenge(consumers[i], world.buyers[i], idx)}});
            const Challenge ch = decode_frame(encode_frame(cmsg)).at("challenge").get<Challenge>();
            ++report.challenges;
            for (std::size_t j = 0; j < world.buyers.size(); ++j) {
                if (j == i) continue;
                const auto proof = respond_to_challenge(ch, consumers[j]);
                if (!proof) continue;
                ++report.proofs;
                const Json pmsg = make_message(MsgKind::Proof, {{"proof", *proof}});
                const auto decoded = decode_frame(encode_frame(pmsg)).at("proof").get<EquivocationProof>();
                if (!first) {
                    first.emplace(ch, decoded);
                    first_prover = world.buyers[j];
                    out << "proof: " << world.buyers[j] << " answers " << world.buyers[i]
                        << "'s challenge at index " << idx << '\n';
                }
            }
        }
    }
    out << "challenges " << report.challenges << ", proofs " << report.proofs << '\n';

    if (first) {
        const Outcome o = adjudicate(market, first_prover, world.deposit, first->first, first->second);
        if (const auto* ev = std::get_if<Event>(&o)) {
            report.payout = *ev;
            out << "adjudication: " << describe(*ev) << '\n';
        } else {
            out << "adjudication rejected: " << std::get<Rejection>(o).message << '\n';
        }
        const Outcome again = adjudicate(market, first_prover, world.deposit, first->first, first->second);
        if (!accepted(again)) out << "second adjudication rejected: " << std::get<Rejection>(again).message << '\n';
        const Outcome rec = reclaim_deposit(market, world.seller, world.deposit);
        report.reclaim_rejected_after_payout = !accepted(rec);
        if (!accepted(rec)) out << "reclaim rejected: " << std::get<Rejection>(rec).message << '\n';
    } else {
        expect_ok<Event>(market.apply({world.seller, cmd::RmAdvert{world.advert}}), "rm_advert");
        const Outcome early = reclaim_deposit(market, world.seller, world.deposit);
        if (!accepted(early)) out << "early reclaim rejected: " << std::get<Rejection>(early).message << '\n';
        const std::uint64_t takedown = *market.state().stream_deposits.at(world.deposit).takedown_at;
        const std::uint64_t target = takedown + config.market.reclaim_delay;
        if (market.state().clock + 1 < target) {
            expect_ok<Event>(market.apply({system, cmd::Tick{target - market.state().clock - 1}}), "tick");
        }
        const Outcome rec = reclaim_deposit(market, world.seller, world.deposit);
        if (const auto* ev = std::get_if<Event>(&rec)) {
            report.reclaim = *ev;
            out << "reclaim at clock " << market.state().clock << ": " << describe(*ev) << '\n';
        } else {
            out << "reclaim rejected: " << std::get<Rejection>(rec).message << '\n';
        }
    }
    report.conserved = market.state().conserved() && market.state().escrow_consistent();
    out << "conservation " << (report.conserved ? "ok" : "VIOLATED") << '\n';
    return report;
}

} // namespace trident
