#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "trident/crypto.hpp"
#include "trident/marketplace.hpp"
#include "trident/stream_chain.hpp"
#include "trident/wire.hpp"

namespace trident {

class StreamNetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kNonceSize = 32;

// ---------------------------------------------------------------------------
// Endpoint sealing
// ---------------------------------------------------------------------------

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;

    std::string to_string() const { return host + ":" + std::to_string(port); }
    static Endpoint parse(std::string_view text); // throws StreamNetError
};

// Enc_pkB(endpoint || Sig_S(endpoint)).
Bytes seal_endpoint(const Endpoint& ep, const SigningKeyPair& seller, ByteView buyer_encryption_pub);
// Nullopt when decryption or the seller signature fails.
std::optional<Endpoint> open_endpoint(ByteView sealed, const EncryptionKeyPair& buyer,
                                      ByteView seller_verify_key);

// ---------------------------------------------------------------------------
// Handshake
// ---------------------------------------------------------------------------

// The bytes a buyer signs: binds the per-connection nonce to the subscription.
Bytes nonce_message(ObjectId subscription, ByteView nonce);

struct SubscriberInfo {
    PartyId subscriber;
    Bytes verify_key;
};

using SubscriptionLookup = std::function<std::optional<SubscriberInfo>(ObjectId)>;

// Subscriptions to `seller`'s adverts in a market snapshot.
SubscriptionLookup lookup_in(std::shared_ptr<const MarketState> snapshot, PartyId seller);

// At most one live session per subscription.
class SessionRegistry {
public:
    bool claim(ObjectId subscription);
    void release(ObjectId subscription);
    std::size_t live() const;

private:
    mutable std::mutex mu_;
    std::set<ObjectId> live_;
};

struct SellerHandshake {
    bool accepted = false;
    ObjectId subscription = 0;
    PartyId subscriber;
    std::string reason;
};

// Runs the seller side on an accepted connection. When accepted, the
// subscription slot stays claimed; the caller releases it.
SellerHandshake handshake_seller(Connection& conn, const SubscriptionLookup& lookup,
                                 SessionRegistry& sessions,
                                 const SignatureScheme& scheme = default_scheme());

enum class BuyerFault { None, WrongKey, TamperedNonce, ReplayedSignature };
const char* to_string(BuyerFault f);

struct BuyerOptions {
    BuyerFault fault = BuyerFault::None;
    Bytes replay_signature;          // sent verbatim under ReplayedSignature
    SigningKeyPair wrong_key;        // used under WrongKey
};

struct BuyerHandshake {
    bool accepted = false;
    std::string reason;
    Bytes nonce;
    Bytes signature;
};

BuyerHandshake handshake_buyer(Connection& conn, ObjectId subscription, const PartyId& buyer,
                               const SigningKeyPair& keys, const BuyerOptions& options = {},
                               const SignatureScheme& scheme = default_scheme());

// Opens the sealed endpoint, connects, and runs the buyer handshake.
struct BuyerSession {
    Connection conn;
    BuyerHandshake handshake;
};
BuyerSession establish_session(ByteView sealed_endpoint, const PartyKeys& buyer_keys,
                               ByteView seller_verify_key, ObjectId subscription,
                               const PartyId& buyer, const BuyerOptions& options = {});

// Accept loop with one handler thread per connection.
class StreamServer {
public:
    using SessionHandler = std::function<void(const SellerHandshake&, Connection&)>;

    StreamServer(Listener listener, SubscriptionLookup lookup, SessionHandler handler);
    ~StreamServer();
    StreamServer(const StreamServer&) = delete;
    StreamServer& operator=(const StreamServer&) = delete;

    void start();
    void stop();
    std::uint16_t port() const { return listener_.port(); }
    Endpoint endpoint() const { return {listener_.host(), listener_.port()}; }
    std::vector<SellerHandshake> outcomes() const;
    const SessionRegistry& sessions() const { return sessions_; }

private:
    void serve(Connection conn);

    Listener listener_;
    SubscriptionLookup lookup_;
    SessionHandler handler_;
    SessionRegistry sessions_;
    std::thread acceptor_;
    std::mutex mu_;
    std::vector<std::thread> workers_;
    mutable std::mutex outcomes_mu_;
    std::vector<SellerHandshake> outcomes_;
    std::atomic<bool> running_{false};
};

// ---------------------------------------------------------------------------
// Deposit adjudication; both go through the marketplace's command queue.
// ---------------------------------------------------------------------------

Outcome adjudicate(Market& market, const PartyId& prover, ObjectId deposit,
                   const Challenge& challenge, const EquivocationProof& proof);
Outcome reclaim_deposit(Market& market, const PartyId& producer, ObjectId deposit);

// Pure form of the reclaim rule: allowed iff taken down and now >= takedown + T1.
bool reclaim_allowed(const StreamDeposit& deposit, std::uint64_t now, std::uint64_t reclaim_delay);

// ---------------------------------------------------------------------------
// End-to-end demo: market setup, loopback streaming, challenges, payout.
// ---------------------------------------------------------------------------

enum class StreamFault { None, ForkAtK, BadSignature };
const char* to_string(StreamFault f);
std::optional<StreamFault> parse_stream_fault(std::string_view s);

struct DemoConfig {
    std::uint64_t seed = 1;
    std::uint64_t batches = 100;
    std::size_t batch_size = kDefaultBatchSize;
    std::size_t buyers = 2;
    StreamFault fault = StreamFault::None;
    std::uint64_t fault_index = 50;
    Tokens deposit = 9_tok;
    MarketConfig market;
};

struct BuyerReport {
    PartyId buyer;
    bool handshake_accepted = false;
    std::uint64_t verified = 0;
    std::optional<VerifyStatus> failure;
    std::optional<std::uint64_t> failure_index;
};

struct DemoReport {
    std::vector<BuyerReport> buyers;
    std::uint64_t challenges = 0;
    std::uint64_t proofs = 0;
    std::optional<Event> payout;
    bool reclaim_rejected_after_payout = false;
    std::optional<Event> reclaim;
    bool conserved = false;
};

// Everything both roles derive deterministically from the config: the
// market with one subscription per buyer, keys, and the pre-signed chains.
struct DemoWorld {
    DemoConfig config;
    Market market;
    std::map<PartyId, PartyKeys> keys;
    PartyId seller = "seller";
    std::vector<PartyId> buyers;
    ObjectId advert = 0;
    ObjectId deposit = 0;
    std::map<PartyId, ObjectId> subscription_of;
    std::vector<std::vector<SignedBatch>> chains; // one per branch
    std::map<PartyId, std::size_t> branch_of;
    Endpoint endpoint;
};

DemoWorld build_demo_world(const DemoConfig& config, const Endpoint& endpoint);

// Serves the chains until `sessions` handshakes have finished.
void run_demo_seller(const DemoWorld& world, Listener listener, std::size_t sessions,
                     std::ostream& transcript, std::chrono::seconds timeout = std::chrono::seconds(30));

// Connects as buyer `index`, verifies every batch into `consumer`.
BuyerReport run_demo_buyer(const DemoWorld& world, std::size_t index, Consumer& consumer,
                           std::string* error = nullptr);

// Both roles in one process over loopback, then challenges and payout.
DemoReport run_stream_demo(const DemoConfig& config, std::ostream& transcript);

} // namespace trident
