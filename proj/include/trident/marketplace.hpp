#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "trident/crypto.hpp"
#include "trident/stream_chain.hpp"
#include "trident/tokens.hpp"
#include "trident/trust_engine.hpp"

namespace trident {

using PartyId = std::string;
using ObjectId = std::uint64_t;

// The only caller allowed to mint test tokens and advance the clock.
inline constexpr std::string_view kSystemCaller = "@system";

// Ledger account names used in transfers besides party ids.
inline constexpr std::string_view kMintAccount = "@mint";
inline constexpr std::string_view kBurnAccount = "@burn";
inline constexpr std::string_view kEscrowAccount = "@escrow";
inline constexpr std::string_view kSinkAccount = "@sink";

// Party ids: 1-64 chars of [A-Za-z0-9_.-].
bool valid_party_id(std::string_view id);

struct MarketConfig {
    Tokens burn_baseline = 1_tok;
    std::uint64_t rate_deadline = 10'000; // clock steps after subscription
    std::uint64_t reclaim_delay = 1'000;  // T1, clock steps after takedown
    std::uint32_t challenger_share_num = 2;
    std::uint32_t challenger_share_den = 3;

    void validate() const;
    bool operator==(const MarketConfig&) const = default;
};

struct AdvertTags {
    double throughput_per_hour = 0.0;
    Tokens price_per_batch;
    std::string detector_type;
    std::string network_type;
    std::vector<std::string> attack_types;

    std::optional<std::string> problem() const;
    bool operator==(const AdvertTags&) const = default;
};

struct Party {
    PartyId id;
    Bytes verify_key;
    Bytes encryption_key;
    Tokens burned;
    std::uint64_t registered_at = 0;

    bool operator==(const Party&) const = default;
};

struct Advert {
    ObjectId id = 0;
    PartyId publisher;
    AdvertTags tags;
    std::set<ObjectId> offers;
    std::set<ObjectId> subscriptions;

    bool operator==(const Advert&) const = default;
};

struct Offer {
    ObjectId id = 0;
    ObjectId advert = 0;
    PartyId maker;
    Tokens fee;
    Tokens deposit;

    bool operator==(const Offer&) const = default;
};

struct Subscription {
    ObjectId id = 0;
    ObjectId advert = 0;
    ObjectId offer = 0; // the accepted offer, kept for deposit accounting
    PartyId subscriber;
    Tokens fee;
    Tokens deposit;
    Bytes sealed_endpoint;
    std::uint64_t created_at = 0;
    bool rated = false;
    std::uint8_t ratings_given = 0;
    std::optional<bool> contribution; // current positive/negative evidence

    bool operator==(const Subscription&) const = default;
};

enum class DepositStatus { Live, Adjudicated, Reclaimed };
const char* to_string(DepositStatus s);

// Bond posted by a stream producer; its id doubles as the stream id.
struct StreamDeposit {
    ObjectId id = 0;
    PartyId producer;
    ObjectId advert = 0;
    Tokens amount;
    std::uint64_t posted_at = 0;
    std::optional<std::uint64_t> takedown_at;
    DepositStatus status = DepositStatus::Live;

    bool operator==(const StreamDeposit&) const = default;
};

// Where an offer's rating deposit ended up.
enum class DepositFate { Pending, MakerRefund, SubscriberRefund, Forfeited };
const char* to_string(DepositFate f);

struct MarketState {
    MarketConfig config;
    std::uint64_t seq = 0;   // applied commands
    std::uint64_t clock = 0; // protocol time
    ObjectId next_id = 1;
    std::map<PartyId, Tokens> balances;
    std::map<PartyId, Party> parties;
    std::map<ObjectId, Advert> adverts;
    std::map<ObjectId, Offer> offers;
    std::map<ObjectId, Subscription> subscriptions;
    std::map<PartyId, Evidence> ratings;
    std::map<ObjectId, StreamDeposit> stream_deposits;
    std::map<ObjectId, DepositFate> offer_deposits;
    Tokens escrow;
    Tokens sink;
    Tokens minted;
    Tokens burned;

    Tokens balance(const PartyId& id) const;
    bool registered(const PartyId& id) const { return parties.contains(id); }

    // Σ balances + escrow + sink == minted − burned.
    bool conserved() const;
    // Escrow equals the sum of everything it is holding.
    bool escrow_consistent() const;

    bool operator==(const MarketState&) const = default;
};

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace cmd {
struct Mint { PartyId to; Tokens amount; bool operator==(const Mint&) const = default; };
struct Tick { std::uint64_t steps = 1; bool operator==(const Tick&) const = default; };
struct Register {
    Tokens payment;
    Bytes verify_key;
    Bytes encryption_key;
    bool operator==(const Register&) const = default;
};
struct Advertise { AdvertTags tags; bool operator==(const Advertise&) const = default; };
struct RmAdvert { ObjectId advert = 0; bool operator==(const RmAdvert&) const = default; };
struct MkOffer {
    ObjectId advert = 0;
    Tokens fee;
    Tokens deposit;
    bool operator==(const MkOffer&) const = default;
};
struct DelOffer { ObjectId offer = 0; bool operator==(const DelOffer&) const = default; };
struct AccOffer {
    ObjectId offer = 0;
    Bytes sealed_endpoint;
    bool operator==(const AccOffer&) const = default;
};
struct Unsubscribe { ObjectId subscription = 0; bool operator==(const Unsubscribe&) const = default; };
struct Rate {
    ObjectId subscription = 0;
    double rating = 0.0;
    bool operator==(const Rate&) const = default;
};
struct PostDeposit {
    ObjectId advert = 0;
    Tokens amount;
    bool operator==(const PostDeposit&) const = default;
};
struct Adjudicate {
    ObjectId deposit = 0;
    Challenge challenge;
    EquivocationProof proof;
    bool operator==(const Adjudicate&) const = default;
};
struct Reclaim { ObjectId deposit = 0; bool operator==(const Reclaim&) const = default; };
} // namespace cmd

using Operation = std::variant<cmd::Mint, cmd::Tick, cmd::Register, cmd::Advertise, cmd::RmAdvert,
                               cmd::MkOffer, cmd::DelOffer, cmd::AccOffer, cmd::Unsubscribe,
                               cmd::Rate, cmd::PostDeposit, cmd::Adjudicate, cmd::Reclaim>;

const char* op_name(const Operation& op);

struct Command {
    PartyId caller;
    Operation op;

    bool operator==(const Command&) const = default;
};

struct Transfer {
    std::string from;
    std::string to;
    Tokens amount;

    bool operator==(const Transfer&) const = default;
};

struct Event {
    std::string kind;
    ObjectId object = 0;
    std::vector<Transfer> transfers;
    std::vector<std::string> flags;

    bool has_flag(std::string_view f) const;
    bool operator==(const Event&) const = default;
};

enum class RejectCode {
    Unregistered,
    AlreadyRegistered,
    InvalidArgument,
    UnknownAdvert,
    UnknownOffer,
    UnknownSubscription,
    UnknownDeposit,
    Unauthorized,
    InsufficientBalance,
    RatingLimit,
    Expired,
    DepositClosed,
    TooEarly,
    InvalidProof,
};
const char* to_string(RejectCode c);

struct Rejection {
    RejectCode code;
    std::string message;

    bool operator==(const Rejection&) const = default;
};

using Outcome = std::variant<Event, Rejection>;

inline bool accepted(const Outcome& o) { return std::holds_alternative<Event>(o); }

struct LogEntry {
    std::uint64_t seq = 0;
    Command command;
    Event event;

    bool operator==(const LogEntry&) const = default;
};

class ReplayError : public std::runtime_error {
public:
    ReplayError(std::size_t position, const std::string& what)
        : std::runtime_error("log entry " + std::to_string(position) + ": " + what),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

// Single-writer state machine. Every command either applies atomically
// and is appended to the log, or is rejected with the state untouched.
class Market {
public:
    explicit Market(MarketConfig config = {});

    Outcome apply(const Command& command);

    const MarketState& state() const { return state_; }
    const std::vector<LogEntry>& log() const { return log_; }

    // Throws std::out_of_range for unknown parties.
    TrustScore trust_of(const PartyId& party, const TrustConfig& cfg) const;

    // Folds the log over an empty market, checking each recorded event.
    static Market replay(const MarketConfig& config, const std::vector<LogEntry>& log);

private:
    MarketState state_;
    std::vector<LogEntry> log_;
};

} // namespace trident
