#pragma once

// JSON encodings shared by the command log and the wire protocol.
// Binary fields are base64 strings; token amounts are decimal strings so
// they round-trip exactly.

#include <json.hpp>

#include "trident/marketplace.hpp"
#include "trident/stream_chain.hpp"
#include "trident/tokens.hpp"

namespace trident {

using Json = nlohmann::ordered_json;

class CodecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json bytes_json(ByteView b);
Bytes bytes_from(const Json& j);
Json digest_json(const Digest& d);
Digest digest_from(const Json& j);

void to_json(Json& j, const Tokens& t);
void from_json(const Json& j, Tokens& t);

void to_json(Json& j, const Alert& a);
void from_json(const Json& j, Alert& a);
void to_json(Json& j, const SignedHead& h);
void from_json(const Json& j, SignedHead& h);
void to_json(Json& j, const SignedBatch& b);
void from_json(const Json& j, SignedBatch& b);
void to_json(Json& j, const Challenge& c);
void from_json(const Json& j, Challenge& c);
void to_json(Json& j, const EquivocationProof& p);
void from_json(const Json& j, EquivocationProof& p);

void to_json(Json& j, const MarketConfig& c);
void from_json(const Json& j, MarketConfig& c);
void to_json(Json& j, const AdvertTags& t);
void from_json(const Json& j, AdvertTags& t);
void to_json(Json& j, const Transfer& t);
void from_json(const Json& j, Transfer& t);
void to_json(Json& j, const Event& e);
void from_json(const Json& j, Event& e);

// The op arguments only; the op name travels separately.
Json operation_args(const Operation& op);
Operation operation_from(std::string_view name, const Json& args);

} // namespace trident
