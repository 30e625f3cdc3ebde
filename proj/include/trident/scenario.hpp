#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trident/marketplace.hpp"
#include "trident/sharing_game.hpp"
#include "trident/trust_engine.hpp"

namespace trident {

// Market scripts are line-oriented; `#` starts a comment.
//
//   seed 42
//   config rate_deadline=10000 reclaim_delay=1000 burn_baseline=1 threshold=14
//   mint alice 100
//   register alice 1
//   advertise bob throughput=10 price=1 detector=IDS network=industrial attacks=DDoS,botnet as ad
//   mk_offer alice ad 5 1 as off
//   acc_offer bob off endpoint=127.0.0.1:9000 as sub
//   rate alice sub 0.9 => ok
//   rm_advert carol ad => reject unauthorized
//
// `as NAME` binds the created object id; `=> ok|reject [code]` is an
// expectation checked when the step runs. Keys are derived from the seed
// and the party name.
class ScriptError : public std::runtime_error {
public:
    ScriptError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct Expectation {
    bool ok = true;
    std::optional<RejectCode> code;
};

struct ScriptStep {
    std::size_t line = 0;
    std::string text;
    std::string op;
    std::vector<std::string> args;
    std::optional<std::string> label;
    std::optional<Expectation> expect;
};

struct ScenarioScript {
    std::uint64_t seed = 1;
    MarketConfig market;
    TrustConfig trust;
    std::vector<ScriptStep> steps;
};

ScenarioScript parse_script(std::istream& in); // throws ScriptError

struct ScenarioResult {
    Market market;
    std::size_t applied = 0;
    std::size_t rejected = 0;
    std::vector<std::string> failed_expectations;
    bool conserved = false;
};

// Runs every step, printing events and rejections, then the final state and
// trust table. Unresolvable references raise ScriptError naming the line.
ScenarioResult run_script(const ScenarioScript& script, std::ostream& out);

std::optional<RejectCode> parse_reject_code(std::string_view s);

// Sweep grids: one point per line, `p q alpha delta s price0 price1`, where a
// price may be `opt` (the optimal price, or 0 outside the Conditional regime).
class GridError : public std::runtime_error {
public:
    GridError(std::size_t line, const std::string& what)
        : std::runtime_error("grid line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

std::vector<GameParams> parse_grid(std::istream& in);

// Resolves a `--price`/grid price token against the other parameters.
double resolve_price(std::string_view token, const GameParams& params);

} // namespace trident
