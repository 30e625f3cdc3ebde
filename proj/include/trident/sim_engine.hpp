#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "trident/sharing_game.hpp"
#include "trident/tokens.hpp"

namespace trident {

enum class PolicyKind {
    Myopic,   // lexicographic expected-cost minimizer (default for both players)
    NeverBuy, // same defence rule, never trades
};

struct SimOptions {
    PerPlayer<PolicyKind> policy{PolicyKind::Myopic, PolicyKind::Myopic};
};

// One round, in fixed-width form. Costs are milli-tokens.
struct RoundRecord {
    std::uint32_t round = 0;
    PerPlayer<bool> buys{};
    PerPlayer<bool> defends{};
    AttackState attacks{};
    PerPlayer<Tokens> cost{};
};

// Game parameters converted to milli-tokens for exact accounting.
struct TokenParams {
    Tokens alpha, delta, s;
    PerPlayer<Tokens> price{};
    static TokenParams from(const GameParams& params);
};

struct Trace {
    GameParams params;
    std::uint64_t seed = 0;
    std::vector<RoundRecord> rounds;
    PerPlayer<Tokens> cumulative{};
};

// Plays `horizon` rounds. Each round: trade (from round 2 on), defence, then
// attacks sampled from the chain. Deterministic in (params, horizon, seed).
Trace simulate(const GameParams& params, std::uint64_t horizon, std::uint64_t seed,
               const SimOptions& options = {});

// Per-player cost components of a recorded round, recomputed from its flags.
PerPlayer<InstantCost> round_components(const Trace& trace, std::size_t index);

struct PlayerSummary {
    std::uint64_t purchases = 0;
    std::optional<MeanEstimate> purchase_gap; // gaps between consecutive purchases
    double mean_cost = 0.0;                   // tokens per round
    double defense_rate = 0.0;
    double attack_rate = 0.0;
};

struct TraceSummary {
    std::uint64_t rounds = 0;
    PerPlayer<PlayerSummary> player{};
    // Maximal runs of consecutive attacks on player 0, excluding a run cut by
    // the horizon. A run's length minus one is distributed like L_a.
    MeanEstimate attack_run;
};

TraceSummary trace_stats(const Trace& trace);

struct SweepRow {
    GameParams params;
    Regime regime = Regime::Conditional;
    std::uint64_t seed = 0;
    double purchases_per_1000 = 0.0; // both players combined
    std::optional<double> mean_pattern_gap; // player 0 purchase gap
    PerPlayer<double> mean_cost{};
};

// One independent simulate() run per grid point. The sub-seed depends on the
// root seed and the grid point's parameters, so duplicated points give
// identical rows.
std::vector<SweepRow> sweep(const std::vector<GameParams>& grid, std::uint64_t horizon,
                            std::uint64_t seed);

// CSV export. Floats are written with 6 significant digits.
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::uint64_t horizon,
                     std::uint64_t seed);
std::string format_g6(double x);

} // namespace trident
