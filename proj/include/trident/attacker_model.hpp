#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "trident/rng.hpp"

namespace trident {

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Joint attack outcome of one round for the two defenders.
struct AttackState {
    bool player0 = false;
    bool player1 = false;

    // Matrix order: (¬a,¬a), (a,¬a), (¬a,a), (a,a).
    constexpr std::size_t index() const {
        return static_cast<std::size_t>(player0) + 2 * static_cast<std::size_t>(player1);
    }
    static constexpr AttackState from_index(std::size_t i) { return {(i & 1) != 0, (i & 2) != 0}; }
    constexpr bool attacked(int player) const { return player == 0 ? player0 : player1; }
    constexpr bool anyone() const { return player0 || player1; }

    constexpr bool operator==(const AttackState&) const = default;
};

inline constexpr AttackState kNoAttack{false, false};

struct ChainParams {
    double p = 0.0; // per-player attack probability after a round with no attacks
    double q = 0.0; // per-player attack probability after a round with some attack

    // Requires 0 <= p <= q <= 1. Equality is admitted so the degenerate i.i.d.
    // chain (p == q) can be expressed; callers needing p < q check it.
    void validate() const;

    // Attack probability for the next round given the previous joint state.
    double attack_probability(const AttackState& prev) const { return prev.anyone() ? q : p; }
};

using TransitionMatrix = std::array<std::array<double, 4>, 4>;

TransitionMatrix transition_matrix(const ChainParams& params);

// The dummy state before round 1 counts as "someone attacked", so round 1 uses q.
AttackState sample_initial(const ChainParams& params, Rng& rng);
AttackState sample_next(const AttackState& prev, const ChainParams& params, Rng& rng);

// Probability that a player is attacked two rounds after being attacked,
// given she was not attacked in between: (1-q)p + q^2.
double p_prime(const ChainParams& params);

struct RunExpectations {
    double attack_run = 0.0; // E(L_a) = q/(1-q)
    double truce_run = 0.0;  // E(L_¬a), numerically on the joint chain
};

// Requires 0 < p < q < 1.
RunExpectations exact_run_expectations(const ChainParams& params);

// Upper bound on E(L_¬a): q(1-p)/p² + 1.
double truce_run_bound(const ChainParams& params);

// Upper bound on the mean gap between special patterns:
// 2 + 1/(1-q) + q(1-p)/p².
double pattern_gap_bound(const ChainParams& params);

// Long-run distribution over the four joint states (index order).
std::array<double, 4> stationary_distribution(const ChainParams& params);

// Mean recurrence time of player 0's special pattern, 1 / ((1-q)·π(a)).
// Requires 0 < p and q < 1.
double expected_pattern_gap(const ChainParams& params);

// Tail mass at which the infinite sums are truncated.
inline constexpr double kTailMass = 1e-12;

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t count = 0;
};

struct RunStats {
    MeanEstimate attack_run;                 // L_a from the dummy start, one per trial
    MeanEstimate truce_run;                  // L_¬a from (¬a,¬a), one per trial
    std::optional<MeanEstimate> pattern_gap; // empty when no two patterns were seen
    std::uint64_t pattern_count = 0;
    std::uint64_t censored_runs = 0;         // runs cut off by the horizon
    std::uint64_t trial_count = 0;
    std::uint64_t horizon = 0;
    std::uint64_t seed = 0;
};

// Monte Carlo over `trials` independent trajectories of `horizon` rounds.
// The special pattern is player 0 attacked at round n and not at round n+1;
// gaps are measured between consecutive occurrences within a trajectory.
RunStats pattern_statistics(const ChainParams& params, std::uint64_t horizon,
                            std::uint64_t trials, std::uint64_t seed);

// Run lengths only: `trials` independent attack runs (from the dummy start)
// and truce runs (from (¬a,¬a)), each sampled until it ends or hits `cap`.
RunStats run_length_statistics(const ChainParams& params, std::uint64_t trials, std::uint64_t seed,
                               std::uint64_t cap = 1'000'000);

// Standard error from batch means, which tolerates the weak serial
// correlation between consecutive gaps of one trajectory.
MeanEstimate batch_mean_estimate(const double* values, std::size_t count,
                                 std::size_t batches = 32);

} // namespace trident
