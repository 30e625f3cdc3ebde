#include "trident/attacker_model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace trident {

void ChainParams::validate() const {
    if (!(std::isfinite(p) && std::isfinite(q))) {
        throw ParameterError("chain probabilities must be finite");
    }
    if (p < 0.0 || q > 1.0 || p > q) {
        throw ParameterError("chain probabilities must satisfy 0 <= p <= q <= 1 (p=" +
                             std::to_string(p) + ", q=" + std::to_string(q) + ")");
    }
}

TransitionMatrix transition_matrix(const ChainParams& params) {
    params.validate();
    TransitionMatrix m{};
    for (std::size_t from = 0; from < 4; ++from) {
        const double prob = params.attack_probability(AttackState::from_index(from));
        for (std::size_t to = 0; to < 4; ++to) {
            const AttackState next = AttackState::from_index(to);
            m[from][to] = (next.player0 ? prob : 1.0 - prob) * (next.player1 ? prob : 1.0 - prob);
        }
    }
    return m;
}

AttackState sample_initial(const ChainParams& params, Rng& rng) {
    const bool a0 = rng.bernoulli(params.q);
    const bool a1 = rng.bernoulli(params.q);
    return {a0, a1};
}

AttackState sample_next(const AttackState& prev, const ChainParams& params, Rng& rng) {
    const double prob = params.attack_probability(prev);
    const bool a0 = rng.bernoulli(prob);
    const bool a1 = rng.bernoulli(prob);
    return {a0, a1};
}

double p_prime(const ChainParams& params) {
    params.validate();
    return (1.0 - params.q) * params.p + params.q * params.q;
}

namespace {

// Expected truce length for player 0 starting from (¬a,¬a): the sum over l >= 1
// of the probability that player 0 stays unattacked for rounds 1..l. Transient
// states are (¬a,¬a) and (¬a,a); any state with player 0 attacked absorbs.
double truce_expectation(const ChainParams& c) {
    const double stay_p = 1.0 - c.p;
    const double stay_q = 1.0 - c.q;
    // Sub-stochastic transitions among {nn, na}.
    const double nn_nn = stay_p * stay_p, nn_na = stay_p * c.p;
    const double na_nn = stay_q * stay_q, na_na = stay_q * c.q;

    double v_nn = 1.0, v_na = 0.0;
    double total = 0.0;
    constexpr std::uint64_t kMaxTerms = 50'000'000;
    std::uint64_t terms = 0;
    double mass = 1.0;
    while (mass >= kTailMass && terms < kMaxTerms) {
        const double n_nn = v_nn * nn_nn + v_na * na_nn;
        const double n_na = v_nn * nn_na + v_na * na_na;
        v_nn = n_nn;
        v_na = n_na;
        mass = v_nn + v_na;
        total += mass;
        ++terms;
    }
    if (mass >= kTailMass) {
        // Remaining tail decays at the dominant eigenvalue of the 2x2 block.
        const double tr = nn_nn + na_na;
        const double det = nn_nn * na_na - nn_na * na_nn;
        const double rho = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
        total += mass * rho / (1.0 - rho);
    }
    return total;
}

} // namespace

RunExpectations exact_run_expectations(const ChainParams& params) {
    params.validate();
    if (params.q >= 1.0) {
        throw ParameterError("q = 1: attack runs never end, E(L_a) diverges");
    }
    if (params.p <= 0.0) {
        throw ParameterError("p = 0: truces from (¬a,¬a) never end, E(L_¬a) diverges");
    }
    if (!(params.p < params.q)) {
        throw ParameterError("run expectations require p < q");
    }
    RunExpectations out;
    out.attack_run = params.q / (1.0 - params.q);
    out.truce_run = truce_expectation(params);
    return out;
}

double truce_run_bound(const ChainParams& params) {
    params.validate();
    if (params.p <= 0.0) throw ParameterError("p = 0: the truce bound diverges");
    return params.q * (1.0 - params.p) / (params.p * params.p) + 1.0;
}

double pattern_gap_bound(const ChainParams& params) {
    params.validate();
    if (params.q >= 1.0) throw ParameterError("q = 1: the pattern-gap bound diverges");
    return 1.0 + 1.0 / (1.0 - params.q) + truce_run_bound(params);
}

std::array<double, 4> stationary_distribution(const ChainParams& params) {
    params.validate();
    if (params.p <= 0.0 && params.q >= 1.0) {
        throw ParameterError("chain with p = 0 and q = 1 is reducible");
    }
    const TransitionMatrix P = transition_matrix(params);
    // Solve π(P - I) = 0 with Σπ = 1, replacing the last balance equation.
    double A[4][5] = {};
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) A[j][i] = P[i][j] - (i == j ? 1.0 : 0.0);
    }
    for (int i = 0; i < 4; ++i) A[3][i] = 1.0;
    A[3][4] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::fabs(A[r][col]) > std::fabs(A[pivot][col])) pivot = r;
        }
        for (int c = 0; c < 5; ++c) std::swap(A[col][c], A[pivot][c]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < 5; ++c) A[r][c] -= f * A[col][c];
        }
    }
    std::array<double, 4> pi{};
    for (int i = 0; i < 4; ++i) pi[i] = A[i][4] / A[i][i];
    return pi;
}

double expected_pattern_gap(const ChainParams& params) {
    params.validate();
    if (params.p <= 0.0 || params.q >= 1.0) {
        throw ParameterError("pattern gap requires p > 0 and q < 1");
    }
    const auto pi = stationary_distribution(params);
    double attacked = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (AttackState::from_index(i).player0) attacked += pi[i];
    }
    return 1.0 / ((1.0 - params.q) * attacked);
}

MeanEstimate batch_mean_estimate(const double* values, std::size_t count, std::size_t batches) {
    MeanEstimate est;
    est.count = count;
    if (count == 0) return est;
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += values[i];
    est.mean = sum / static_cast<double>(count);
    if (count < 2) return est;

    if (count < 2 * batches) {
        double ss = 0.0;
        for (std::size_t i = 0; i < count; ++i) ss += (values[i] - est.mean) * (values[i] - est.mean);
        est.std_error = std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count));
        return est;
    }
    const std::size_t per = count / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += values[i];
        means[b] = s / static_cast<double>(per);
    }
    double bm = 0.0;
    for (double m : means) bm += m;
    bm /= static_cast<double>(batches);
    double ss = 0.0;
    for (double m : means) ss += (m - bm) * (m - bm);
    est.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
    return est;
}

namespace {

MeanEstimate iid_estimate(const std::vector<double>& xs) {
    MeanEstimate est;
    est.count = xs.size();
    if (xs.empty()) return est;
    double sum = 0.0;
    for (double x : xs) sum += x;
    est.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - est.mean) * (x - est.mean);
        est.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                                  static_cast<double>(xs.size()));
    }
    return est;
}

} // namespace

namespace {

// Length of player 0's attack run from the dummy start: rounds attacked
// before the first unattacked one. `censored` is set if the cap cut it off.
std::uint64_t sample_attack_run(const ChainParams& params, Rng& rng, std::uint64_t cap, bool& censored) {
    AttackState s = sample_initial(params, rng);
    std::uint64_t run = 0;
    for (std::uint64_t round = 1; round <= cap; ++round) {
        if (round > 1) s = sample_next(s, params, rng);
        if (!s.player0) {
            censored = false;
            return run;
        }
        ++run;
    }
    censored = true;
    return run;
}

// Unattacked rounds of player 0 from (¬a,¬a) before her first attack.
std::uint64_t sample_truce_run(const ChainParams& params, Rng& rng, std::uint64_t cap, bool& censored) {
    AttackState s = kNoAttack;
    std::uint64_t run = 0;
    for (std::uint64_t round = 1; round <= cap; ++round) {
        s = sample_next(s, params, rng);
        if (s.player0) {
            censored = false;
            return run;
        }
        ++run;
    }
    censored = true;
    return run;
}

} // namespace

RunStats run_length_statistics(const ChainParams& params, std::uint64_t trials, std::uint64_t seed,
                               std::uint64_t cap) {
    params.validate();
    if (trials < 1) throw ParameterError("run_length_statistics requires at least one trial");
    if (cap < 1) throw ParameterError("run_length_statistics requires cap >= 1");

    RunStats stats;
    stats.trial_count = trials;
    stats.horizon = cap;
    stats.seed = seed;
    const Rng root(seed);
    std::vector<double> attack_runs, truce_runs;
    attack_runs.reserve(trials);
    truce_runs.reserve(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
        bool censored = false;
        Rng arng = root.split("attacker_model/attack-run", t);
        attack_runs.push_back(static_cast<double>(sample_attack_run(params, arng, cap, censored)));
        if (censored) ++stats.censored_runs;
        Rng trng = root.split("attacker_model/truce", t);
        truce_runs.push_back(static_cast<double>(sample_truce_run(params, trng, cap, censored)));
        if (censored) ++stats.censored_runs;
    }
    stats.attack_run = iid_estimate(attack_runs);
    stats.truce_run = iid_estimate(truce_runs);
    return stats;
}

RunStats pattern_statistics(const ChainParams& params, std::uint64_t horizon,
                            std::uint64_t trials, std::uint64_t seed) {
    params.validate();
    if (horizon < 1000) throw ParameterError("pattern_statistics requires horizon >= 1000");
    if (trials < 1) throw ParameterError("pattern_statistics requires at least one trial");

    RunStats stats;
    stats.trial_count = trials;
    stats.horizon = horizon;
    stats.seed = seed;

    const Rng root(seed);
    std::vector<double> attack_runs, truce_runs, gaps;
    attack_runs.reserve(trials);
    truce_runs.reserve(trials);

    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng = root.split("attacker_model/trajectory", t);

        // Main trajectory from the dummy start.
        AttackState state = sample_initial(params, rng);
        std::uint64_t attack_run = 0;
        bool in_initial_run = state.player0;
        if (in_initial_run) attack_run = 1;
        std::optional<std::uint64_t> last_pattern;
        bool prev_attacked = state.player0;
        for (std::uint64_t round = 2; round <= horizon; ++round) {
            state = sample_next(state, params, rng);
            if (in_initial_run) {
                if (state.player0) {
                    ++attack_run;
                } else {
                    in_initial_run = false;
                }
            }
            if (prev_attacked && !state.player0) {
                ++stats.pattern_count;
                if (last_pattern) gaps.push_back(static_cast<double>(round - *last_pattern));
                last_pattern = round;
            }
            prev_attacked = state.player0;
        }
        if (in_initial_run) ++stats.censored_runs;
        attack_runs.push_back(static_cast<double>(attack_run));

        // Truce run from (¬a,¬a), on its own sub-stream.
        Rng truce_rng = root.split("attacker_model/truce", t);
        bool censored = false;
        truce_runs.push_back(static_cast<double>(sample_truce_run(params, truce_rng, horizon, censored)));
        if (censored) ++stats.censored_runs;
    }

    stats.attack_run = iid_estimate(attack_runs);
    stats.truce_run = iid_estimate(truce_runs);
    if (!gaps.empty()) stats.pattern_gap = batch_mean_estimate(gaps.data(), gaps.size());
    return stats;
}

} // namespace trident
