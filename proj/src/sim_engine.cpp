#include "trident/sim_engine.hpp"

#include <cstdio>
#include <cstring>
#include <ostream>

namespace trident {

TokenParams TokenParams::from(const GameParams& params) {
    TokenParams t;
    t.alpha = Tokens::from_double(params.alpha);
    t.delta = Tokens::from_double(params.delta);
    t.s = Tokens::from_double(params.s);
    t.price = {Tokens::from_double(params.price[0]), Tokens::from_double(params.price[1])};
    return t;
}

namespace {

PerPlayer<Tokens> token_costs(const AttackState& prev, bool has_prev, const PerPlayer<bool>& buys,
                              const PerPlayer<bool>& defends, const AttackState& attacks,
                              const TokenParams& tp) {
    PerPlayer<Tokens> out{};
    for (int i = 0; i < 2; ++i) {
        const int other = 1 - i;
        Tokens c;
        if (has_prev) {
            if (prev.attacked(i) && buys[other]) c += tp.s - tp.price[i];
            if (prev.attacked(other) && buys[i]) c += tp.price[other];
        }
        if (defends[i]) {
            c += tp.delta;
        } else if (attacks.attacked(i)) {
            c += tp.alpha;
        }
        out[i] = c;
    }
    return out;
}

} // namespace

Trace simulate(const GameParams& params, std::uint64_t horizon, std::uint64_t seed,
               const SimOptions& options) {
    params.validate();
    if (horizon < 1) throw ParameterError("simulate requires horizon >= 1");
    if (horizon > UINT32_MAX) throw ParameterError("horizon exceeds 2^32 - 1 rounds");

    Trace trace;
    trace.params = params;
    trace.seed = seed;
    trace.rounds.reserve(horizon);

    const TokenParams tp = TokenParams::from(params);
    Rng rng = Rng(seed).split("sim_engine/attacks");
    PerPlayer<BeliefTracker> trackers{BeliefTracker(0, params), BeliefTracker(1, params)};

    AttackState prev{true, true}; // dummy start; never used for trade
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        RoundRecord rec;
        rec.round = static_cast<std::uint32_t>(n);
        PerPlayer<Decision> decision{};
        for (int i = 0; i < 2; ++i) {
            decision[i] = trackers[i].decide(n);
            if (options.policy[i] == PolicyKind::NeverBuy && decision[i].buy) {
                decision[i] = {false, weakly_leq(params.delta,
                                                 trackers[i].attack_probability() * params.alpha)
                                          ? DefendRule::Defend
                                          : DefendRule::DontDefend};
            }
            rec.buys[i] = n >= 2 && decision[i].buy;
        }
        for (int i = 0; i < 2; ++i) {
            std::optional<bool> bit;
            if (rec.buys[i]) {
                bit = prev.attacked(1 - i);
                trackers[i].learn_other(*bit);
            }
            rec.defends[i] = decision[i].defends(bit);
        }
        rec.attacks = n == 1 ? sample_initial(params.chain, rng)
                             : sample_next(prev, params.chain, rng);
        rec.cost = token_costs(prev, n >= 2, rec.buys, rec.defends, rec.attacks, tp);
        for (int i = 0; i < 2; ++i) {
            trackers[i].observe_own(rec.attacks.attacked(i));
            trace.cumulative[i] += rec.cost[i];
        }
        prev = rec.attacks;
        trace.rounds.push_back(rec);
    }
    return trace;
}

PerPlayer<InstantCost> round_components(const Trace& trace, std::size_t index) {
    const RoundRecord& r = trace.rounds.at(index);
    if (index == 0) {
        PerPlayer<InstantCost> out{};
        for (int i = 0; i < 2; ++i) {
            out[i].defend = defense_cost(r.defends[i], r.attacks.attacked(i), trace.params);
        }
        return out;
    }
    return instant_cost(trace.rounds[index - 1].attacks, r.buys, r.defends, r.attacks,
                        trace.params);
}

TraceSummary trace_stats(const Trace& trace) {
    if (trace.rounds.empty()) throw ParameterError("trace_stats requires a nonempty trace");
    TraceSummary sum;
    sum.rounds = trace.rounds.size();
    const double n = static_cast<double>(sum.rounds);

    for (int i = 0; i < 2; ++i) {
        PlayerSummary& ps = sum.player[i];
        std::vector<double> gaps;
        std::optional<std::uint32_t> last;
        std::uint64_t defends = 0, attacks = 0;
        for (const auto& r : trace.rounds) {
            if (r.buys[i]) {
                ++ps.purchases;
                if (last) gaps.push_back(static_cast<double>(r.round - *last));
                last = r.round;
            }
            defends += r.defends[i];
            attacks += r.attacks.attacked(i);
        }
        if (!gaps.empty()) ps.purchase_gap = batch_mean_estimate(gaps.data(), gaps.size());
        ps.mean_cost = trace.cumulative[i].to_double() / n;
        ps.defense_rate = static_cast<double>(defends) / n;
        ps.attack_rate = static_cast<double>(attacks) / n;
    }

    std::vector<double> runs;
    std::uint64_t run = 0;
    for (const auto& r : trace.rounds) {
        if (r.attacks.player0) {
            ++run;
        } else if (run > 0) {
            runs.push_back(static_cast<double>(run));
            run = 0;
        }
    }
    sum.attack_run = batch_mean_estimate(runs.data(), runs.size());
    return sum;
}

namespace {

std::uint64_t params_fingerprint(const GameParams& p) {
    const double fields[] = {p.chain.p, p.chain.q, p.alpha, p.delta, p.s, p.price[0], p.price[1]};
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (double f : fields) {
        std::uint64_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        h = splitmix64(h ^ bits);
    }
    return h;
}

} // namespace

std::vector<SweepRow> sweep(const std::vector<GameParams>& grid, std::uint64_t horizon,
                            std::uint64_t seed) {
    if (grid.empty()) throw ParameterError("sweep requires a nonempty grid");
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const auto& params : grid) {
        SweepRow row;
        row.params = params;
        row.regime = classify_regime(params);
        row.seed = derive_seed(seed, "sim_engine/sweep", params_fingerprint(params));
        const Trace trace = simulate(params, horizon, row.seed);
        const TraceSummary s = trace_stats(trace);
        row.purchases_per_1000 =
            1000.0 * static_cast<double>(s.player[0].purchases + s.player[1].purchases) /
            static_cast<double>(horizon);
        if (s.player[0].purchase_gap) row.mean_pattern_gap = s.player[0].purchase_gap->mean;
        row.mean_cost = {s.player[0].mean_cost, s.player[1].mean_cost};
        rows.push_back(row);
    }
    return rows;
}

std::string format_g6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

namespace {

void write_params_comment(std::ostream& out, const GameParams& p) {
    out << "# p=" << format_g6(p.chain.p) << " q=" << format_g6(p.chain.q)
        << " alpha=" << format_g6(p.alpha) << " delta=" << format_g6(p.delta)
        << " s=" << format_g6(p.s) << " price0=" << format_g6(p.price[0])
        << " price1=" << format_g6(p.price[1]) << '\n';
}

} // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "# seed=" << trace.seed << " rng=" << Rng::kAlgorithm << '\n';
    write_params_comment(out, trace.params);
    out << "round,buy0,buy1,def0,def1,atk0,atk1,cost0,cost1\n";
    for (const auto& r : trace.rounds) {
        out << r.round << ',' << r.buys[0] << ',' << r.buys[1] << ',' << r.defends[0] << ','
            << r.defends[1] << ',' << r.attacks.player0 << ',' << r.attacks.player1 << ','
            << format_g6(r.cost[0].to_double()) << ',' << format_g6(r.cost[1].to_double())
            << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::uint64_t horizon,
                     std::uint64_t seed) {
    out << "# seed=" << seed << " horizon=" << horizon << " rng=" << Rng::kAlgorithm << '\n';
    out << "p,q,alpha,delta,s,price0,price1,regime,seed,purchases_per_1000,mean_pattern_gap,"
           "mean_cost0,mean_cost1\n";
    for (const auto& r : rows) {
        const auto& p = r.params;
        out << format_g6(p.chain.p) << ',' << format_g6(p.chain.q) << ',' << format_g6(p.alpha)
            << ',' << format_g6(p.delta) << ',' << format_g6(p.s) << ',' << format_g6(p.price[0])
            << ',' << format_g6(p.price[1]) << ',' << to_string(r.regime) << ',' << r.seed << ','
            << format_g6(r.purchases_per_1000) << ','
            << (r.mean_pattern_gap ? format_g6(*r.mean_pattern_gap) : std::string("NA")) << ','
            << format_g6(r.mean_cost[0]) << ',' << format_g6(r.mean_cost[1]) << '\n';
    }
}

} // namespace trident
