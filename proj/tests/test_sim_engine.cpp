#include <catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "trident/sim_engine.hpp"

using namespace trident;
using Catch::Approx;

namespace {

GameParams canonical(double price = 1.0) {
    GameParams gp;
    gp.chain = {0.05, 0.6};
    gp.alpha = 10.0;
    gp.delta = 2.0;
    gp.s = 0.2;
    gp.price = {price, price};
    return gp;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_CASE("simulation is deterministic in the seed") {
    const auto a = simulate(canonical(), 5000, 17);
    const auto b = simulate(canonical(), 5000, 17);
    const auto c = simulate(canonical(), 5000, 18);
    REQUIRE(a.rounds.size() == 5000);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.rounds.size(); ++i) {
        same = same && a.rounds[i].attacks == b.rounds[i].attacks && a.rounds[i].buys == b.rounds[i].buys;
        differs = differs || !(a.rounds[i].attacks == c.rounds[i].attacks);
    }
    CHECK(same);
    CHECK(differs);
    CHECK(a.cumulative == b.cumulative);
}

TEST_CASE("no trade in round 1 and costs reconcile exactly") {
    const auto t = simulate(canonical(), 20000, 5);
    CHECK_FALSE(t.rounds[0].buys[0]);
    CHECK_FALSE(t.rounds[0].buys[1]);
    PerPlayer<Tokens> sum{};
    for (std::size_t i = 0; i < t.rounds.size(); ++i) {
        const auto& r = t.rounds[i];
        for (int p = 0; p < 2; ++p) sum[p] += r.cost[p];
        if (i > 0) {
            const auto comps = round_components(t, i);
            for (int p = 0; p < 2; ++p) REQUIRE(r.cost[p].to_double() == Approx(comps[p].total()).margin(1e-9));
        }
    }
    CHECK(sum == t.cumulative);
}

TEST_CASE("purchases only follow the special pattern") {
    const auto t = simulate(canonical(), 50000, 9);
    std::uint64_t buys = 0;
    for (std::size_t i = 2; i < t.rounds.size(); ++i) {
        for (int p = 0; p < 2; ++p) {
            if (!t.rounds[i].buys[p]) continue;
            ++buys;
            REQUIRE(t.rounds[i - 2].attacks.attacked(p));
            REQUIRE_FALSE(t.rounds[i - 1].attacks.attacked(p));
        }
    }
    CHECK(buys > 0);
}

TEST_CASE("never-buy policy leaves the defence rule in place") {
    SimOptions opts;
    opts.policy = {PolicyKind::NeverBuy, PolicyKind::NeverBuy};
    const auto t = simulate(canonical(), 10000, 9, opts);
    const auto s = trace_stats(t);
    CHECK(s.player[0].purchases == 0);
    CHECK(s.player[1].purchases == 0);
    CHECK(s.player[0].defense_rate > 0.0);
}

TEST_CASE("overpriced information is never bought") {
    const auto s = trace_stats(simulate(canonical(1.01), 50000, 4));
    CHECK(s.player[0].purchases + s.player[1].purchases == 0);
}

TEST_CASE("summary matches the exact pattern gap at moderate horizon") {
    const auto s = trace_stats(simulate(canonical(), 200000, 23));
    REQUIRE(s.player[0].purchase_gap);
    const auto& g = *s.player[0].purchase_gap;
    CHECK(g.mean == Approx(oracle::pattern_gap_exact(0.05, 0.6)).margin(4 * g.std_error));
    CHECK(s.rounds == 200000);
    CHECK(s.attack_run.mean == Approx(1.0 / (1 - 0.6)).margin(4 * s.attack_run.std_error + 1e-9));
}

TEST_CASE("trace CSV layout") {
    std::ostringstream out;
    write_trace_csv(out, simulate(canonical(), 100, 1));
    const std::string text = out.str();
    CHECK(text.rfind("# seed=1 rng=mt19937_64/splitmix64-v1\n", 0) == 0);
    CHECK(text.find("round,buy0,buy1,def0,def1,atk0,atk1,cost0,cost1\n") != std::string::npos);
    CHECK(count_lines(text) == 103);
}

TEST_CASE("sweep rows are reproducible per grid point") {
    std::vector<GameParams> grid{canonical(), canonical(0.5), canonical()};
    auto dear = canonical();
    dear.delta = 0.3;
    grid.push_back(dear);
    const auto rows = sweep(grid, 20000, 3);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].purchases_per_1000 == rows[2].purchases_per_1000);
    CHECK(rows[0].mean_pattern_gap == rows[2].mean_pattern_gap);
    CHECK(rows[0].seed == rows[2].seed);
    CHECK(rows[3].regime == Regime::AlwaysDefend);
    CHECK(rows[3].purchases_per_1000 == 0.0);
    CHECK_FALSE(rows[3].mean_pattern_gap);

    std::ostringstream out;
    write_sweep_csv(out, rows, 20000, 3);
    CHECK(count_lines(out.str()) == 6);
    CHECK(out.str().find("AlwaysDefend") != std::string::npos);
}

TEST_CASE("six significant digits") {
    CHECK(format_g6(1.0) == "1");
    CHECK(format_g6(232.5) == "232.5");
    CHECK(format_g6(1.0 / 3) == "0.333333");
}
