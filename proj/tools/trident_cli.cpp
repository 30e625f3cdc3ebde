// trident: simulations, sweeps, marketplace scripts, trust scores and the
// streaming demo. Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "trident/command_log.hpp"
#include "trident/scenario.hpp"
#include "trident/sim_engine.hpp"
#include "trident/stream_net.hpp"
#include "trident/trust_engine.hpp"

using namespace trident;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

struct SimulateArgs {
    double p = 0, q = 0, alpha = 0, delta = 0, s = 0;
    std::string price = "opt";
    std::uint64_t horizon = 1'000'000;
    std::uint64_t seed = 1;
    std::string csv;
};

int cmd_simulate(const SimulateArgs& a) {
    GameParams gp;
    gp.chain = {a.p, a.q};
    gp.alpha = a.alpha;
    gp.delta = a.delta;
    gp.s = a.s;
    try {
        gp.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const Regime regime = classify_regime(gp);
    std::optional<double> opt;
    if (regime == Regime::Conditional) opt = optimal_price(gp);

    double price = 0.0;
    try {
        price = resolve_price(a.price, gp);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    gp.price = {price, price};

    const Trace trace = simulate(gp, a.horizon, a.seed);
    if (!a.csv.empty()) {
        if (a.csv == "-") {
            write_trace_csv(std::cout, trace);
        } else {
            std::ofstream f(a.csv);
            if (!f) throw std::runtime_error("cannot write " + a.csv);
            write_trace_csv(f, trace);
        }
    }
    std::ostream& out = a.csv == "-" ? std::cerr : std::cout;
    const TraceSummary sum = trace_stats(trace);
    out << "regime " << to_string(regime) << '\n';
    out << "optimal price " << (opt ? fmt(*opt) : std::string("n/a (no purchases outside Conditional)")) << '\n';
    out << "price " << fmt(price) << '\n';
    out << "rounds " << a.horizon << " seed " << a.seed << " rng " << Rng::kAlgorithm << '\n';
    for (int i = 0; i < 2; ++i) {
        const auto& ps = sum.player[i];
        out << "player" << i << " purchases " << ps.purchases << " defense_rate " << fmt(ps.defense_rate)
            << " mean_cost " << fmt(ps.mean_cost) << '\n';
    }
    if (const auto& g = sum.player[0].purchase_gap) {
        out << "mean purchase gap " << fmt(g->mean) << " (se " << fmt(g->std_error) << ", n " << g->count << ")";
        if (gp.chain.p > 0.0 && gp.chain.q < 1.0) {
            out << " bound " << fmt(pattern_gap_bound(gp.chain)) << " exact "
                << fmt(expected_pattern_gap(gp.chain));
        }
        out << '\n';
    } else {
        out << "mean purchase gap NA\n";
    }
    return kExitOk;
}

struct SweepArgs {
    std::string grid;
    std::uint64_t horizon = 100'000;
    std::uint64_t seed = 1;
    std::string out = "-";
};

int cmd_sweep(const SweepArgs& a) {
    std::ifstream in(a.grid);
    if (!in) throw UsageError("cannot read grid file " + a.grid);
    std::vector<GameParams> grid;
    try {
        grid = parse_grid(in);
    } catch (const GridError& e) {
        throw UsageError(e.what());
    }
    if (grid.empty()) throw UsageError("grid file has no points");
    const auto rows = sweep(grid, a.horizon, a.seed);
    if (a.out == "-") {
        write_sweep_csv(std::cout, rows, a.horizon, a.seed);
    } else {
        std::ofstream f(a.out);
        if (!f) throw std::runtime_error("cannot write " + a.out);
        write_sweep_csv(f, rows, a.horizon, a.seed);
    }
    return kExitOk;
}

struct MarketArgs {
    std::string script;
    std::string log;
};

int cmd_market(const MarketArgs& a) {
    std::ifstream in(a.script);
    if (!in) throw UsageError("cannot read script " + a.script);
    ScenarioScript sc;
    try {
        sc = parse_script(in);
    } catch (const ScriptError& e) {
        throw UsageError(e.what());
    }
    ScenarioResult res = run_script(sc, std::cout);

    std::stringstream log;
    write_log(log, res.market);
    if (!a.log.empty()) {
        std::ofstream f(a.log);
        if (!f) throw std::runtime_error("cannot write " + a.log);
        f << log.str();
    }
    const Market replayed = replay_log(log);
    const bool same = replayed.state() == res.market.state();
    std::cout << "replay: " << (same ? "identical" : "DIFFERS") << '\n';
    std::cout << "applied " << res.applied << ", rejected " << res.rejected << '\n';

    if (!res.failed_expectations.empty()) {
        for (const auto& f : res.failed_expectations) std::cerr << "market: " << f << '\n';
        return kExitRuntime;
    }
    return res.conserved && same ? kExitOk : kExitRuntime;
}

struct TrustArgs {
    std::uint64_t positive = 0, negative = 0;
    std::string burned = "1";
    std::string baseline = "1";
    std::uint64_t threshold = 14;
    bool derived = false;
    double z = 0.2, c = 0.8, w = 1.0;
};

int cmd_trust(const TrustArgs& a) {
    TrustConfig cfg;
    Tokens burned;
    try {
        burned = Tokens::parse(a.burned);
        cfg.burn_baseline = Tokens::parse(a.baseline);
        cfg.mode = a.derived ? ThresholdMode::Derived : ThresholdMode::Fixed;
        cfg.fixed_threshold = a.threshold;
        cfg.z = a.z;
        cfg.c = a.c;
        cfg.w = a.w;
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const TrustScore ts = score({a.positive, a.negative}, burned, cfg);
    std::cout << "r " << a.positive << " s " << a.negative << " burned " << burned.to_string() << '\n';
    std::cout << "N " << ts.threshold << (a.derived ? " (derived)" : " (fixed)") << '\n';
    std::cout << "t " << fmt(ts.t, "%.6f") << '\n';
    std::cout << "c_e " << fmt(ts.c_e, "%.6f") << '\n';
    std::cout << "f " << fmt(ts.f, "%.6f") << '\n';
    std::cout << "E " << fmt(ts.E, "%.6f") << '\n';
    return kExitOk;
}

struct DemoArgs {
    std::string role = "both";
    std::string fault = "none";
    std::uint64_t fault_index = 50;
    std::uint64_t batches = 100;
    std::size_t batch_size = kDefaultBatchSize;
    std::size_t buyers = 2;
    std::size_t index = 0;
    std::uint64_t seed = 1;
    std::uint16_t port = 0;
    std::string endpoint;
};

int cmd_stream_demo(const DemoArgs& a) {
    DemoConfig cfg;
    const auto fault = parse_stream_fault(a.fault);
    if (!fault) throw UsageError("--fault must be none, fork-at-k or bad-signature");
    cfg.fault = *fault;
    cfg.fault_index = a.fault_index;
    cfg.batches = a.batches;
    cfg.batch_size = a.batch_size;
    cfg.buyers = a.buyers;
    cfg.seed = a.seed;

    try {
        if (a.role == "both") {
            const DemoReport r = run_stream_demo(cfg, std::cout);
            return r.conserved ? kExitOk : kExitRuntime;
        }
        if (a.role == "seller") {
            if (a.port == 0) throw UsageError("--role seller needs --port");
            Listener listener("127.0.0.1", a.port);
            const DemoWorld world = build_demo_world(cfg, {"127.0.0.1", a.port});
            run_demo_seller(world, std::move(listener), cfg.buyers, std::cout);
            return kExitOk;
        }
        if (a.role == "buyer") {
            if (a.endpoint.empty()) throw UsageError("--role buyer needs --endpoint host:port");
            if (a.index >= cfg.buyers) throw UsageError("--index must be below --buyers");
            const DemoWorld world = build_demo_world(cfg, Endpoint::parse(a.endpoint));
            Consumer consumer(world.deposit, world.keys.at(world.seller).signing.verify);
            std::string error;
            const BuyerReport r = run_demo_buyer(world, a.index, consumer, &error);
            std::cout << r.buyer << ": handshake " << (r.handshake_accepted ? "accepted" : "rejected")
                      << ", verified " << r.verified << "/" << cfg.batches;
            if (r.failure) std::cout << ", " << to_string(*r.failure) << " at index " << *r.failure_index;
            std::cout << '\n';
            if (!error.empty()) throw std::runtime_error(error);
            if (consumer.next_index() > 0) {
                const SignedHead* last = consumer.held(consumer.next_index() - 1);
                std::cout << "last head index " << last->index << " hash " << to_hex(last->chain_hash) << '\n';
            }
            return kExitOk;
        }
    } catch (const StreamNetError& e) {
        throw std::runtime_error(a.role + " role: " + e.what());
    } catch (const WireError& e) {
        throw std::runtime_error(a.role + " role: " + e.what());
    }
    throw UsageError("--role must be seller, buyer or both");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trident: information-sharing game, marketplace and alert streaming"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "simulate the two-player sharing game");
    s->add_option("--p", sim.p, "attack probability after a quiet round")->required();
    s->add_option("--q", sim.q, "attack probability after an attack")->required();
    s->add_option("--alpha", sim.alpha, "cost of an undefended attack")->required();
    s->add_option("--delta", sim.delta, "cost of defending")->required();
    s->add_option("--s", sim.s, "disclosure cost")->required();
    s->add_option("--price", sim.price, "selling price: 'opt' or a number")->capture_default_str();
    s->add_option("--horizon", sim.horizon, "rounds")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
    s->add_option("--csv", sim.csv, "write the per-round trace CSV here ('-' for stdout)");

    SweepArgs sw;
    auto* g = app.add_subcommand("sweep", "simulate every point of a parameter grid");
    g->add_option("--grid", sw.grid, "grid file: p q alpha delta s price0 price1 per line")->required();
    g->add_option("--horizon", sw.horizon, "rounds per point")->capture_default_str()->check(CLI::PositiveNumber);
    g->add_option("--seed", sw.seed, "RNG seed")->capture_default_str();
    g->add_option("--out", sw.out, "CSV output ('-' for stdout)")->capture_default_str();

    MarketArgs mk;
    auto* m = app.add_subcommand("market", "run a marketplace script");
    m->add_option("script", mk.script, "script file")->required();
    m->add_option("--log", mk.log, "write the command log here");

    TrustArgs tr;
    auto* t = app.add_subcommand("trust", "compute a trust score");
    t->add_option("--positive,-r", tr.positive, "positive ratings")->capture_default_str();
    t->add_option("--negative,-s", tr.negative, "negative ratings")->capture_default_str();
    t->add_option("--burned", tr.burned, "tokens burned at registration")->capture_default_str();
    t->add_option("--baseline", tr.baseline, "burn that yields prior 0.5")->capture_default_str();
    t->add_option("--threshold,-N", tr.threshold, "fixed evidence threshold")->capture_default_str();
    t->add_flag("--derived", tr.derived, "derive N from --z and --c at the point estimate");
    t->add_option("--z", tr.z, "significance level")->capture_default_str();
    t->add_option("--c", tr.c, "certainty level (interval length 1-c)")->capture_default_str();
    t->add_option("--w", tr.w, "normalizing value")->capture_default_str();

    DemoArgs dm;
    auto* d = app.add_subcommand("stream-demo", "stream signed alert batches over loopback");
    d->add_option("--role", dm.role, "seller, buyer or both")->capture_default_str();
    d->add_option("--fault", dm.fault, "none, fork-at-k or bad-signature")->capture_default_str();
    d->add_option("--fault-index,-k", dm.fault_index, "batch index of the fault")->capture_default_str();
    d->add_option("--batches", dm.batches, "batches to stream")->capture_default_str()->check(CLI::PositiveNumber);
    d->add_option("--batch-size", dm.batch_size, "alerts per batch")->capture_default_str()->check(CLI::PositiveNumber);
    d->add_option("--buyers", dm.buyers, "number of subscribers")->capture_default_str()->check(CLI::PositiveNumber);
    d->add_option("--index", dm.index, "buyer index (buyer role)")->capture_default_str();
    d->add_option("--seed", dm.seed, "seed for keys and alerts")->capture_default_str();
    d->add_option("--port", dm.port, "listening port (seller role)");
    d->add_option("--endpoint", dm.endpoint, "seller host:port (buyer role)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*s) return cmd_simulate(sim);
        if (*g) return cmd_sweep(sw);
        if (*m) return cmd_market(mk);
        if (*t) return cmd_trust(tr);
        if (*d) return cmd_stream_demo(dm);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
