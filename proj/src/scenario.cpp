#include "trident/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "trident/stream_net.hpp"

namespace trident {

std::optional<RejectCode> parse_reject_code(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(RejectCode::InvalidProof); ++i) {
        const auto c = static_cast<RejectCode>(i);
        if (s == to_string(c)) return c;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::pair<std::string, std::string> split_kv(const std::string& tok, std::size_t line) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw ScriptError(line, "expected key=value, got '" + tok + "'");
    return {tok.substr(0, eq), tok.substr(eq + 1)};
}

Tokens tokens_arg(const std::string& s, std::size_t line) {
    try {
        return Tokens::parse(s);
    } catch (const std::invalid_argument& e) {
        throw ScriptError(line, e.what());
    }
}

std::uint64_t u64_arg(const std::string& s, std::size_t line, const char* what) {
    auto v = parse_number<std::uint64_t>(s);
    if (!v) throw ScriptError(line, std::string("bad ") + what + " '" + s + "'");
    return *v;
}

void apply_config(ScenarioScript& sc, const std::vector<std::string>& toks, std::size_t line) {
    for (std::size_t i = 1; i < toks.size(); ++i) {
        const auto [k, v] = split_kv(toks[i], line);
        if (k == "rate_deadline") sc.market.rate_deadline = u64_arg(v, line, k.c_str());
        else if (k == "reclaim_delay") sc.market.reclaim_delay = u64_arg(v, line, k.c_str());
        else if (k == "burn_baseline") sc.market.burn_baseline = tokens_arg(v, line);
        else if (k == "threshold") sc.trust.fixed_threshold = u64_arg(v, line, k.c_str());
        else if (k == "threshold_mode") {
            if (v == "fixed") sc.trust.mode = ThresholdMode::Fixed;
            else if (v == "derived") sc.trust.mode = ThresholdMode::Derived;
            else throw ScriptError(line, "threshold_mode must be fixed or derived");
        } else if (k == "w" || k == "z" || k == "c") {
            auto d = parse_double(v);
            if (!d) throw ScriptError(line, "bad number for " + k);
            (k == "w" ? sc.trust.w : k == "z" ? sc.trust.z : sc.trust.c) = *d;
        } else {
            throw ScriptError(line, "unknown config key '" + k + "'");
        }
    }
    try {
        sc.market.validate();
        sc.trust.burn_baseline = sc.market.burn_baseline;
        sc.trust.validate();
    } catch (const std::invalid_argument& e) {
        throw ScriptError(line, e.what());
    }
}

// Minimum and maximum argument counts after the command word.
const std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> kArity = {
    {"mint", {2, 2}},        {"tick", {1, 1}},        {"register", {2, 2}},
    {"advertise", {1, 6}},   {"rm_advert", {2, 2}},   {"mk_offer", {4, 4}},
    {"del_offer", {2, 2}},   {"acc_offer", {2, 3}},   {"unsubscribe", {2, 2}},
    {"rate", {3, 3}},        {"post_deposit", {3, 3}}, {"reclaim", {2, 2}},
};

} // namespace

ScenarioScript parse_script(std::istream& in) {
    ScenarioScript sc;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw.substr(0, raw.find('#'));
        auto toks = split_ws(line);
        if (toks.empty()) continue;

        if (toks[0] == "seed") {
            if (toks.size() != 2) throw ScriptError(lineno, "usage: seed N");
            sc.seed = u64_arg(toks[1], lineno, "seed");
            continue;
        }
        if (toks[0] == "config") {
            apply_config(sc, toks, lineno);
            continue;
        }

        ScriptStep step;
        step.line = lineno;
        step.op = toks[0];
        auto arrow = std::find(toks.begin(), toks.end(), "=>");
        if (arrow != toks.end()) {
            Expectation ex;
            const std::size_t rest = static_cast<std::size_t>(toks.end() - arrow) - 1;
            if (rest == 1 && arrow[1] == "ok") {
                ex.ok = true;
            } else if ((rest == 1 || rest == 2) && arrow[1] == "reject") {
                ex.ok = false;
                if (rest == 2) {
                    ex.code = parse_reject_code(arrow[2]);
                    if (!ex.code) throw ScriptError(lineno, "unknown rejection code '" + arrow[2] + "'");
                }
            } else {
                throw ScriptError(lineno, "expectation must be '=> ok' or '=> reject [code]'");
            }
            step.expect = ex;
            toks.erase(arrow, toks.end());
        }
        if (toks.size() >= 3 && toks[toks.size() - 2] == "as") {
            step.label = toks.back();
            toks.resize(toks.size() - 2);
        }
        const auto ar = kArity.find(step.op);
        if (ar == kArity.end()) throw ScriptError(lineno, "unknown command '" + step.op + "'");
        step.args.assign(toks.begin() + 1, toks.end());
        if (step.args.size() < ar->second.first || step.args.size() > ar->second.second) {
            throw ScriptError(lineno, "wrong number of arguments for '" + step.op + "'");
        }
        step.text = line.substr(0, line.find_last_not_of(" \t\r") + 1);
        sc.steps.push_back(std::move(step));
    }
    return sc;
}

namespace {

class Runner {
public:
    Runner(const ScenarioScript& sc, std::ostream& out) : sc_(sc), out_(out), market_(sc.market) {}

    ScenarioResult run() {
        ScenarioResult res{Market(sc_.market), 0, 0, {}, false};
        std::size_t index = 0;
        for (const auto& step : sc_.steps) {
            ++index;
            const Command command = build(step);
            const Outcome o = market_.apply(command);
            out_ << "step " << index << " (line " << step.line << "): " << step.text << "\n  ";
            if (const auto* ev = std::get_if<Event>(&o)) {
                ++res.applied;
                out_ << "-> " << ev->kind;
                if (ev->object) out_ << " #" << ev->object;
                for (const auto& t : ev->transfers) {
                    out_ << " [" << t.amount.to_string() << " " << t.from << " -> " << t.to << "]";
                }
                for (const auto& f : ev->flags) out_ << " {" << f << "}";
                out_ << '\n';
                if (step.label) labels_[*step.label] = ev->object;
            } else {
                const auto& rej = std::get<Rejection>(o);
                ++res.rejected;
                out_ << "-> REJECTED " << to_string(rej.code) << ": " << rej.message << '\n';
            }
            if (step.expect) {
                const bool ok = accepted(o);
                bool match = ok == step.expect->ok;
                if (match && !ok && step.expect->code) match = std::get<Rejection>(o).code == *step.expect->code;
                if (!match) {
                    const std::string msg = "step " + std::to_string(index) + " (line " +
                                            std::to_string(step.line) + "): expectation not met";
                    out_ << "  !! " << msg << '\n';
                    res.failed_expectations.push_back(msg);
                }
            }
        }
        dump();
        res.conserved = market_.state().conserved() && market_.state().escrow_consistent();
        out_ << "conservation: " << (res.conserved ? "ok" : "VIOLATED") << '\n';
        res.market = std::move(market_);
        return res;
    }

private:
    ObjectId ref(const std::string& tok, std::size_t line) const {
        if (auto it = labels_.find(tok); it != labels_.end()) return it->second;
        if (auto v = parse_number<ObjectId>(tok)) return *v;
        throw ScriptError(line, "unknown reference '" + tok + "'");
    }

    const PartyKeys& keys(const PartyId& id) {
        auto it = keys_.find(id);
        if (it == keys_.end()) it = keys_.emplace(id, PartyKeys::derive(sc_.seed, id)).first;
        return it->second;
    }

    Command build(const ScriptStep& s) {
        const auto& a = s.args;
        const std::size_t L = s.line;
        const PartyId system(kSystemCaller);
        if (s.op == "mint") return {system, cmd::Mint{a[0], tokens_arg(a[1], L)}};
        if (s.op == "tick") return {system, cmd::Tick{u64_arg(a[0], L, "steps")}};
        if (s.op == "register") {
            const auto& k = keys(a[0]);
            return {a[0], cmd::Register{tokens_arg(a[1], L), k.signing.verify, k.encryption.pub}};
        }
        if (s.op == "advertise") {
            AdvertTags t{10.0, 1_tok, "IDS", "industrial", {}};
            for (std::size_t i = 1; i < a.size(); ++i) {
                const auto [k, v] = split_kv(a[i], L);
                if (k == "throughput") {
                    auto d = parse_double(v);
                    if (!d) throw ScriptError(L, "bad throughput");
                    t.throughput_per_hour = *d;
                } else if (k == "price") {
                    t.price_per_batch = tokens_arg(v, L);
                } else if (k == "detector") {
                    t.detector_type = v;
                } else if (k == "network") {
                    t.network_type = v;
                } else if (k == "attacks") {
                    t.attack_types.clear();
                    std::istringstream ss(v);
                    for (std::string item; std::getline(ss, item, ',');) {
                        if (!item.empty()) t.attack_types.push_back(item);
                    }
                } else {
                    throw ScriptError(L, "unknown advert tag '" + k + "'");
                }
            }
            return {a[0], cmd::Advertise{t}};
        }
        if (s.op == "rm_advert") return {a[0], cmd::RmAdvert{ref(a[1], L)}};
        if (s.op == "mk_offer") {
            return {a[0], cmd::MkOffer{ref(a[1], L), tokens_arg(a[2], L), tokens_arg(a[3], L)}};
        }
        if (s.op == "del_offer") return {a[0], cmd::DelOffer{ref(a[1], L)}};
        if (s.op == "acc_offer") {
            const ObjectId offer = ref(a[1], L);
            Endpoint ep{"127.0.0.1", 9000};
            if (a.size() == 3) {
                const auto [k, v] = split_kv(a[2], L);
                if (k != "endpoint") throw ScriptError(L, "acc_offer takes endpoint=host:port");
                try {
                    ep = Endpoint::parse(v);
                } catch (const StreamNetError& e) {
                    throw ScriptError(L, e.what());
                }
            }
            // Seal for the offer maker when known; an unknown offer is left
            // for the market to reject.
            Bytes sealed{0};
            const auto& st = market_.state();
            if (auto it = st.offers.find(offer); it != st.offers.end()) {
                sealed = seal_endpoint(ep, keys(a[0]).signing, keys(it->second.maker).encryption.pub);
            }
            return {a[0], cmd::AccOffer{offer, sealed}};
        }
        if (s.op == "unsubscribe") return {a[0], cmd::Unsubscribe{ref(a[1], L)}};
        if (s.op == "rate") {
            auto d = parse_double(a[2]);
            if (!d) throw ScriptError(L, "bad rating '" + a[2] + "'");
            return {a[0], cmd::Rate{ref(a[1], L), *d}};
        }
        if (s.op == "post_deposit") return {a[0], cmd::PostDeposit{ref(a[1], L), tokens_arg(a[2], L)}};
        if (s.op == "reclaim") return {a[0], cmd::Reclaim{ref(a[1], L)}};
        throw ScriptError(L, "unknown command '" + s.op + "'");
    }

    static std::string fmt(double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", x);
        return buf;
    }

    void dump() {
        const MarketState& st = market_.state();
        out_ << "== final state ==\n";
        out_ << "seq " << st.seq << ", clock " << st.clock << '\n';
        out_ << "minted " << st.minted.to_string() << ", burned " << st.burned.to_string() << ", escrow "
             << st.escrow.to_string() << ", sink " << st.sink.to_string() << '\n';
        for (const auto& [id, b] : st.balances) out_ << "balance " << id << " " << b.to_string() << '\n';
        for (const auto& [id, adv] : st.adverts) {
            out_ << "advert #" << id << " publisher " << adv.publisher << ", offers " << adv.offers.size()
                 << ", subscriptions " << adv.subscriptions.size() << '\n';
        }
        for (const auto& [id, o] : st.offers) {
            out_ << "offer #" << id << " advert #" << o.advert << " maker " << o.maker << " fee "
                 << o.fee.to_string() << " deposit " << o.deposit.to_string() << '\n';
        }
        for (const auto& [id, s] : st.subscriptions) {
            out_ << "subscription #" << id << " advert #" << s.advert << " subscriber " << s.subscriber
                 << (s.rated ? " rated" : " unrated") << '\n';
        }
        for (const auto& [id, d] : st.stream_deposits) {
            out_ << "stream-deposit #" << id << " producer " << d.producer << " amount "
                 << d.amount.to_string() << " " << to_string(d.status) << '\n';
        }
        out_ << "== trust (N=" << sc_.trust.fixed_threshold << ") ==\n";
        out_ << "party r s t c_e f E\n";
        for (const auto& [id, p] : st.parties) {
            const TrustScore ts = market_.trust_of(id, sc_.trust);
            const Evidence& ev = st.ratings.at(id);
            out_ << id << ' ' << ev.positive << ' ' << ev.negative << ' ' << fmt(ts.t) << ' '
                 << fmt(ts.c_e) << ' ' << fmt(ts.f) << ' ' << fmt(ts.E) << '\n';
        }
    }

    const ScenarioScript& sc_;
    std::ostream& out_;
    Market market_;
    std::map<std::string, ObjectId> labels_;
    std::map<PartyId, PartyKeys> keys_;
};

} // namespace

ScenarioResult run_script(const ScenarioScript& script, std::ostream& out) {
    return Runner(script, out).run();
}

double resolve_price(std::string_view token, const GameParams& params) {
    if (token == "opt") {
        return classify_regime(params) == Regime::Conditional ? optimal_price(params) : 0.0;
    }
    const auto v = parse_double(std::string(token));
    if (!v || !(*v >= 0.0)) throw std::invalid_argument("price must be 'opt' or a number >= 0");
    return *v;
}

std::vector<GameParams> parse_grid(std::istream& in) {
    std::vector<GameParams> grid;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto toks = split_ws(raw.substr(0, raw.find('#')));
        if (toks.empty()) continue;
        if (toks.size() != 7) throw GridError(lineno, "expected 7 fields: p q alpha delta s price0 price1");
        double v[5];
        for (int i = 0; i < 5; ++i) {
            const auto d = parse_double(toks[static_cast<std::size_t>(i)]);
            if (!d) throw GridError(lineno, "not a number: '" + toks[static_cast<std::size_t>(i)] + "'");
            v[i] = *d;
        }
        GameParams gp;
        gp.chain = {v[0], v[1]};
        gp.alpha = v[2];
        gp.delta = v[3];
        gp.s = v[4];
        try {
            gp.validate();
            gp.price = {resolve_price(toks[5], gp), resolve_price(toks[6], gp)};
            gp.validate();
        } catch (const std::exception& e) {
            throw GridError(lineno, e.what());
        }
        grid.push_back(gp);
    }
    return grid;
}

} // namespace trident
