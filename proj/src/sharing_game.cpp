#include "trident/sharing_game.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace trident {

void GameParams::validate() const {
    chain.validate();
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(alpha) || alpha <= 0.0) throw ParameterError("alpha must be > 0");
    if (!finite(delta) || delta <= 0.0) throw ParameterError("delta must be > 0");
    if (!finite(s) || s < 0.0) throw ParameterError("disclosure cost s must be >= 0");
    for (double pr : price) {
        if (!finite(pr) || pr < 0.0) throw ParameterError("selling prices must be >= 0");
    }
}

std::string_view to_string(Regime r) {
    switch (r) {
    case Regime::AlwaysDefend: return "AlwaysDefend";
    case Regime::NeverDefend: return "NeverDefend";
    case Regime::Conditional: return "Conditional";
    }
    return "?";
}

std::optional<Regime> parse_regime(std::string_view text) {
    if (text == "AlwaysDefend") return Regime::AlwaysDefend;
    if (text == "NeverDefend") return Regime::NeverDefend;
    if (text == "Conditional") return Regime::Conditional;
    return std::nullopt;
}

bool weakly_leq(double a, double b) {
    const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return a <= b + 1e-12 * scale;
}

Regime classify_regime(const GameParams& params) {
    const double p_alpha = params.chain.p * params.alpha;
    const double q_alpha = params.chain.q * params.alpha;
    if (params.delta <= p_alpha) return Regime::AlwaysDefend;
    if (q_alpha <= params.delta) return Regime::NeverDefend;
    return Regime::Conditional;
}

PerPlayer<TradeCosts> disclosure_costs(const AttackState& prev, const PerPlayer<bool>& buys,
                                       const GameParams& params) {
    PerPlayer<TradeCosts> out{};
    for (int i = 0; i < 2; ++i) {
        const int other = 1 - i;
        if (prev.attacked(i) && buys[other]) out[i].sell = params.s - params.price[i];
        if (prev.attacked(other) && buys[i]) out[i].buy = params.price[other];
    }
    return out;
}

double defense_cost(bool defend, bool attacked, const GameParams& params) {
    if (defend) return params.delta;
    return attacked ? params.alpha : 0.0;
}

PerPlayer<InstantCost> instant_cost(const AttackState& prev, const PerPlayer<bool>& buys,
                                    const PerPlayer<bool>& defends, const AttackState& attacks,
                                    const GameParams& params) {
    const auto trade = disclosure_costs(prev, buys, params);
    PerPlayer<InstantCost> out{};
    for (int i = 0; i < 2; ++i) {
        out[i].sell = trade[i].sell;
        out[i].buy = trade[i].buy;
        out[i].defend = defense_cost(defends[i], attacks.attacked(i), params);
    }
    return out;
}

double cost_not_defend(NoDefenseContext ctx, const GameParams& params) {
    switch (ctx) {
    case NoDefenseContext::NoOneAttacked: return params.chain.p * params.alpha;
    case NoDefenseContext::SelfAttacked: return params.chain.q * params.alpha;
    case NoDefenseContext::SpecialPattern: return p_prime(params.chain) * params.alpha;
    }
    return 0.0;
}

double buying_cost_formula(const ChainParams& chain, double alpha, double delta, double price) {
    return (1.0 - chain.q) * chain.p * alpha + chain.q * (price + delta);
}

double not_buying_cost_formula(const ChainParams& chain, double alpha, double delta) {
    return std::min(delta, p_prime(chain) * alpha);
}

namespace {

void require_conditional(const GameParams& params, std::string_view what) {
    params.validate();
    const Regime r = classify_regime(params);
    if (r == Regime::Conditional) return;
    std::ostringstream msg;
    msg << what << " requires p*alpha < delta < q*alpha; violated: ";
    if (r == Regime::AlwaysDefend) {
        msg << "delta <= p*alpha (" << params.delta << " <= " << params.chain.p * params.alpha
            << ")";
    } else {
        msg << "q*alpha <= delta (" << params.chain.q * params.alpha << " <= " << params.delta
            << ")";
    }
    throw GameError(msg.str());
}

} // namespace

double cost_of_buying(const GameParams& params) {
    require_conditional(params, "cost_of_buying");
    return buying_cost_formula(params.chain, params.alpha, params.delta, params.price[1]);
}

double cost_of_not_buying(const GameParams& params) {
    require_conditional(params, "cost_of_not_buying");
    return not_buying_cost_formula(params.chain, params.alpha, params.delta);
}

double purchase_threshold(const GameParams& params) {
    const double q = params.chain.q;
    const double p = params.chain.p;
    const double first = q * params.alpha - params.delta;
    const double second = (1.0 - q) / q * (params.delta - p * params.alpha);
    return std::min(first, second);
}

PurchaseEquivalences purchase_equivalences(const GameParams& params) {
    require_conditional(params, "purchase_equivalences");
    const auto& c = params.chain;
    const double price = params.price[1];
    const double buy = buying_cost_formula(c, params.alpha, params.delta, price);
    const double pp_alpha = p_prime(c) * params.alpha;

    PurchaseEquivalences r;
    r.buy_vs_not_defend.lhs = weakly_leq(buy, pp_alpha);
    r.buy_vs_not_defend.rhs = weakly_leq(price, c.q * params.alpha - params.delta);
    r.buy_vs_defend.lhs = weakly_leq(buy, params.delta);
    r.buy_vs_defend.rhs =
        weakly_leq(price, (1.0 - c.q) / c.q * (params.delta - c.p * params.alpha));
    r.buy_vs_ignorance.lhs = weakly_leq(buy, std::min(params.delta, pp_alpha));
    r.buy_vs_ignorance.rhs = weakly_leq(price, purchase_threshold(params));
    return r;
}

double optimal_price(const GameParams& params) {
    require_conditional(params, "optimal_price");
    const double threshold = purchase_threshold(params);
    if (!weakly_leq(params.s, threshold)) {
        std::ostringstream msg;
        msg << "optimal_price requires s <= min(q*alpha - delta, (1-q)/q*(delta - p*alpha)); "
               "violated: s = "
            << params.s << " > " << threshold;
        throw GameError(msg.str());
    }
    return threshold;
}

// ---------------------------------------------------------------------------

bool Decision::defends(std::optional<bool> purchased_bit) const {
    switch (defend) {
    case DefendRule::Defend: return true;
    case DefendRule::DontDefend: return false;
    case DefendRule::DefendIfOtherAttacked: return purchased_bit.value_or(true);
    }
    return false;
}

BeliefTracker::BeliefTracker(int player, const GameParams& params)
    : player_(player), params_(params), regime_(classify_regime(params)),
      threshold_(purchase_threshold(params)), matrix_(transition_matrix(params.chain)) {
    params_.validate();
    // The dummy start behaves like (a,a): both players face probability q.
    belief_[AttackState{true, true}.index()] = 1.0;
}

double BeliefTracker::attack_probability() const {
    double prob = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
        prob += belief_[s] * params_.chain.attack_probability(AttackState::from_index(s));
    }
    return prob;
}

double BeliefTracker::other_attacked_probability() const {
    double prob = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
        if (AttackState::from_index(s).attacked(1 - player_)) prob += belief_[s];
    }
    return prob;
}

void BeliefTracker::learn_other(bool other_attacked) {
    double total = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
        if (AttackState::from_index(s).attacked(1 - player_) != other_attacked) belief_[s] = 0.0;
        total += belief_[s];
    }
    if (total > 0.0) {
        for (double& b : belief_) b /= total;
        return;
    }
    belief_.fill(0.0);
    AttackState known{};
    (player_ == 0 ? known.player0 : known.player1) = own_prev1_;
    (player_ == 0 ? known.player1 : known.player0) = other_attacked;
    belief_[known.index()] = 1.0;
}

void BeliefTracker::observe_own(bool attacked) {
    const auto& m = matrix_;
    std::array<double, 4> next{};
    double total = 0.0;
    for (std::size_t to = 0; to < 4; ++to) {
        if (AttackState::from_index(to).attacked(player_) != attacked) continue;
        for (std::size_t from = 0; from < 4; ++from) next[to] += belief_[from] * m[from][to];
        total += next[to];
    }
    if (total > 0.0) {
        for (double& b : next) b /= total;
    } else {
        // Outcome had probability zero under the model; keep the own bit and
        // spread over the other player's state.
        for (std::size_t to = 0; to < 4; ++to) {
            next[to] = AttackState::from_index(to).attacked(player_) == attacked ? 0.5 : 0.0;
        }
    }
    belief_ = next;
    own_prev2_ = own_prev1_;
    own_prev1_ = attacked;
}

Decision BeliefTracker::decide(std::uint64_t round) const {
    switch (regime_) {
    case Regime::AlwaysDefend: return {false, DefendRule::Defend};
    case Regime::NeverDefend: return {false, DefendRule::DontDefend};
    case Regime::Conditional: break;
    }
    const double alpha = params_.alpha;
    const double delta = params_.delta;
    if (round >= 2 && at_pattern() && weakly_leq(params_.price_of_other(player_), threshold_)) {
        BeliefTracker if_attacked = *this;
        if_attacked.learn_other(true);
        BeliefTracker if_quiet = *this;
        if_quiet.learn_other(false);
        const bool d1 = weakly_leq(delta, if_attacked.attack_probability() * alpha);
        const bool d0 = weakly_leq(delta, if_quiet.attack_probability() * alpha);
        if (d1 && d0) return {true, DefendRule::Defend};
        if (!d1 && !d0) return {true, DefendRule::DontDefend};
        return {true, DefendRule::DefendIfOtherAttacked};
    }
    const bool defend = weakly_leq(delta, attack_probability() * alpha);
    return {false, defend ? DefendRule::Defend : DefendRule::DontDefend};
}

Decision policy_decide(const std::vector<Observation>& history, int player,
                       const GameParams& params) {
    BeliefTracker tracker(player, params);
    for (const auto& obs : history) {
        if (obs.purchased_bit) tracker.learn_other(*obs.purchased_bit);
        tracker.observe_own(obs.own_attacked);
    }
    return tracker.decide(history.size() + 1);
}

} // namespace trident
