#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trident/attacker_model.hpp"

namespace trident {

template <typename T>
using PerPlayer = std::array<T, 2>;

struct GameParams {
    ChainParams chain;
    double alpha = 0.0;           // cost of being attacked unprepared
    double delta = 0.0;           // cost of preparing to defend
    double s = 0.0;               // seller's cost of disclosing an attack
    PerPlayer<double> price{};    // selling prices s^0, s^1

    void validate() const;
    double price_of_other(int player) const { return price[1 - player]; }
};

enum class Regime { AlwaysDefend, NeverDefend, Conditional };

std::string_view to_string(Regime r);
std::optional<Regime> parse_regime(std::string_view text);

// δ <= pα -> AlwaysDefend; qα <= δ -> NeverDefend; otherwise Conditional.
Regime classify_regime(const GameParams& params);

struct TradeCosts {
    double sell = 0.0;
    double buy = 0.0;
};

// Selling and buying cost components of one round. `prev` is the realized
// attack state of the previous round, so this is undefined for round 1.
PerPlayer<TradeCosts> disclosure_costs(const AttackState& prev, const PerPlayer<bool>& buys,
                                       const GameParams& params);

double defense_cost(bool defend, bool attacked, const GameParams& params);

struct InstantCost {
    double sell = 0.0;
    double buy = 0.0;
    double defend = 0.0;
    double total() const { return sell + buy + defend; }
};

PerPlayer<InstantCost> instant_cost(const AttackState& prev, const PerPlayer<bool>& buys,
                                    const PerPlayer<bool>& defends, const AttackState& attacks,
                                    const GameParams& params);

enum class NoDefenseContext { NoOneAttacked, SelfAttacked, SpecialPattern };

// pα, qα or p'α.
double cost_not_defend(NoDefenseContext ctx, const GameParams& params);

// Closed-form expected costs after the special pattern, from player 0's side
// (the seller is player 1). These two check the Conditional regime.
double cost_of_buying(const GameParams& params);
double cost_of_not_buying(const GameParams& params);

// The raw formulas, usable outside the Conditional regime.
double buying_cost_formula(const ChainParams& chain, double alpha, double delta, double price);
double not_buying_cost_formula(const ChainParams& chain, double alpha, double delta);

// min(qα - δ, (1-q)/q (δ - pα)); the highest price at which the buyer still buys.
double purchase_threshold(const GameParams& params);

struct Equivalence {
    bool lhs = false; // inequality on the expected costs
    bool rhs = false; // inequality on the price
    bool agree() const { return lhs == rhs; }
};

struct PurchaseEquivalences {
    Equivalence buy_vs_not_defend; // (1-q)pα + q(s¹+δ) <= p'α  iff  s¹ <= qα - δ
    Equivalence buy_vs_defend;     // (1-q)pα + q(s¹+δ) <= δ    iff  s¹ <= (1-q)/q (δ - pα)
    Equivalence buy_vs_ignorance;  // C(b|a¬a) <= C(¬b|a¬a)     iff  s¹ <= min(...)
    bool all_agree() const {
        return buy_vs_not_defend.agree() && buy_vs_defend.agree() && buy_vs_ignorance.agree();
    }
};

// Evaluates both sides of the three equivalences for the seller price s¹.
// Requires the Conditional regime.
PurchaseEquivalences purchase_equivalences(const GameParams& params);

// Requires the Conditional regime and s <= threshold; throws GameError naming
// the violated inequality otherwise.
double optimal_price(const GameParams& params);

class GameError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Weak comparison used for every cost/price tie in the game. Ties within
// floating round-off count as equal, which resolves them toward buying.
bool weakly_leq(double a, double b);

// ---------------------------------------------------------------------------
// Myopic player policy
// ---------------------------------------------------------------------------

enum class DefendRule { Defend, DontDefend, DefendIfOtherAttacked };

struct Decision {
    bool buy = false;
    DefendRule defend = DefendRule::DontDefend;

    bool defends(std::optional<bool> purchased_bit) const;
    bool operator==(const Decision&) const = default;
};

// What a player has seen by the end of a round: her own attack outcome and,
// if she bought at the start of that round, the other player's previous bit.
struct Observation {
    bool own_attacked = false;
    std::optional<bool> purchased_bit;
};

// Bayesian filter over the previous round's joint attack state, from one
// player's point of view. Drives the lexicographic (myopic) policy.
class BeliefTracker {
public:
    BeliefTracker(int player, const GameParams& params);

    // Decision for the round about to start. `round` is 1-based.
    Decision decide(std::uint64_t round) const;

    // Condition the belief on the purchased bit (the other player's attack
    // in the previous round).
    void learn_other(bool other_attacked);
    // Posterior probability of being attacked this round.
    double attack_probability() const;
    // Posterior probability that the other player was attacked last round.
    double other_attacked_probability() const;
    // Fold in this round's own attack outcome.
    void observe_own(bool attacked);

    bool at_pattern() const { return own_prev2_ && !own_prev1_; }

private:
    int player_;
    GameParams params_;
    Regime regime_;
    double threshold_ = 0.0;
    TransitionMatrix matrix_{};
    std::array<double, 4> belief_{}; // over previous joint state
    bool own_prev1_ = true;          // own attack at n-1; the dummy start counts as attacked
    bool own_prev2_ = false;         // own attack at n-2
};

// Stateless form: replays the observation history through a BeliefTracker.
// `history[k]` is the observation for round k+1; the decision is for round
// history.size() + 1.
Decision policy_decide(const std::vector<Observation>& history, int player,
                       const GameParams& params);

} // namespace trident
