#pragma once

#include <cstdint>
#include <stdexcept>

#include "trident/tokens.hpp"

namespace trident {

class TrustError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Binary evidence: r positive and s negative experiences.
struct Evidence {
    std::uint64_t positive = 0;
    std::uint64_t negative = 0;

    std::uint64_t total() const { return positive + negative; }
    bool operator==(const Evidence&) const = default;
};

enum class ThresholdMode {
    Fixed,   // use TrustConfig::fixed_threshold
    Derived, // evidence_threshold(z, c, t) at the current point estimate
};

struct TrustConfig {
    ThresholdMode mode = ThresholdMode::Fixed;
    std::uint64_t fixed_threshold = 14; // N in [10, 15] is the rule-of-thumb range
    double w = 1.0;                     // normalizing value
    double z = 0.2;                     // significance: 100(1-z)% confidence interval
    double c = 0.8;                     // interval length is 1 - c
    Tokens burn_baseline = 1_tok;       // burn that buys a prior of 0.5

    void validate() const;
};

struct TrustScore {
    double t = 0.0;   // point estimate
    double c_e = 0.0; // certainty weight
    double f = 0.0;   // prior
    double E = 0.0;   // expectation
    std::uint64_t threshold = 0;
};

// r/(r+s), or 0 with no evidence.
double point_estimate(const Evidence& ev);

// 0 at n = 0, 1 for n >= N, N·n / (2w(N-n) + N·n) in between.
double certainty(std::uint64_t n, std::uint64_t threshold, double w = 1.0);

// c_e·t + (1-c_e)·f; rejects inputs outside [0,1].
double expectation(double t, double c_e, double f);

// Proof-of-burn prior f1(r) = 1 - 1/(1 + log2(r + 1)), r = burned/baseline.
double pob_prior(double ratio);
double pob_prior(Tokens burned, Tokens baseline);

// The exponential comparison curve f2(r) = 1 - (1/2)^r.
double pob_prior_alt(double ratio);
double pob_prior_alt(Tokens burned, Tokens baseline);

// Standard normal quantile, Acklam's rational approximation refined by one
// Halley step (absolute error well below 1e-9 on (0,1)).
double normal_quantile(double prob);

// Evidence count for a 100(1-z)% interval of length 1-c at point estimate t,
// rounded up. Throws when c is 1 (zero-length interval) or inputs are out of range.
std::uint64_t evidence_threshold(double z, double c, double t);
// The unrounded value.
double evidence_threshold_real(double z, double c, double t);

TrustScore score(const Evidence& ev, Tokens burned, const TrustConfig& cfg);

} // namespace trident
