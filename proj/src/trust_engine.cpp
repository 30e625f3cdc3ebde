#include "trident/trust_engine.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace trident {

void TrustConfig::validate() const {
    if (mode == ThresholdMode::Fixed && fixed_threshold < 1) {
        throw TrustError("evidence threshold N must be >= 1");
    }
    if (!(w > 0.0)) throw TrustError("normalizing value w must be > 0");
    if (!(z > 0.0 && z < 1.0)) throw TrustError("significance z must be in (0,1)");
    if (!(c > 0.0 && c < 1.0)) throw TrustError("certainty level c must be in (0,1)");
    if (burn_baseline <= Tokens{}) throw TrustError("burn baseline must be > 0");
}

double point_estimate(const Evidence& ev) {
    const std::uint64_t n = ev.total();
    if (n == 0) return 0.0;
    return static_cast<double>(ev.positive) / static_cast<double>(n);
}

double certainty(std::uint64_t n, std::uint64_t threshold, double w) {
    if (n == 0) return 0.0;
    if (n >= threshold) return 1.0;
    const double N = static_cast<double>(threshold);
    const double nn = static_cast<double>(n);
    return N * nn / (2.0 * w * (N - nn) + N * nn);
}

double expectation(double t, double c_e, double f) {
    auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!unit(t) || !unit(c_e) || !unit(f)) {
        throw TrustError("expectation inputs must lie in [0,1]");
    }
    return c_e * t + (1.0 - c_e) * f;
}

double pob_prior(double ratio) {
    if (!(ratio >= 0.0)) throw TrustError("burn ratio must be >= 0");
    return 1.0 - 1.0 / (1.0 + std::log2(ratio + 1.0));
}

double pob_prior_alt(double ratio) {
    if (!(ratio >= 0.0)) throw TrustError("burn ratio must be >= 0");
    return 1.0 - std::exp2(-ratio);
}

namespace {

double burn_ratio(Tokens burned, Tokens baseline) {
    if (burned < Tokens{}) throw TrustError("burned amount must be >= 0");
    if (baseline <= Tokens{}) throw TrustError("burn baseline must be > 0");
    return static_cast<double>(burned.milli()) / static_cast<double>(baseline.milli());
}

} // namespace

double pob_prior(Tokens burned, Tokens baseline) { return pob_prior(burn_ratio(burned, baseline)); }

double pob_prior_alt(Tokens burned, Tokens baseline) {
    return pob_prior_alt(burn_ratio(burned, baseline));
}

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw TrustError("quantile probability must be in (0,1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;

    double x;
    if (prob < low) {
        const double q = std::sqrt(-2.0 * std::log(prob));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (prob <= 1.0 - low) {
        const double q = prob - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - prob));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement against the exact CDF.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

double evidence_threshold_real(double z, double c, double t) {
    if (!(z > 0.0 && z < 1.0)) throw TrustError("significance z must be in (0,1)");
    if (!(c > 0.0 && c <= 1.0)) throw TrustError("certainty level c must be in (0,1)");
    if (c >= 1.0) throw TrustError("certainty level c = 1 gives a zero-length interval");
    if (!(t >= 0.0 && t <= 1.0)) throw TrustError("point estimate t must be in [0,1]");
    const double u = 1.0 - c;
    const double kappa = normal_quantile(1.0 - z / 2.0);
    const double k2 = kappa * kappa;
    const double k4 = k2 * k2;
    const double u2 = u * u;
    const double shape = 2.0 * u2 - 4.0 * t + 4.0 * t * t;
    const double root = std::sqrt(4.0 * u2 * k4 * (1.0 - u2) + k4 * shape * shape);
    return (-k2 * shape + root) / (2.0 * u2);
}

std::uint64_t evidence_threshold(double z, double c, double t) {
    const double n = evidence_threshold_real(z, c, t);
    const double rounded = std::ceil(n - 1e-9);
    return rounded < 1.0 ? 1 : static_cast<std::uint64_t>(rounded);
}

TrustScore score(const Evidence& ev, Tokens burned, const TrustConfig& cfg) {
    cfg.validate();
    TrustScore out;
    out.t = point_estimate(ev);
    out.threshold = cfg.mode == ThresholdMode::Fixed ? cfg.fixed_threshold
                                                     : evidence_threshold(cfg.z, cfg.c, out.t);
    out.c_e = certainty(ev.total(), out.threshold, cfg.w);
    out.f = pob_prior(burned, cfg.burn_baseline);
    out.E = expectation(out.t, out.c_e, out.f);
    return out;
}

} // namespace trident
