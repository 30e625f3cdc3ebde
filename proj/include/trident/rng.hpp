#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace trident {

// Seedable, splittable random source.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the standard.
// Sub-streams are derived with splitmix64 over (parent seed, FNV-1a of a
// component label, index), so a trace is reproducible from the root seed
// alone. Uniform doubles take the top 53 bits of one engine draw; no
// std::*_distribution is used because those differ across standard libraries.
class Rng {
public:
    static constexpr std::string_view kAlgorithm = "mt19937_64/splitmix64-v1";

    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    // prob <= 0 never fires, prob >= 1 always fires.
    bool bernoulli(double prob) { return uniform01() < prob; }

    Rng split(std::string_view component, std::uint64_t index = 0) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view component,
                          std::uint64_t index = 0);

} // namespace trident
