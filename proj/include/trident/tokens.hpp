#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trident {

// Token amount in milli-tokens. All ledger and simulation accounting is done
// on these integers so that sums reconcile exactly.
class Tokens {
public:
    static constexpr std::int64_t kScale = 1000;

    constexpr Tokens() = default;

    static constexpr Tokens from_milli(std::int64_t milli) { return Tokens(milli); }
    static Tokens from_double(double tokens);
    // Accepts "12", "0.2", "-1.5"; at most three fractional digits.
    static Tokens parse(std::string_view text);

    constexpr std::int64_t milli() const { return milli_; }
    constexpr double to_double() const { return static_cast<double>(milli_) / kScale; }
    std::string to_string() const;

    constexpr Tokens operator+(Tokens o) const { return Tokens(milli_ + o.milli_); }
    constexpr Tokens operator-(Tokens o) const { return Tokens(milli_ - o.milli_); }
    constexpr Tokens operator-() const { return Tokens(-milli_); }
    constexpr Tokens& operator+=(Tokens o) { milli_ += o.milli_; return *this; }
    constexpr Tokens& operator-=(Tokens o) { milli_ -= o.milli_; return *this; }
    constexpr Tokens operator*(std::int64_t k) const { return Tokens(milli_ * k); }

    constexpr auto operator<=>(const Tokens&) const = default;

private:
    constexpr explicit Tokens(std::int64_t milli) : milli_(milli) {}
    std::int64_t milli_ = 0;
};

constexpr Tokens operator""_tok(unsigned long long whole) {
    return Tokens::from_milli(static_cast<std::int64_t>(whole) * Tokens::kScale);
}

} // namespace trident
