#include "trident/tokens.hpp"

#include <cmath>
#include <cstdio>

namespace trident {

Tokens Tokens::from_double(double tokens) {
    if (!std::isfinite(tokens)) {
        throw std::invalid_argument("token amount is not finite");
    }
    return Tokens(std::llround(tokens * kScale));
}

Tokens Tokens::parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty token amount");
    bool negative = false;
    std::size_t pos = 0;
    if (text[0] == '-' || text[0] == '+') {
        negative = text[0] == '-';
        pos = 1;
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    int frac_digits = 0;
    bool seen_digit = false;
    bool in_frac = false;
    for (; pos < text.size(); ++pos) {
        const char ch = text[pos];
        if (ch == '.' && !in_frac) {
            in_frac = true;
            continue;
        }
        if (ch < '0' || ch > '9') {
            throw std::invalid_argument("malformed token amount: " + std::string(text));
        }
        seen_digit = true;
        if (in_frac) {
            if (++frac_digits > 3) {
                throw std::invalid_argument("token amount has more than 3 decimals: " +
                                            std::string(text));
            }
            frac = frac * 10 + (ch - '0');
        } else {
            whole = whole * 10 + (ch - '0');
            if (whole > (INT64_MAX / kScale) / 10) {
                throw std::invalid_argument("token amount out of range: " + std::string(text));
            }
        }
    }
    if (!seen_digit) throw std::invalid_argument("malformed token amount: " + std::string(text));
    for (int i = frac_digits; i < 3; ++i) frac *= 10;
    const std::int64_t milli = whole * kScale + frac;
    return Tokens(negative ? -milli : milli);
}

std::string Tokens::to_string() const {
    const std::int64_t mag = milli_ < 0 ? -milli_ : milli_;
    char buf[48];
    const std::int64_t frac = mag % kScale;
    if (frac == 0) {
        std::snprintf(buf, sizeof buf, "%s%lld", milli_ < 0 ? "-" : "",
                      static_cast<long long>(mag / kScale));
    } else {
        std::snprintf(buf, sizeof buf, "%s%lld.%03lld", milli_ < 0 ? "-" : "",
                      static_cast<long long>(mag / kScale), static_cast<long long>(frac));
        std::string s(buf);
        while (s.back() == '0') s.pop_back();
        return s;
    }
    return buf;
}

} // namespace trident
