#pragma once

#include <cstdint>
#include <limits>

#include "wagon/errors.hpp"

namespace wagon {

// Prime field with a runtime 64-bit modulus. Default is the Mersenne prime
// 2^61 - 1; any odd prime below 2^62 works with the same reduction path.
inline constexpr std::uint64_t kDefaultModulus = (1ULL << 61) - 1;

class Field {
public:
    explicit Field(std::uint64_t modulus = kDefaultModulus) : p_(modulus) {}

    std::uint64_t modulus() const { return p_; }

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        std::uint64_t s = a + b;
        if (s >= p_ || s < a) s -= p_;
        return s;
    }

    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
        return a >= b ? a - b : a + (p_ - b);
    }

    std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : p_ - a; }

    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(a) * b) % p_);
    }

    // Embed a signed integer q as q mod p. Requires |q| < p/2.
    std::uint64_t from_signed(std::int64_t q) const {
        if (q >= 0) {
            auto u = static_cast<std::uint64_t>(q);
            if (u >= p_ / 2) throw WagonError(ErrorCode::MagnitudeOverflow, "signed embed too large");
            return u;
        }
        auto u = static_cast<std::uint64_t>(-q);
        if (u >= p_ / 2) throw WagonError(ErrorCode::MagnitudeOverflow, "signed embed too large");
        return p_ - u;
    }

    // Inverse of from_signed; values in [p/2, p) map to negatives.
    std::int64_t to_signed(std::uint64_t v) const {
        if (v < p_ / 2) return static_cast<std::int64_t>(v);
        return -static_cast<std::int64_t>(p_ - v);
    }

    std::uint64_t reduce_u64(std::uint64_t v) const { return v % p_; }

    std::uint64_t pow2(unsigned bits) const {
        std::uint64_t r = 1;
        for (unsigned i = 0; i < bits; ++i) r = add(r, r);
        return r;
    }

private:
    std::uint64_t p_;
};

}  // namespace wagon
