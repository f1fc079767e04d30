#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "flatcone/errors.hpp"

namespace flatcone {

/**
 * A real number that remembers whether it is an exact rational.
 *
 * Angle parameters entered as integer fractions stay exact, so identities
 * that are true in exact arithmetic (degree sums, the Gauss-Bonnet check)
 * can be tested with zero tolerance. Arithmetic between two exact values
 * stays exact; anything touching an inexact value, or overflowing the
 * 64-bit fraction, degrades to plain floating point.
 */
class ExactReal {
public:
    ExactReal() : num_(0), den_(1), value_(0.0), exact_(true) {}

    static ExactReal from_fraction(std::int64_t num, std::int64_t den) {
        if (den == 0)
            throw validation_error("fraction with zero denominator");
        ExactReal r;
        r.num_ = num;
        r.den_ = den;
        r.normalize();
        return r;
    }

    static ExactReal from_int(std::int64_t n) { return from_fraction(n, 1); }

    static ExactReal from_double(double v) {
        ExactReal r;
        r.exact_ = false;
        r.value_ = v;
        return r;
    }

    bool is_exact() const { return exact_; }
    double value() const { return exact_ ? static_cast<double>(num_) / static_cast<double>(den_) : value_; }

    // Only meaningful when is_exact().
    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return exact_ ? num_ == 0 : value_ == 0.0; }

    bool equals_int(std::int64_t n) const {
        if (exact_) return den_ == 1 && num_ == n;
        return value_ == static_cast<double>(n);
    }

    friend ExactReal operator+(const ExactReal& a, const ExactReal& b) {
        if (a.exact_ && b.exact_) {
            __int128 n = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
            __int128 d = static_cast<__int128>(a.den_) * b.den_;
            ExactReal r;
            if (r.assign_reduced(n, d)) return r;
        }
        return from_double(a.value() + b.value());
    }

    friend ExactReal operator-(const ExactReal& a, const ExactReal& b) { return a + (-b); }

    ExactReal operator-() const {
        if (exact_) return from_fraction(-num_, den_);
        return from_double(-value_);
    }

    std::string str() const {
        if (!exact_) return std::to_string(value_);
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    // Exact equality when both sides are exact, bitwise otherwise.
    friend bool operator==(const ExactReal& a, const ExactReal& b) {
        if (a.exact_ && b.exact_) return a.num_ == b.num_ && a.den_ == b.den_;
        return a.value() == b.value();
    }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
        exact_ = true;
        value_ = static_cast<double>(num_) / static_cast<double>(den_);
    }

    // Returns false when the reduced fraction does not fit in 64 bits.
    bool assign_reduced(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 an = n < 0 ? -n : n;
        __int128 g = gcd128(an, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
        if (n > lim || n < -lim || d > lim) return false;
        num_ = static_cast<std::int64_t>(n);
        den_ = static_cast<std::int64_t>(d);
        if (num_ == 0) den_ = 1;
        exact_ = true;
        value_ = static_cast<double>(num_) / static_cast<double>(den_);
        return true;
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    std::int64_t num_;
    std::int64_t den_;
    double value_;
    bool exact_;
};

} // namespace flatcone
