#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "flatcone/errors.hpp"
#include "flatcone/exact.hpp"

namespace flatcone {

using Complex = std::complex<double>;

// A point of the Riemann sphere: a finite coordinate or the point at
// infinity of the standard chart.
class SpherePoint {
public:
    static SpherePoint at(Complex z) { return SpherePoint(false, z); }
    static SpherePoint at_infinity() { return SpherePoint(true, Complex(0, 0)); }

    bool is_infinity() const { return infinite_; }

    Complex value() const {
        if (infinite_)
            throw validation_error("point at infinity has no finite coordinate");
        return z_;
    }

    friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
        if (a.infinite_ != b.infinite_) return false;
        return a.infinite_ || a.z_ == b.z_;
    }

private:
    SpherePoint(bool infinite, Complex z) : infinite_(infinite), z_(z) {}

    bool infinite_;
    Complex z_;
};

/**
 * A cone point: a sphere position together with its angle parameter.
 * The cone angle is 2*pi*alpha; the exponent this point contributes to
 * the divisor is alpha - 1. Any finite real alpha is allowed, including
 * zero (a cusp) and negative values.
 */
struct ConePoint {
    SpherePoint position;
    ExactReal alpha;

    ConePoint(SpherePoint pos, ExactReal a) : position(pos), alpha(a) {
        if (!std::isfinite(alpha.value()))
            throw validation_error("cone angle parameter must be finite");
        if (!position.is_infinity()) {
            Complex z = position.value();
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw validation_error("cone point coordinate must be finite");
        }
    }
};

// Soft conditioning limit: quadrature against |z-P|^(alpha-1) degrades
// rapidly once |alpha| grows past this.
inline constexpr double kAlphaConditioningLimit = 50.0;

/**
 * A divisor on the sphere with real exponents alpha_j - 1: an ordered
 * list of cone points with pairwise distinct positions, at most one of
 * which may sit at infinity. Positions are compared exactly; a collision
 * is a construction error rather than a numerical event.
 */
class Divisor {
public:
    Divisor() = default;

    explicit Divisor(std::vector<ConePoint> points) : points_(std::move(points)) {
        for (std::size_t i = 0; i < points_.size(); ++i)
            for (std::size_t j = i + 1; j < points_.size(); ++j)
                if (points_[i].position == points_[j].position)
                    throw validation_error("divisor positions must be pairwise distinct");
    }

    const std::vector<ConePoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    bool has_infinity() const {
        for (const auto& p : points_)
            if (p.position.is_infinity()) return true;
        return false;
    }

    // Null when no point sits at infinity.
    const ConePoint* infinity_point() const {
        for (const auto& p : points_)
            if (p.position.is_infinity()) return &p;
        return nullptr;
    }

    std::vector<ConePoint> finite_points() const {
        std::vector<ConePoint> out;
        out.reserve(points_.size());
        for (const auto& p : points_)
            if (!p.position.is_infinity()) out.push_back(p);
        return out;
    }

    // True when any |alpha| exceeds the soft conditioning limit.
    bool ill_conditioned() const {
        for (const auto& p : points_)
            if (std::abs(p.alpha.value()) > kAlphaConditioningLimit) return true;
        return false;
    }

private:
    std::vector<ConePoint> points_;
};

// Sum of the exponents alpha_j - 1 over all points, infinity included.
// Exact whenever every angle was given as a fraction.
inline ExactReal degree(const Divisor& d) {
    ExactReal sum = ExactReal::from_int(0);
    for (const auto& p : d.points())
        sum = sum + (p.alpha - ExactReal::from_int(1));
    return sum;
}

struct GaussBonnetReport {
    bool pass;
    double degree;   // numeric value of the exponent sum
    double deficit;  // degree + 2; zero iff the condition holds
    bool exact;      // whether the check ran in exact arithmetic
};

/**
 * The sphere carries a flat conical metric for this divisor iff the
 * exponent sum equals the Euler characteristic -2. Exact inputs are
 * checked exactly; floating inputs with tolerance 1e-12.
 */
inline GaussBonnetReport validate_gauss_bonnet(const Divisor& d) {
    ExactReal deg = degree(d);
    ExactReal deficit = deg + ExactReal::from_int(2);
    bool pass = deg.is_exact() ? deficit.is_zero() : std::abs(deficit.value()) <= 1e-12;
    return GaussBonnetReport{pass, deg.value(), deficit.value(), deg.is_exact()};
}

/**
 * Append the unique point at infinity that brings the exponent sum to
 * exactly -2. When the required angle parameter is 1 the point would be
 * smooth and is omitted. The input must not already touch infinity.
 */
inline Divisor complete_at_infinity(const Divisor& d) {
    if (d.has_infinity())
        throw validation_error("divisor already has a point at infinity");
    ExactReal alpha_inf = -(ExactReal::from_int(1) + degree(d));
    std::vector<ConePoint> pts = d.points();
    if (!alpha_inf.equals_int(1))
        pts.emplace_back(SpherePoint::at_infinity(), alpha_inf);
    return Divisor(std::move(pts));
}

/**
 * Group law: exponents alpha - 1 add at shared positions; points whose
 * combined exponent vanishes drop out. Degrees add, and the operation is
 * commutative and associative as a map position -> exponent.
 */
inline Divisor combine(const Divisor& a, const Divisor& b) {
    std::vector<ConePoint> merged = a.points();
    for (const auto& q : b.points()) {
        bool found = false;
        for (auto& p : merged) {
            if (p.position == q.position) {
                // exponents add: (alpha-1) + (beta-1), stored back as an angle
                p.alpha = p.alpha + q.alpha - ExactReal::from_int(1);
                found = true;
                break;
            }
        }
        if (!found) merged.push_back(q);
    }
    std::vector<ConePoint> kept;
    kept.reserve(merged.size());
    for (const auto& p : merged)
        if (!p.alpha.equals_int(1)) kept.push_back(p);
    return Divisor(std::move(kept));
}

} // namespace flatcone
