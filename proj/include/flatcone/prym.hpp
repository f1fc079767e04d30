#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "flatcone/divisor.hpp"
#include "flatcone/errors.hpp"
#include "flatcone/path.hpp"
#include "flatcone/quadrature.hpp"

namespace flatcone {

class PrymDifferential;

/**
 * The branch data of the multi-valued coefficient: one continuously
 * tracked value of arg(z - P_j) per finite cone point, anchored at a base
 * point. Arguments are not reduced mod 2*pi; their windings carry the
 * analytic-continuation history of the path that produced them.
 */
struct BranchState {
    Complex base;
    std::vector<double> args;

    // Principal branch at z0: every argument in (-pi, pi].
    static BranchState principal(const PrymDifferential& omega, Complex z0);

    // Diagnostic: each tracked argument must agree with the principal
    // argument of (z - P_j) modulo 2*pi.
    bool consistent_with(const PrymDifferential& omega, Complex z, double tol = 1e-6) const;
};

/**
 * The explicit multiplicative differential
 *
 *     omega = C * prod_j (z - P_j)^(alpha_j - 1) dz
 *
 * over the finite cone points of a Gauss-Bonnet-valid divisor. All
 * evaluation runs through exponentials of tracked logarithms: powers are
 * never taken on a blind principal branch, which is what keeps monodromy
 * honest.
 */
class PrymDifferential {
public:
    explicit PrymDifferential(Divisor divisor, Complex scale = Complex(1, 0))
        : divisor_(std::move(divisor)), scale_(scale) {
        if (scale_ == Complex(0, 0))
            throw validation_error("differential scale must be nonzero");
        if (!validate_gauss_bonnet(divisor_).pass)
            throw validation_error("divisor fails the Gauss-Bonnet degree condition");
        for (const auto& p : divisor_.points()) {
            if (p.position.is_infinity()) continue;
            positions_.push_back(p.position.value());
            exponents_.push_back(p.alpha.value() - 1.0);
            alphas_.push_back(p.alpha.value());
        }
        double r = 0.0;
        for (const Complex& p : positions_) r = std::max(r, std::abs(p));
        chart_radius_ = 2.0 * (1.0 + r);
    }

    const Divisor& divisor() const { return divisor_; }
    Complex scale() const { return scale_; }

    std::size_t finite_count() const { return positions_.size(); }
    const std::vector<Complex>& finite_positions() const { return positions_; }
    double alpha(std::size_t j) const { return alphas_.at(j); }
    double exponent(std::size_t j) const { return exponents_.at(j); }

    // Residue of the logarithmic derivative d(omega)/omega at P_j.
    double residue(std::size_t j) const { return exponents_.at(j); }

    // d(omega)/omega = sum (alpha_j - 1)/(z - P_j); single-valued.
    Complex log_derivative(Complex z) const {
        Complex sum(0, 0);
        for (std::size_t j = 0; j < positions_.size(); ++j) {
            const Complex dz = z - positions_[j];
            if (dz == Complex(0, 0))
                throw pole_error("logarithmic derivative evaluated at a cone point");
            sum += exponents_[j] / dz;
        }
        return sum;
    }

    // Coefficient f with omega = f dz on the branch described by `b`.
    Complex evaluate(Complex z, const BranchState& b) const {
        if (b.args.size() != positions_.size())
            throw validation_error("branch state does not match this differential");
        Complex log_sum = std::log(scale_);
        for (std::size_t j = 0; j < positions_.size(); ++j) {
            const Complex dz = z - positions_[j];
            if (dz == Complex(0, 0))
                throw pole_error("differential evaluated at a cone point");
            log_sum += exponents_[j] * Complex(std::log(std::abs(dz)), b.args[j]);
        }
        return std::exp(log_sum);
    }

    /**
     * Metric density |f|^2; branch independent because the exponents are
     * real. Points with alpha = 1 contribute nothing and may be hit
     * exactly; any other cone point is a pole or zero of the density.
     * Beyond chart_radius() the factors are evaluated in the w = 1/z
     * chart, which stays well conditioned for large |z|.
     */
    double metric_density(Complex z) const {
        double log_sum = 2.0 * std::log(std::abs(scale_));
        if (std::abs(z) > chart_radius_) {
            const Complex w = 1.0 / z;
            const double log_abs_z = -std::log(std::abs(w));
            for (std::size_t j = 0; j < positions_.size(); ++j)
                log_sum += 2.0 * exponents_[j] * (log_abs_z + std::log(std::abs(1.0 - positions_[j] * w)));
            return std::exp(log_sum);
        }
        for (std::size_t j = 0; j < positions_.size(); ++j) {
            if (exponents_[j] == 0.0) continue;
            const Complex dz = z - positions_[j];
            if (dz == Complex(0, 0))
                throw pole_error("metric density has a pole or zero at this cone point");
            log_sum += 2.0 * exponents_[j] * std::log(std::abs(dz));
        }
        return std::exp(log_sum);
    }

    double chart_radius() const { return chart_radius_; }

    // Order of the coefficient at w = 0 in the w = 1/z chart:
    // -(sum of finite exponents) - 2. Equals alpha_inf - 1 for a divisor
    // completed at infinity.
    double infinity_exponent() const {
        double s = 0.0;
        for (double e : exponents_) s += e;
        return -s - 2.0;
    }

    // Logarithmic derivative of the w-chart coefficient; single-valued and
    // meromorphic, so its residue at w = 0 recovers infinity_exponent()
    // by contour integration.
    Complex infinity_chart_log_derivative(Complex w) const {
        if (w == Complex(0, 0))
            throw pole_error("w-chart logarithmic derivative evaluated at w = 0");
        Complex sum = -2.0 / w;
        for (std::size_t j = 0; j < positions_.size(); ++j)
            sum -= exponents_[j] / (w * (1.0 - positions_[j] * w));
        return sum;
    }

private:
    Divisor divisor_;
    Complex scale_;
    std::vector<Complex> positions_;
    std::vector<double> exponents_;
    std::vector<double> alphas_;
    double chart_radius_;
};

inline BranchState BranchState::principal(const PrymDifferential& omega, Complex z0) {
    BranchState b;
    b.base = z0;
    b.args.reserve(omega.finite_count());
    for (const Complex& p : omega.finite_positions()) {
        const Complex dz = z0 - p;
        if (dz == Complex(0, 0))
            throw pole_error("branch base point coincides with a cone point");
        b.args.push_back(std::arg(dz));
    }
    return b;
}

inline bool BranchState::consistent_with(const PrymDifferential& omega, Complex z, double tol) const {
    if (args.size() != omega.finite_count()) return false;
    for (std::size_t j = 0; j < args.size(); ++j) {
        const double principal = std::arg(z - omega.finite_positions()[j]);
        const double wind = (args[j] - principal) / (2.0 * std::numbers::pi);
        if (std::abs(wind - std::round(wind)) > tol) return false;
    }
    return true;
}

// Numeric residue of the w-chart logarithmic derivative at w = 0, taken on
// a small circle. Independent check of infinity_exponent().
inline double infinity_exponent_numeric(const PrymDifferential& omega,
                                        const QuadratureOptions& opts = {}) {
    // |w| = 1/R lies strictly inside every pole 1/P_j of the w-chart.
    const double r = 1.0 / omega.chart_radius();
    const double two_pi = 2.0 * std::numbers::pi;
    auto f = [&](double t) {
        const Complex w = std::polar(r, two_pi * t);
        // (1/2*pi*i) * closed integral of L(w) dw, dw = i*w d(theta)
        return omega.infinity_chart_log_derivative(w) * w;
    };
    return integrate_unit(f, opts).real();
}

namespace prym_detail {

// f on the straight segment [a, b], branch anchored at a. Along a straight
// segment each arg(z - P_j) moves monotonically by less than pi, so the
// principal argument of the ratio is the exact continuation.
inline Complex evaluate_on_segment(const PrymDifferential& omega, Complex a,
                                   std::span<const double> args_at_a, Complex z) {
    Complex log_sum = std::log(omega.scale());
    const auto& pts = omega.finite_positions();
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const Complex dz = z - pts[j];
        const double arg_j = args_at_a[j] + segment_turn(a, z, pts[j]);
        log_sum += omega.exponent(j) * Complex(std::log(std::abs(dz)), arg_j);
    }
    return std::exp(log_sum);
}

} // namespace prym_detail

/**
 * Reconstruction of the coefficient by exponentiating the integrated
 * logarithmic derivative:
 *
 *     f(z) = f(z0) * exp( int_path d(omega)/omega )
 *
 * with f(z0) the principal-branch value at the path start. Agrees with
 * branch-tracked evaluation continued along the same path, so the ratio
 * of the two routes is the constant-ratio oracle for uniqueness of the
 * differential.
 */
inline Complex reconstruct_by_exponential(const PrymDifferential& omega, const Path& path,
                                          const QuadratureOptions& opts = {}) {
    check_admissible(path, omega.finite_positions());
    const Complex f0 = omega.evaluate(path.waypoints.front(),
                                      BranchState::principal(omega, path.waypoints.front()));
    std::vector<std::function<Complex(double)>> jobs;
    for (std::size_t s = 0; s + 1 < path.waypoints.size(); ++s) {
        const Complex a = path.waypoints[s];
        const Complex d = path.waypoints[s + 1] - a;
        if (d == Complex(0, 0)) continue;
        jobs.push_back([&omega, a, d](double t) { return omega.log_derivative(a + t * d) * d; });
    }
    const Complex integral = integrate_jobs(jobs, opts);
    return f0 * std::exp(integral);
}

} // namespace flatcone
