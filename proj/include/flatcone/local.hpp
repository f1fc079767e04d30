#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "flatcone/develop.hpp"
#include "flatcone/errors.hpp"
#include "flatcone/prym.hpp"
#include "flatcone/quadrature.hpp"

namespace flatcone {

// h(s) = s(s-1) + (1-alpha^2)/4, the indicial polynomial of the local ODE
// x^2 u'' + q(x) u = 0 at a cone point with parameter alpha.
inline double indicial_h(double s, double alpha) {
    return s * (s - 1.0) + 0.25 * (1.0 - alpha * alpha);
}

struct IndicialPair {
    double s1;  // (1 - alpha)/2
    double s2;  // (1 + alpha)/2
    double alpha;
    bool double_root;  // alpha == 0
};

inline IndicialPair indicial_roots(double alpha) {
    return IndicialPair{0.5 * (1.0 - alpha), 0.5 * (1.0 + alpha), alpha, alpha == 0.0};
}

/**
 * Truncated local series solution x^s * sum c_n x^n with c_0 = 1,
 * attached to an indicial root s.
 */
struct FrobeniusSeries {
    double root;
    std::vector<std::complex<double>> coefficients;  // c_0 .. c_N, c_0 = 1
};

struct FrobeniusOptions {
    // |R_m| below this times max(1, sum |b_k|) counts as an exact zero at a
    // resonant index, letting the recursion continue with c_m = 0.
    double resonance_tol = 1e-12;
    // |h(s+n)| below this times n flags a resonant index.
    double h_zero_tol = 1e-10;
};

/**
 * Forward recursion h(s+n) c_n + R_n = 0 with R_n = sum_{i<n} c_i b_{n-i}.
 *
 * `b` are the series coefficients of q(x); b_0 must satisfy h(s) = 0 for
 * the supplied root (checked). At a resonant index m (h(s+m) = 0) the
 * recursion continues with c_m = 0 when R_m vanishes; a nonzero R_m means
 * no pure power solution exists at this root and raises
 * resonance_obstruction, since log terms cannot occur in developing maps.
 */
inline FrobeniusSeries frobenius_coefficients(std::span<const std::complex<double>> b, double s,
                                              int terms, const FrobeniusOptions& opts = {}) {
    if (b.empty())
        throw validation_error("need at least the constant coefficient b_0");
    if (terms < 0)
        throw validation_error("term count must be nonnegative");
    const std::complex<double> b0 = b[0];
    if (std::abs(b0.imag()) > 1e-12 * std::max(1.0, std::abs(b0)))
        throw validation_error("b_0 must be real for an indicial root to exist");
    if (std::abs(s * (s - 1.0) + b0.real()) > 1e-12 * std::max(1.0, s * s))
        throw validation_error("s is not a root of the indicial equation for b_0");

    double b_mass = 0.0;
    for (const auto& bk : b) b_mass += std::abs(bk);
    const double resonance_gate = opts.resonance_tol * std::max(1.0, b_mass);

    FrobeniusSeries series{s, {std::complex<double>(1, 0)}};
    series.coefficients.reserve(static_cast<std::size_t>(terms) + 1);
    for (int n = 1; n <= terms; ++n) {
        std::complex<double> r_n(0, 0);
        for (int i = 0; i < n; ++i) {
            const int k = n - i;
            if (k < static_cast<int>(b.size())) r_n += series.coefficients[i] * b[k];
        }
        const double h_n = (s + n) * (s + n - 1.0) + b0.real();
        if (std::abs(h_n) <= opts.h_zero_tol * n) {
            if (std::abs(r_n) <= resonance_gate) {
                series.coefficients.emplace_back(0, 0);
                continue;
            }
            throw resonance_obstruction(n, r_n);
        }
        series.coefficients.push_back(-r_n / h_n);
    }
    return series;
}

/**
 * Direct numerical evaluation of x^2 u'' + q(x) u on the truncated series,
 * with principal-branch x^s. For a series satisfying the recursion through
 * term N the residual is O(|x|^(s+N+1)); usable as an independent check of
 * the recursion inside the convergence guard radius (|x| < 0.1 in tests).
 */
inline std::complex<double> ode_residual(const FrobeniusSeries& series,
                                         std::span<const std::complex<double>> b,
                                         std::complex<double> x) {
    const double s = series.root;
    const std::complex<double> xs = std::exp(s * std::log(x));
    std::complex<double> u(0, 0), x2u2(0, 0), xn(1, 0);
    for (std::size_t n = 0; n < series.coefficients.size(); ++n) {
        const double e = s + static_cast<double>(n);
        u += series.coefficients[n] * xn;
        x2u2 += series.coefficients[n] * e * (e - 1.0) * xn;
        xn *= x;
    }
    std::complex<double> q(0, 0);
    xn = std::complex<double>(1, 0);
    for (const auto& bk : b) {
        q += bk * xn;
        xn *= x;
    }
    return xs * x2u2 + q * xs * u;
}

namespace local_detail {

// 9-point central difference rows (offsets -4..4).
inline constexpr double kD1[9] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0,
                                  4.0 / 5,   -1.0 / 5,   4.0 / 105, -1.0 / 280};
inline constexpr double kD2[9] = {-1.0 / 560, 8.0 / 315, -1.0 / 5,  8.0 / 5, -205.0 / 72,
                                  8.0 / 5,    -1.0 / 5,  8.0 / 315, -1.0 / 560};
inline constexpr double kD3[9] = {-7.0 / 240,  3.0 / 10, -169.0 / 120, 61.0 / 30, 0.0,
                                  -61.0 / 30, 169.0 / 120, -3.0 / 10,  7.0 / 240};

} // namespace local_detail

/**
 * Schwarzian derivative F'''/F' - (3/2)(F''/F')^2 from 9-point central
 * differences of analytic samples at x + k*h. Step choice is the caller's;
 * h = 1e-3*|x| is a good default near singularities. Throws when F' is
 * numerically zero (F not locally univalent there).
 */
template <typename F>
inline std::complex<double> schwarzian(F&& f, std::complex<double> x, double h) {
    if (!(h > 0.0))
        throw validation_error("schwarzian step must be positive");
    std::complex<double> samples[9];
    double scale = 0.0;
    for (int k = -4; k <= 4; ++k) {
        samples[k + 4] = f(x + static_cast<double>(k) * h);
        scale = std::max(scale, std::abs(samples[k + 4]));
    }
    std::complex<double> d1(0, 0), d2(0, 0), d3(0, 0);
    for (int i = 0; i < 9; ++i) {
        d1 += local_detail::kD1[i] * samples[i];
        d2 += local_detail::kD2[i] * samples[i];
        d3 += local_detail::kD3[i] * samples[i];
    }
    d1 /= h;
    d2 /= h * h;
    d3 /= h * h * h;
    if (std::abs(d1) * h <= 1e-13 * std::max(scale, 1e-300))
        throw non_univalent_error("derivative vanishes: Schwarzian undefined here");
    const std::complex<double> ratio = d2 / d1;
    return d3 / d1 - 1.5 * ratio * ratio;
}

struct NormalFormFit {
    std::complex<double> C0;
    std::complex<double> C1;
    double residual;  // max relative misfit over the samples
    bool log_form;    // true when alpha = 0 (F = C0 log x + C1)
};

/**
 * Fits the local normal form of the developing map at cone point j:
 * F(x) = C0 x^alpha + C1 for alpha != 0, F(x) = C0 log x + C1 for
 * alpha = 0, where x is the offset from the cone point. F is sampled by
 * branch-tracked integration along a half circle of the given radius
 * (one sheet; a full circle would straddle the branch jump), normalized
 * to F = 0 at the first sample. Fails when the relative residual exceeds
 * 1e-3 or the leading coefficient degenerates.
 */
inline NormalFormFit fit_local_normal_form(const PrymDifferential& omega, std::size_t j,
                                           double radius, const QuadratureOptions& opts = {}) {
    const auto& pts = omega.finite_positions();
    const Complex center = pts.at(j);
    const double alpha = omega.alpha(j);
    if (!(radius > 0.0))
        throw validation_error("fit radius must be positive");
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts.size(); ++k)
        if (k != j) nearest = std::min(nearest, std::abs(pts[k] - center));
    if (nearest <= radius)
        throw validation_error("fit disk contains another cone point");

    const int m = 17;  // samples over the half circle
    const double dtheta = std::numbers::pi / (m - 1);
    const double clearance = 0.4 * std::min(radius, nearest - radius);

    std::vector<Complex> f_vals(m);
    std::vector<double> arg_track(m);
    Complex z_prev = center + Complex(radius, 0);
    BranchState branch = BranchState::principal(omega, z_prev);
    Complex accumulated(0, 0);
    f_vals[0] = accumulated;
    arg_track[0] = branch.args[j];
    for (int i = 1; i < m; ++i) {
        const Complex z_i = center + std::polar(radius, dtheta * i);
        Path chord({z_prev, z_i}, clearance);
        DevelopedValue dv = integrate_along_path(omega, chord, branch, opts);
        accumulated += dv.value;
        branch = dv.branch;
        f_vals[i] = accumulated;
        arg_track[i] = branch.args[j];
        z_prev = z_i;
    }

    const bool log_form = alpha == 0.0;
    std::vector<Complex> phi(m);
    const double log_r = std::log(radius);
    for (int i = 0; i < m; ++i) {
        const Complex log_x(log_r, arg_track[i]);
        phi[i] = log_form ? log_x : std::exp(alpha * log_x);
    }

    // least squares for F = C0*phi + C1 (2x2 normal equations)
    Complex s_pp(0, 0), s_p(0, 0), s_pf(0, 0), s_f(0, 0);
    for (int i = 0; i < m; ++i) {
        s_pp += std::conj(phi[i]) * phi[i];
        s_p += phi[i];
        s_pf += std::conj(phi[i]) * f_vals[i];
        s_f += f_vals[i];
    }
    const Complex det = s_pp * static_cast<double>(m) - std::conj(s_p) * s_p;
    if (std::abs(det) == 0.0)
        throw fit_error("normal-form sample matrix is singular");
    const Complex c0 = (s_pf * static_cast<double>(m) - std::conj(s_p) * s_f) / det;
    const Complex c1 = (s_pp * s_f - s_p * s_pf) / det;

    double max_misfit = 0.0, spread = 0.0;
    for (int i = 0; i < m; ++i) {
        max_misfit = std::max(max_misfit, std::abs(f_vals[i] - c0 * phi[i] - c1));
        spread = std::max(spread, std::abs(c0 * (phi[i] - phi[0])));
    }
    const double residual = max_misfit / std::max(spread, 1e-300);
    if (std::abs(c0) == 0.0)
        throw fit_error("leading normal-form coefficient vanished");
    if (residual > 1e-3)
        throw fit_error("normal-form fit residual exceeds 1e-3");
    return NormalFormFit{c0, c1, residual, log_form};
}

/**
 * Metric measurement of the cone angle at point j: the ratio
 * L(eps)/r(eps) of the circumference of the metric circle of coordinate
 * radius eps to the metric radius along a ray, which tends to
 * 2*pi*alpha_j. The ray direction is chosen to annul the first-order
 * variation of the regular factor, giving O(eps^2) convergence; the
 * radial integral uses the t = s^(1/alpha) endpoint substitution.
 * Requires alpha_j > 0; otherwise the cone point is infinitely far away.
 */
inline double cone_angle_measure(const PrymDifferential& omega, std::size_t j, double eps,
                                 const QuadratureOptions& opts = {}) {
    const auto& pts = omega.finite_positions();
    const Complex center = pts.at(j);
    const double alpha = omega.alpha(j);
    if (!(alpha > 0.0))
        throw divergent_integral_error("cone angle undefined for alpha <= 0 (infinite radius)");
    if (!(eps > 0.0))
        throw validation_error("measurement radius must be positive");
    for (std::size_t k = 0; k < pts.size(); ++k)
        if (k != j && std::abs(pts[k] - center) <= eps)
            throw validation_error("measurement disk contains another cone point");

    const double log_scale = std::log(std::abs(omega.scale()));
    const double two_pi = 2.0 * std::numbers::pi;

    // |f| on the circle of radius eps; the singular factor enters through
    // log(eps) explicitly.
    auto log_regular = [&](Complex offset) {
        double sum = log_scale;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (k == j) continue;
            sum += omega.exponent(k) * std::log(std::abs(center - pts[k] + offset));
        }
        return sum;
    };

    auto circumference_integrand = [&](double t) {
        const Complex offset = std::polar(eps, two_pi * t);
        const double log_f = (alpha - 1.0) * std::log(eps) + log_regular(offset);
        return Complex(two_pi * eps * std::exp(log_f), 0.0);
    };
    const double circumference = integrate_unit(circumference_integrand, opts).real();

    // Ray direction annulling Re(mu * e^{i theta}), mu the logarithmic
    // derivative of the regular factor at the cone point.
    Complex mu(0, 0);
    for (std::size_t k = 0; k < pts.size(); ++k)
        if (k != j) mu += omega.exponent(k) / (center - pts[k]);
    const double theta = (mu == Complex(0, 0)) ? 0.0 : 0.5 * std::numbers::pi - std::arg(mu);
    const Complex dir = std::polar(1.0, theta);

    auto radial_integrand = [&](double s) {
        const double t = eps * std::pow(s, 1.0 / alpha);
        return Complex(std::exp(log_regular(t * dir)), 0.0);
    };
    const double radius = std::pow(eps, alpha) / alpha * integrate_unit(radial_integrand, opts).real();
    return circumference / radius;
}

} // namespace flatcone
