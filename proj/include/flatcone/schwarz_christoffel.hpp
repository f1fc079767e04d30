#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "flatcone/develop.hpp"
#include "flatcone/divisor.hpp"
#include "flatcone/errors.hpp"
#include "flatcone/prym.hpp"
#include "flatcone/quadrature.hpp"

namespace flatcone {

namespace sc_detail {

// Proper crossing test for closed segments [a1,b1], [a2,b2].
inline bool segments_intersect(Complex a1, Complex b1, Complex a2, Complex b2) {
    auto cross = [](Complex u, Complex v) { return u.real() * v.imag() - u.imag() * v.real(); };
    const double d1 = cross(b1 - a1, a2 - a1);
    const double d2 = cross(b1 - a1, b2 - a1);
    const double d3 = cross(b2 - a2, a1 - a2);
    const double d4 = cross(b2 - a2, b1 - a2);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return true;
    auto on_segment = [&](Complex a, Complex b, Complex p, double d) {
        if (d != 0) return false;
        return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
               std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
    };
    return on_segment(a1, b1, a2, d1) || on_segment(a1, b1, b2, d2) ||
           on_segment(a2, b2, a1, d3) || on_segment(a2, b2, b1, d4);
}

} // namespace sc_detail

/**
 * A bounded target polygon: counterclockwise vertices and the angle
 * fractions alpha_k (interior angle pi*alpha_k at vertex k; the cone
 * parameter of the induced flat metric). The fractions must close up:
 * sum alpha_k = n - 2.
 */
struct PolygonSpec {
    std::vector<Complex> vertices;
    std::vector<double> alphas;

    PolygonSpec(std::vector<Complex> verts, std::vector<double> fractions)
        : vertices(std::move(verts)), alphas(std::move(fractions)) {
        const std::size_t n = vertices.size();
        if (n < 3)
            throw validation_error("polygon needs at least three vertices");
        if (alphas.size() != n)
            throw validation_error("need one angle fraction per vertex");
        for (const Complex& v : vertices)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw validation_error("polygon vertices must be finite");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = i + 1; k < n; ++k)
                if (vertices[i] == vertices[k])
                    throw validation_error("polygon vertices must be pairwise distinct");
        double sum = 0.0;
        for (double a : alphas) sum += a;
        if (std::abs(sum - (static_cast<double>(n) - 2.0)) > 1e-9)
            throw validation_error("angle fractions must sum to n - 2");
        // simple boundary: no two non-adjacent sides may touch
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = i + 1; k < n; ++k) {
                if (k == i + 1 || (i == 0 && k == n - 1)) continue;
                if (sc_detail::segments_intersect(vertices[i], vertices[(i + 1) % n],
                                                  vertices[k], vertices[(k + 1) % n]))
                    throw validation_error("polygon boundary is not simple");
            }
        }
        double area2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Complex a = vertices[i], b = vertices[(i + 1) % n];
            area2 += a.real() * b.imag() - b.real() * a.imag();
        }
        if (area2 <= 0.0)
            throw validation_error("polygon vertices must be counterclockwise");
    }

    std::size_t size() const { return vertices.size(); }

    // Euclidean side lengths |v_{k+1} - v_k|, cyclic.
    std::vector<double> side_lengths() const {
        std::vector<double> out(vertices.size());
        for (std::size_t k = 0; k < vertices.size(); ++k)
            out[k] = std::abs(vertices[(k + 1) % vertices.size()] - vertices[k]);
        return out;
    }
};

/**
 * Prevertices on the boundary of the upper half-plane: n-1 strictly
 * increasing reals, normalized to x_1 = 0 and x_2 = 1, with the n-th
 * prevertex at infinity (the three Moebius degrees of freedom).
 */
struct PrevertexConfig {
    std::vector<double> finite;  // size n-1

    explicit PrevertexConfig(std::vector<double> xs) : finite(std::move(xs)) {
        if (finite.size() < 2)
            throw validation_error("need at least two finite prevertices");
        if (finite[0] != 0.0 || finite[1] != 1.0)
            throw validation_error("prevertices must be normalized to x1 = 0, x2 = 1");
        for (std::size_t i = 0; i + 1 < finite.size(); ++i)
            if (!(finite[i] < finite[i + 1]))
                throw validation_error("prevertices must be strictly increasing");
        for (double x : finite)
            if (!std::isfinite(x))
                throw validation_error("prevertices must be finite reals");
    }

    std::size_t polygon_size() const { return finite.size() + 1; }
};

// Vertices whose fraction equals one are smooth points, not corners; a
// polygon listing one is degenerate. Returns the offending indices.
inline std::vector<std::size_t> smooth_vertices(std::span<const double> alphas) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < alphas.size(); ++k)
        if (alphas[k] == 1.0) out.push_back(k);
    return out;
}

namespace sc_detail {

inline void check_fractions(const PrevertexConfig& cfg, std::span<const double> alphas) {
    const std::size_t n = cfg.polygon_size();
    if (alphas.size() != n)
        throw validation_error("need one angle fraction per prevertex (incl. infinity)");
    double finite_sum = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) finite_sum += alphas[k];
    if (std::abs(alphas[n - 1] - (static_cast<double>(n) - 2.0 - finite_sum)) > 1e-9)
        throw validation_error("angle fraction at infinity is inconsistent with closure");
}

// The differential prod (t - x_k)^(alpha_k - 1) dt over the finite
// prevertices, rotated so the integrand is positive real on (x_1, x_2):
// the first developed side runs along the positive axis. Prevertices with
// fraction 1 are smooth points and contribute no factor.
inline PrymDifferential half_plane_differential(const PrevertexConfig& cfg,
                                                std::span<const double> alphas) {
    std::vector<ConePoint> pts;
    pts.reserve(cfg.finite.size());
    for (std::size_t k = 0; k < cfg.finite.size(); ++k)
        if (alphas[k] != 1.0)
            pts.emplace_back(SpherePoint::at(Complex(cfg.finite[k], 0.0)),
                             ExactReal::from_double(alphas[k]));
    double phase = 0.0;
    for (std::size_t k = 1; k < cfg.finite.size(); ++k)
        phase += (alphas[k] - 1.0) * std::numbers::pi;
    return PrymDifferential(complete_at_infinity(Divisor(std::move(pts))),
                            std::exp(Complex(0.0, -phase)));
}

// Positive integrand |prod (t - x_k)^(alpha_k - 1)| on the real segment
// (lo, hi) between consecutive prevertices, integrated with the endpoint
// substitution on each half. `exclude_lo/hi` name the singular factors
// handled analytically.
inline double singular_side_integral(std::span<const double> xs, std::span<const double> alphas,
                                     double lo, double hi, long k_lo, long k_hi,
                                     const QuadratureOptions& opts) {
    const double mid = 0.5 * (lo + hi);
    auto log_regular = [&](double t, long skip) {
        double sum = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (static_cast<long>(k) == skip) continue;
            sum += (alphas[k] - 1.0) * std::log(std::abs(t - xs[k]));
        }
        return sum;
    };
    std::vector<std::function<Complex(double)>> jobs;
    // half [lo, mid]: t = lo + (mid - lo) s^(1/a); the singular power of s
    // cancels the Jacobian exactly.
    {
        const double a = alphas[static_cast<std::size_t>(k_lo)];
        const double width = mid - lo;
        jobs.push_back([log_regular, lo, width, a, k_lo](double s) {
            const double t = lo + width * std::pow(s, 1.0 / a);
            const double log_f = log_regular(t, k_lo);
            return Complex(std::pow(width, a) / a * std::exp(log_f), 0.0);
        });
    }
    {
        const double a = alphas[static_cast<std::size_t>(k_hi)];
        const double width = hi - mid;
        jobs.push_back([log_regular, hi, width, a, k_hi](double s) {
            const double t = hi - width * std::pow(s, 1.0 / a);
            const double log_f = log_regular(t, k_hi);
            return Complex(std::pow(width, a) / a * std::exp(log_f), 0.0);
        });
    }
    return integrate_jobs(jobs, opts).real();
}

} // namespace sc_detail

/**
 * The generalized half-plane-to-polygon map
 *
 *     F(z) = int_{x_1}^{z} prod_k (t - x_k)^(alpha_k - 1) dt
 *
 * for z in the closed upper half-plane, on the branch that is principal
 * left of x_1 and continued through the upper half-plane, rotated so the
 * side (x_1, x_2) develops along the positive real axis. F(x_1) = 0.
 * z may be a prevertex only when its fraction is positive.
 */
inline Complex sc_forward(const PrevertexConfig& cfg, std::span<const double> alphas, Complex z,
                          const QuadratureOptions& opts = {}) {
    sc_detail::check_fractions(cfg, alphas);
    if (z.imag() < 0.0)
        throw validation_error("forward map takes points of the closed upper half-plane");
    const PrymDifferential omega = sc_detail::half_plane_differential(cfg, alphas);
    const auto& xs = cfg.finite;
    const Complex x1(xs[0], 0.0);
    if (z == x1) return Complex(0, 0);

    double min_gap = xs[1] - xs[0];
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) min_gap = std::min(min_gap, xs[i + 1] - xs[i]);
    const double lift = 0.5 * min_gap;
    const double clearance = default_clearance(omega.finite_positions());
    const Complex p1 = x1 + Complex(0.0, lift);

    // In the upper half-plane the continued branch is the principal one.
    const BranchState at_p1 = BranchState::principal(omega, p1);

    // Leg out of the (possibly singular) base prevertex.
    Complex value(0, 0);
    if (alphas[0] == 1.0) {
        value = integrate_along_path(omega, Path({x1, p1}, clearance),
                                     BranchState::principal(omega, x1), opts)
                    .value;
    } else {
        if (!(alphas[0] > 0.0))
            throw divergent_integral_error("base prevertex carries a nonpositive fraction");
        value = -integrate_to_cone_point(omega, Path({p1, x1}, clearance), at_p1, opts);
    }
    if (z == p1) return value;

    // Route through the upper half-plane; descend vertically when the
    // target sits below the lift height.
    std::vector<Complex> route{p1};
    if (z.imag() >= lift) {
        route.push_back(z);
    } else {
        const Complex overhead(z.real(), lift);
        if (overhead != p1) route.push_back(overhead);
        route.push_back(z);
    }

    // A target on a singular prevertex needs the endpoint-weighted rule;
    // a fraction-1 prevertex is an ordinary smooth point.
    long k_target = -1;
    if (z.imag() == 0.0)
        for (std::size_t k = 0; k < xs.size(); ++k)
            if (xs[k] == z.real()) k_target = static_cast<long>(k);
    if (k_target >= 0 && alphas[static_cast<std::size_t>(k_target)] != 1.0) {
        if (!(alphas[static_cast<std::size_t>(k_target)] > 0.0))
            throw divergent_integral_error("target prevertex carries a nonpositive fraction");
        value += integrate_to_cone_point(omega, Path(route, clearance), at_p1, opts);
    } else {
        value += integrate_along_path(omega, Path(route, clearance), at_p1, opts).value;
    }
    return value;
}

/**
 * Developed lengths of the n-1 polygon sides whose prevertex segments are
 * [x_k, x_{k+1}] and [x_{n-1}, +inf); the remaining side through infinity
 * is fixed by closure. Requires every finite fraction positive (bounded
 * polygon). The unbounded segment is mapped to w = 1/t, which turns the
 * prevertex at infinity into an ordinary endpoint singularity of
 * exponent alpha_n.
 */
inline std::vector<double> sc_side_lengths(const PrevertexConfig& cfg,
                                           std::span<const double> alphas,
                                           const QuadratureOptions& opts = {}) {
    sc_detail::check_fractions(cfg, alphas);
    const auto& xs = cfg.finite;
    const std::size_t n = cfg.polygon_size();
    for (std::size_t k = 0; k < n; ++k)
        if (!(alphas[k] > 0.0))
            throw validation_error("side lengths require every fraction positive");

    std::vector<double> sides;
    sides.reserve(n - 1);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k)
        sides.push_back(sc_detail::singular_side_integral(xs, alphas, xs[k], xs[k + 1],
                                                          static_cast<long>(k),
                                                          static_cast<long>(k + 1), opts));

    // Side [x_{n-1}, inf): in w = 1/t the integrand is
    // w^(alpha_n - 1) * prod |1 - x_k w|^(alpha_k - 1) on (0, 1/x_{n-1}].
    {
        const double x_last = xs.back();
        const double w_hi = 1.0 / x_last;
        const double a_inf = alphas[n - 1];
        const double a_last = alphas[xs.size() - 1];
        const double mid = 0.5 * w_hi;
        auto log_regular = [&xs, &alphas, x_last](double w, bool skip_last) {
            double sum = 0.0;
            for (std::size_t k = 0; k < xs.size(); ++k) {
                if (skip_last && k + 1 == xs.size()) continue;
                sum += (alphas[k] - 1.0) * std::log(std::abs(1.0 - xs[k] * w));
            }
            return sum;
        };
        std::vector<std::function<Complex(double)>> jobs;
        jobs.push_back([log_regular, mid, a_inf](double s) {
            const double w = mid * std::pow(s, 1.0 / a_inf);
            return Complex(std::pow(mid, a_inf) / a_inf * std::exp(log_regular(w, false)), 0.0);
        });
        jobs.push_back([log_regular, mid, w_hi, x_last, a_last](double s) {
            const double width = w_hi - mid;
            const double w = w_hi - width * std::pow(s, 1.0 / a_last);
            // |1 - x_last w| = x_last * (w_hi - w); the singular power of s
            // cancels the Jacobian, leaving the explicit width^a prefactor.
            double log_f = (a_last - 1.0) * std::log(x_last) + log_regular(w, true);
            log_f += (a_inf - 1.0) * std::log(w);
            return Complex(std::pow(width, a_last) / a_last * std::exp(log_f), 0.0);
        });
        sides.push_back(integrate_jobs(jobs, opts).real());
    }
    return sides;
}

struct ScSolveOptions {
    double tol = 1e-8;   // max relative side-ratio mismatch
    int max_iters = 200;
    QuadratureOptions quad{1e-10, 40};
    std::vector<double> initial_gaps;  // override of the default initial guess
};

struct ScSolveResult {
    PrevertexConfig prevertices;
    double residual;  // max relative ratio mismatch at exit
    int iterations;
};

namespace sc_detail {

// Gaussian elimination with partial pivoting for the tiny normal systems
// of the parameter problem.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        if (a[col][col] == 0.0)
            throw convergence_error("singular normal equations in prevertex solve");
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

inline PrevertexConfig config_from_gaps(std::span<const double> y) {
    std::vector<double> xs{0.0, 1.0};
    double x = 1.0;
    for (double yi : y) {
        x += std::exp(yi);
        xs.push_back(x);
    }
    return PrevertexConfig(std::move(xs));
}

} // namespace sc_detail

/**
 * The prevertex parameter problem: finds the configuration whose developed
 * side-length ratios match the target polygon's. The unknowns are the log
 * gaps y_k = log(x_{k+1} - x_k) past the two pinned prevertices — an
 * unconstrained parametrization that keeps the ordering by construction —
 * solved by damped Gauss-Newton least squares on the ratio mismatches.
 * Only ratios enter, so the solution is invariant under similarity
 * transformations of the target. Triangles have no unknowns and return
 * immediately.
 */
inline ScSolveResult sc_solve_parameters(const PolygonSpec& poly, const ScSolveOptions& opts = {}) {
    const std::size_t n = poly.size();
    for (double a : poly.alphas)
        if (!(a > 0.0 && a < 2.0))
            throw validation_error("parameter problem requires fractions in (0, 2)");

    const std::vector<double> target = poly.side_lengths();
    std::vector<double> ratios(n - 2);  // target ratios L_k / L_0, k = 1..n-2
    for (std::size_t k = 1; k + 1 < n; ++k) ratios[k - 1] = target[k] / target[0];

    auto mismatch = [&](const std::vector<double>& sides) {
        double worst = 0.0;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            const double r = sides[k] / sides[0];
            worst = std::max(worst, std::abs(r - ratios[k - 1]) / ratios[k - 1]);
        }
        return worst;
    };
    auto residual_vec = [&](std::span<const double> y) {
        const PrevertexConfig cfg = sc_detail::config_from_gaps(y);
        const std::vector<double> sides = sc_side_lengths(cfg, poly.alphas, opts.quad);
        std::vector<double> r(n - 2);
        for (std::size_t k = 1; k + 1 < n; ++k)
            r[k - 1] = sides[k] / sides[0] - ratios[k - 1];
        return r;
    };

    if (n == 3) {
        PrevertexConfig cfg({0.0, 1.0});
        const double res = mismatch(sc_side_lengths(cfg, poly.alphas, opts.quad));
        return ScSolveResult{cfg, res, 0};
    }

    // Initial guess: tangent-stretched spacing rescaled to x_2 = 1.
    std::vector<double> y(n - 3);
    if (!opts.initial_gaps.empty()) {
        if (opts.initial_gaps.size() != n - 3)
            throw validation_error("initial gap override has the wrong size");
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(opts.initial_gaps[i]);
    } else {
        std::vector<double> guess(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k)
            guess[k] = std::tan(std::numbers::pi * static_cast<double>(k) /
                                (2.0 * static_cast<double>(n - 1)));
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = std::log((guess[i + 2] - guess[i + 1]) / guess[1]);
    }

    const std::size_t m = n - 2, p = n - 3;
    std::vector<double> r = residual_vec(y);
    double current = 0.0;
    for (std::size_t k = 0; k < m; ++k)
        current = std::max(current, std::abs(r[k]) / ratios[k]);

    double lambda = 1e-3;
    int iter = 0;
    for (; iter < opts.max_iters && current > opts.tol; ++iter) {
        // forward-difference Jacobian
        std::vector<std::vector<double>> jac(m, std::vector<double>(p));
        for (std::size_t c = 0; c < p; ++c) {
            const double step = 1e-6 * std::max(1.0, std::abs(y[c]));
            std::vector<double> yp = y;
            yp[c] += step;
            const std::vector<double> rp = residual_vec(yp);
            for (std::size_t row = 0; row < m; ++row) jac[row][c] = (rp[row] - r[row]) / step;
        }
        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            std::vector<std::vector<double>> jtj(p, std::vector<double>(p, 0.0));
            std::vector<double> jtr(p, 0.0);
            for (std::size_t row = 0; row < m; ++row)
                for (std::size_t c = 0; c < p; ++c) {
                    jtr[c] += jac[row][c] * r[row];
                    for (std::size_t c2 = 0; c2 < p; ++c2) jtj[c][c2] += jac[row][c] * jac[row][c2];
                }
            for (std::size_t c = 0; c < p; ++c) jtj[c][c] += lambda * std::max(jtj[c][c], 1e-12);
            std::vector<double> rhs(p);
            for (std::size_t c = 0; c < p; ++c) rhs[c] = -jtr[c];
            const std::vector<double> delta = sc_detail::solve_dense(jtj, rhs);
            std::vector<double> y_new = y;
            for (std::size_t c = 0; c < p; ++c) y_new[c] += delta[c];
            const std::vector<double> r_new = residual_vec(y_new);
            double next = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                next = std::max(next, std::abs(r_new[k]) / ratios[k]);
            if (next < current) {
                y = std::move(y_new);
                r = r_new;
                current = next;
                lambda = std::max(lambda * 0.5, 1e-12);
                accepted = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted)
            throw convergence_error("prevertex solver stalled (damping exhausted)");
    }
    if (current > opts.tol)
        throw convergence_error("prevertex solver did not reach tolerance in max_iters");
    return ScSolveResult{sc_detail::config_from_gaps(y), current, iter};
}

} // namespace flatcone
