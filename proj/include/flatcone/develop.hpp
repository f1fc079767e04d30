#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "flatcone/errors.hpp"
#include "flatcone/path.hpp"
#include "flatcone/prym.hpp"
#include "flatcone/quadrature.hpp"

namespace flatcone {

/**
 * An orientation-preserving isometry of the flat plane, z -> rho*z + w
 * with |rho| = 1. These are the monodromy transformations of developing
 * maps for flat conical metrics.
 */
struct AffineIsometry {
    Complex rotation;
    Complex translation;

    AffineIsometry(Complex rho, Complex w) : rotation(rho), translation(w) {
        if (std::abs(std::abs(rho) - 1.0) > 1e-10)
            throw validation_error("isometry rotation factor must have unit modulus");
    }

    Complex apply(Complex z) const { return rotation * z + translation; }

    // Composition this after inner: z -> this(inner(z)).
    AffineIsometry compose(const AffineIsometry& inner) const {
        return AffineIsometry(rotation * inner.rotation,
                              rotation * inner.translation + translation);
    }
};

struct DevelopedValue {
    Complex value;
    BranchState branch;
};

namespace develop_detail {

// Maximal continuation step: every sub-segment must turn each tracked
// argument by less than pi/2, a safety factor of 4 under the pi ambiguity
// bound of the principal ratio argument.
inline constexpr double kMaxTurn = std::numbers::pi / 2.0;

struct BranchedSegment {
    Complex a, b;
    std::vector<double> args_a;  // tracked arguments at `a`
};

// Splits [a, b] until each piece turns every argument by < pi/2, appending
// pieces and advancing `args` to the segment end.
inline void split_segment(const PrymDifferential& omega, Complex a, Complex b,
                          std::vector<double>& args, std::vector<BranchedSegment>& out,
                          int depth = 0) {
    if (depth > 60)
        throw clearance_error("branch continuation could not isolate a cone point");
    const auto& pts = omega.finite_positions();
    bool ok = true;
    for (const Complex& p : pts) {
        if (std::abs(segment_turn(a, b, p)) >= kMaxTurn) {
            ok = false;
            break;
        }
    }
    if (ok) {
        out.push_back(BranchedSegment{a, b, args});
        for (std::size_t j = 0; j < pts.size(); ++j) args[j] += segment_turn(a, b, pts[j]);
        return;
    }
    const Complex mid = 0.5 * (a + b);
    split_segment(omega, a, mid, args, out, depth + 1);
    split_segment(omega, mid, b, args, out, depth + 1);
}

inline void require_branch_at(const BranchState& b, const PrymDifferential& omega, Complex z) {
    if (b.args.size() != omega.finite_count())
        throw validation_error("branch state does not match this differential");
    if (std::abs(b.base - z) > 1e-9 * (1.0 + std::abs(z)))
        throw validation_error("branch state is anchored at a different point");
}

// Pieces for the whole polyline; `args` ends up at the path terminus.
inline std::vector<BranchedSegment> build_pieces(const PrymDifferential& omega, const Path& path,
                                                 const BranchState& b0, std::vector<double>& args,
                                                 std::size_t segment_end) {
    require_branch_at(b0, omega, path.waypoints.front());
    args = b0.args;
    std::vector<BranchedSegment> pieces;
    for (std::size_t s = 0; s + 1 < segment_end; ++s) {
        if (path.waypoints[s + 1] == path.waypoints[s]) continue;
        split_segment(omega, path.waypoints[s], path.waypoints[s + 1], args, pieces);
    }
    return pieces;
}

inline std::function<Complex(double)> piece_job(const PrymDifferential& omega,
                                                const BranchedSegment& piece) {
    return [&omega, piece](double t) {
        const Complex d = piece.b - piece.a;
        const Complex z = piece.a + t * d;
        return prym_detail::evaluate_on_segment(omega, piece.a, piece.args_a, z) * d;
    };
}

} // namespace develop_detail

/**
 * Analytic continuation of the branch along a path: each tracked argument
 * accumulates the exact turn of (z - P_j), with automatic subdivision so
 * no piece turns any argument by pi/2 or more. Homotopy invariant.
 */
inline BranchState continue_branch(const PrymDifferential& omega, const Path& path,
                                   const BranchState& b0) {
    check_admissible(path, omega.finite_positions());
    std::vector<double> args;
    develop_detail::build_pieces(omega, path, b0, args, path.waypoints.size());
    return BranchState{path.waypoints.back(), std::move(args)};
}

/**
 * The developing-map displacement int_path f dz on the branch continued
 * from b0, by adaptive quadrature with relative tolerance opts.rel_tol.
 * Returns the displacement and the branch at the path end.
 */
inline DevelopedValue integrate_along_path(const PrymDifferential& omega, const Path& path,
                                           const BranchState& b0,
                                           const QuadratureOptions& opts = {}) {
    check_admissible(path, omega.finite_positions());
    std::vector<double> args;
    const auto pieces = develop_detail::build_pieces(omega, path, b0, args, path.waypoints.size());
    std::vector<std::function<Complex(double)>> jobs;
    jobs.reserve(pieces.size());
    for (const auto& piece : pieces) jobs.push_back(develop_detail::piece_job(omega, piece));
    const Complex value = integrate_jobs(jobs, opts);
    return DevelopedValue{value, BranchState{path.waypoints.back(), std::move(args)}};
}

/**
 * Improper developing-map integral into cone point j, which must be the
 * terminal waypoint and carry alpha_j > 0 (otherwise the point lies at
 * infinite distance and the integral diverges). The terminal stretch uses
 * the substitution t = s^(1/alpha_j); the substituted integrand is
 * bounded, the singular power of s cancelling exactly against the
 * Jacobian in log space.
 */
inline Complex integrate_to_cone_point(const PrymDifferential& omega, const Path& path,
                                       const BranchState& b0, const QuadratureOptions& opts = {}) {
    const auto& pts = omega.finite_positions();
    const Complex target = path.waypoints.back();
    long j = -1;
    for (std::size_t k = 0; k < pts.size(); ++k)
        if (pts[k] == target) j = static_cast<long>(k);
    if (j < 0)
        throw validation_error("terminal waypoint is not a cone point of the differential");
    const double alpha = omega.alpha(static_cast<std::size_t>(j));
    if (!(alpha > 0.0))
        throw divergent_integral_error("cone point with alpha <= 0 lies at infinite distance");
    check_admissible(path, pts, j);

    // Regular pieces up to the last waypoint before the target.
    std::vector<double> args;
    auto pieces = develop_detail::build_pieces(omega, path, b0, args, path.waypoints.size() - 1);

    // Shrink the straight approach [m, target] until every *other* point
    // turns by < pi/2 on it; the turn of (z - P_j) itself is zero along
    // the ray. The regular prefix joins the piece list.
    Complex m = path.waypoints[path.waypoints.size() - 2];
    if (m == target)
        throw validation_error("terminal segment of a cone-point integral has zero length");
    for (int guard = 0;; ++guard) {
        if (guard > 200)
            throw clearance_error("could not isolate the terminal cone point");
        bool ok = true;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (static_cast<long>(k) == j) continue;
            if (std::abs(segment_turn(m, target, pts[k])) >= develop_detail::kMaxTurn) {
                ok = false;
                break;
            }
        }
        if (ok) break;
        const Complex mid = 0.5 * (m + target);
        develop_detail::split_segment(omega, m, mid, args, pieces);
        m = mid;
    }

    std::vector<std::function<Complex(double)>> jobs;
    jobs.reserve(pieces.size() + 1);
    for (const auto& piece : pieces) jobs.push_back(develop_detail::piece_job(omega, piece));

    // Terminal singular piece in the substituted variable. With
    // z(t) = target + t*(m - target) and t = s^(1/alpha),
    //   int_m^target f dz = -(m - target)/alpha * int_0^1 exp(E(s)) ds,
    // where E collects the scale, the fixed singular factor
    // (alpha-1)*log(m - target) on this branch, and the regular factors.
    const Complex ray = m - target;
    const double arg_j = args[static_cast<std::size_t>(j)];  // constant along the ray
    const Complex prefactor = -ray / alpha;
    const std::vector<double> args_m = args;
    jobs.push_back([&omega, j, alpha, ray, arg_j, prefactor, args_m, m, target](double s) {
        const auto& p = omega.finite_positions();
        const double t = std::pow(s, 1.0 / alpha);
        const Complex z = target + t * ray;
        Complex log_sum = std::log(omega.scale());
        log_sum += (alpha - 1.0) * Complex(std::log(std::abs(ray)), arg_j);
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (static_cast<long>(k) == j) continue;
            const Complex dz = z - p[k];
            const double a_k = args_m[k] + segment_turn(m, z, p[k]);
            log_sum += omega.exponent(k) * Complex(std::log(std::abs(dz)), a_k);
        }
        return prefactor * std::exp(log_sum);
    });

    return integrate_jobs(jobs, opts);
}

struct MonodromyResult {
    AffineIsometry transform;
    Complex predicted_rotation;  // exp(2*pi*i * sum of enclosed alpha_j)
    std::vector<long> windings;  // per finite cone point
};

/**
 * Monodromy of the developing map around a closed loop: continues F
 * around the loop and solves F_after = rho * F_before + w from the values
 * at two probe points. Default probes sit at distance 0.1 and 0.2 along
 * the outward normal at the loop start. The winding numbers of the loop
 * give the independent prediction rho = exp(2*pi*i * sum alpha_j).
 */
inline MonodromyResult monodromy(const PrymDifferential& omega, const Path& loop,
                                 const BranchState& b0, std::vector<Complex> probes = {},
                                 const QuadratureOptions& opts = {}) {
    if (!loop.closed())
        throw validation_error("monodromy requires a closed loop");
    const Complex z0 = loop.waypoints.front();

    if (probes.empty()) {
        const Complex dir = loop.waypoints[1] - z0;
        if (dir == Complex(0, 0))
            throw validation_error("degenerate first segment of monodromy loop");
        const Complex u = dir / std::abs(dir);
        double area2 = 0.0;
        for (std::size_t s = 0; s + 1 < loop.waypoints.size(); ++s) {
            const Complex a = loop.waypoints[s], b = loop.waypoints[s + 1];
            area2 += a.real() * b.imag() - b.real() * a.imag();
        }
        const Complex outward = (area2 >= 0.0 ? Complex(0, -1) : Complex(0, 1)) * u;
        probes = {z0 + 0.1 * outward, z0 + 0.2 * outward};
    }
    if (probes.size() < 2)
        throw validation_error("monodromy needs at least two probe points");

    // The unit-modulus gate on the resulting rotation sits at 1e-10, so the
    // probe and loop integrals run tighter than the caller's tolerance.
    QuadratureOptions tight = opts;
    tight.rel_tol = std::min(opts.rel_tol, 1e-12);

    const BranchState b1 = continue_branch(omega, loop, b0);
    const Complex loop_integral = integrate_along_path(omega, loop, b0, tight).value;

    auto develop_probe = [&](const BranchState& branch, Complex probe) {
        Path leg({z0, probe}, loop.clearance);
        return integrate_along_path(omega, leg, branch, tight).value;
    };
    const Complex before_1 = develop_probe(b0, probes[0]);
    const Complex before_2 = develop_probe(b0, probes[1]);
    const Complex after_1 = loop_integral + develop_probe(b1, probes[0]);
    const Complex after_2 = loop_integral + develop_probe(b1, probes[1]);

    const Complex denom = before_1 - before_2;
    if (std::abs(denom) < 1e-14 * (std::abs(before_1) + std::abs(before_2) + 1e-300))
        throw validation_error("monodromy probe system is singular (probes coincide)");
    const Complex rho = (after_1 - after_2) / denom;
    const Complex w = after_1 - rho * before_1;

    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<long> windings(omega.finite_count());
    double enclosed_alpha = 0.0;
    for (std::size_t j = 0; j < windings.size(); ++j) {
        windings[j] = std::lround((b1.args[j] - b0.args[j]) / two_pi);
        enclosed_alpha += static_cast<double>(windings[j]) * omega.alpha(j);
    }
    const Complex predicted = std::exp(Complex(0, two_pi * enclosed_alpha));
    return MonodromyResult{AffineIsometry(rho, w), predicted, std::move(windings)};
}

/**
 * Developing-map samples at n parameter points spaced evenly in arclength
 * along the path, cumulative and branch-consistent, normalized so the
 * first sample is exactly zero.
 */
inline std::vector<std::pair<Complex, Complex>> develop_samples(const PrymDifferential& omega,
                                                                const Path& path, std::size_t n,
                                                                const QuadratureOptions& opts = {}) {
    if (n < 2)
        throw validation_error("need at least two samples");
    check_admissible(path, omega.finite_positions());

    const double total = path.length();
    std::vector<std::pair<Complex, Complex>> samples;
    samples.reserve(n);
    samples.emplace_back(path.waypoints.front(), Complex(0, 0));

    BranchState branch = BranchState::principal(omega, path.waypoints.front());

    Complex accumulated(0, 0);
    std::size_t seg = 0;
    double seg_start = 0.0;  // arclength at waypoint `seg`
    Complex cursor = path.waypoints.front();

    for (std::size_t k = 1; k < n; ++k) {
        const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
        // advance through waypoints until the segment containing `target`
        std::vector<Complex> leg{cursor};
        while (true) {
            const Complex a = path.waypoints[seg];
            const Complex b = path.waypoints[seg + 1];
            const double seg_len = std::abs(b - a);
            if (seg_start + seg_len >= target || seg + 2 == path.waypoints.size()) {
                const double along = seg_len == 0.0 ? 0.0
                                                    : std::min(1.0, (target - seg_start) / seg_len);
                Complex stop = a + along * (b - a);
                if (k == n - 1) stop = path.waypoints.back();
                if (stop != leg.back()) leg.push_back(stop);
                cursor = stop;
                break;
            }
            seg_start += seg_len;
            ++seg;
            if (b != leg.back()) leg.push_back(b);
        }
        if (leg.size() >= 2) {
            Path sub(leg, path.clearance);
            DevelopedValue dv = integrate_along_path(omega, sub, branch, opts);
            accumulated += dv.value;
            branch = dv.branch;
        }
        samples.emplace_back(cursor, accumulated);
    }
    return samples;
}

} // namespace flatcone
