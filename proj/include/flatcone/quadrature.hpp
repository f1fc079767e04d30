#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "flatcone/errors.hpp"

namespace flatcone {

struct QuadratureOptions {
    double rel_tol = 1e-10;  // relative tolerance on the accumulated integral
    int max_depth = 40;      // bisection depth limit per initial interval
};

namespace quad_detail {

// Gauss 7 / Kronrod 15 on [-1,1]. Positive abscissae; the rule is symmetric.
// Even-indexed Kronrod nodes are the Gauss nodes.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

template <typename F>
inline void gk15(F&& f, double a, double b, std::complex<double>& value, double& error) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::complex<double> kron = kKronrodWeights[7] * f(mid);
    std::complex<double> gauss = kGaussWeights[3] * f(mid);
    for (int i = 0; i < 7; ++i) {
        const std::complex<double> fsum = f(mid - half * kKronrodNodes[i]) + f(mid + half * kKronrodNodes[i]);
        kron += kKronrodWeights[i] * fsum;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * fsum;
    }
    value = kron * half;
    error = std::abs((kron - gauss) * half);
}

struct Interval {
    std::size_t job;
    double a, b;
    std::complex<double> value;
    double error;
    int depth;
};

struct ByError {
    bool operator()(const Interval& x, const Interval& y) const { return x.error < y.error; }
};

} // namespace quad_detail

/**
 * Globally adaptive Gauss-Kronrod integration of a family of integrands,
 * each over [0,1], refined jointly until the summed error estimate drops
 * below rel_tol times the accumulated magnitude. Throws convergence_error
 * when an interval would need bisection past max_depth.
 */
inline std::complex<double> integrate_jobs(
    std::span<const std::function<std::complex<double>(double)>> jobs,
    const QuadratureOptions& opts = {}) {
    using quad_detail::Interval;

    std::priority_queue<Interval, std::vector<Interval>, quad_detail::ByError> heap;
    std::complex<double> total(0, 0);
    double total_error = 0;
    double mass = 0;  // sum of per-interval magnitudes; scale for the relative test

    auto push = [&](std::size_t job, double a, double b, int depth) {
        Interval iv{job, a, b, {0, 0}, 0, depth};
        quad_detail::gk15(jobs[job], a, b, iv.value, iv.error);
        total += iv.value;
        total_error += iv.error;
        mass += std::abs(iv.value);
        heap.push(iv);
    };

    for (std::size_t j = 0; j < jobs.size(); ++j) push(j, 0.0, 1.0, 0);

    const double floor = 1e-300;
    std::size_t refinements = 0;
    const std::size_t refinement_cap = 2'000'000;
    while (total_error > opts.rel_tol * std::max(mass, floor)) {
        if (heap.empty()) break;
        Interval worst = heap.top();
        heap.pop();
        if (worst.depth >= opts.max_depth)
            throw convergence_error("adaptive quadrature did not converge within depth limit");
        if (++refinements > refinement_cap)
            throw convergence_error("adaptive quadrature exceeded refinement budget");
        total -= worst.value;
        total_error -= worst.error;
        mass -= std::abs(worst.value);
        const double mid = 0.5 * (worst.a + worst.b);
        push(worst.job, worst.a, mid, worst.depth + 1);
        push(worst.job, mid, worst.b, worst.depth + 1);
    }
    return total;
}

template <typename F>
inline std::complex<double> integrate_unit(F&& f, const QuadratureOptions& opts = {}) {
    std::function<std::complex<double>(double)> jobs[1] = {std::forward<F>(f)};
    return integrate_jobs(std::span<const std::function<std::complex<double>(double)>>(jobs, 1), opts);
}

// Real-valued convenience wrapper.
template <typename F>
inline double integrate_unit_real(F&& f, const QuadratureOptions& opts = {}) {
    return integrate_unit([&](double t) { return std::complex<double>(f(t), 0.0); }, opts).real();
}

} // namespace flatcone
