#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "flatcone/divisor.hpp"
#include "flatcone/errors.hpp"

namespace flatcone {

// Default clearance for a configuration of cone points:
// 1e-6 * (diameter of the point set + 1).
inline double default_clearance(std::span<const Complex> cone_points) {
    double diam = 0.0;
    for (std::size_t i = 0; i < cone_points.size(); ++i)
        for (std::size_t j = i + 1; j < cone_points.size(); ++j)
            diam = std::max(diam, std::abs(cone_points[i] - cone_points[j]));
    return 1e-6 * (diam + 1.0);
}

// Distance from point p to the closed segment [a, b].
inline double segment_point_distance(Complex a, Complex b, Complex p) {
    const Complex d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    double t = ((p.real() - a.real()) * d.real() + (p.imag() - a.imag()) * d.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

// Continuous change of arg(z - p) along the straight segment a -> b.
// On a segment avoiding p the turn is monotone and below pi in magnitude,
// so the principal argument of the ratio is the exact value.
inline double segment_turn(Complex a, Complex b, Complex p) {
    return std::arg((b - p) / (a - p));
}

/**
 * A piecewise-linear path with a clearance contract: every segment must
 * keep at least `clearance` away from every finite cone point it is used
 * against (the one sanctioned exception being the terminal point of an
 * integration that ends on a cone point).
 */
struct Path {
    std::vector<Complex> waypoints;
    double clearance = 0.0;

    Path(std::vector<Complex> wp, double clear) : waypoints(std::move(wp)), clearance(clear) {
        if (waypoints.size() < 2)
            throw validation_error("path needs at least two waypoints");
        if (!(clearance > 0.0) || !std::isfinite(clearance))
            throw validation_error("path clearance must be positive");
        for (const Complex& z : waypoints)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw validation_error("path waypoints must be finite");
    }

    bool closed() const { return waypoints.front() == waypoints.back(); }

    double length() const {
        double L = 0.0;
        for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
            L += std::abs(waypoints[i + 1] - waypoints[i]);
        return L;
    }

    Path reversed() const {
        std::vector<Complex> wp(waypoints.rbegin(), waypoints.rend());
        return Path(std::move(wp), clearance);
    }
};

/**
 * Checks the clearance contract of `path` against `points`. When
 * `relaxed_point` is nonnegative, that point is exempted on the final
 * segment only (it is allowed to be the terminal waypoint).
 */
inline void check_admissible(const Path& path, std::span<const Complex> points,
                             long relaxed_point = -1) {
    const auto& wp = path.waypoints;
    for (std::size_t s = 0; s + 1 < wp.size(); ++s) {
        const bool terminal = (s + 2 == wp.size());
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (terminal && static_cast<long>(k) == relaxed_point) continue;
            if (segment_point_distance(wp[s], wp[s + 1], points[k]) < path.clearance)
                throw clearance_error("path segment violates clearance around a cone point");
        }
    }
}

} // namespace flatcone
