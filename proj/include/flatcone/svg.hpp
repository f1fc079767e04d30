#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "flatcone/divisor.hpp"
#include "flatcone/errors.hpp"
#include "flatcone/json_io.hpp"

namespace flatcone {

struct SvgStyle {
    std::string stroke = "#1f77b4";
    double stroke_width_fraction = 0.005;  // of the bounding-box diagonal
};

/**
 * A single polyline through the given samples, y-axis flipped to render
 * mathematical orientation, viewBox fitted with a 5% margin of the
 * bounding-box diagonal. Coordinates are quantized to 1e-6 of the
 * diagonal so reruns emit identical bytes. A degenerate bounding box
 * (all samples equal) is an error.
 */
inline std::string emit_svg(std::span<const Complex> samples, const SvgStyle& style = {}) {
    if (samples.size() < 2)
        throw validation_error("svg polyline needs at least two samples");
    double min_x = samples[0].real(), max_x = min_x;
    double min_y = -samples[0].imag(), max_y = min_y;
    for (const Complex& z : samples) {
        min_x = std::min(min_x, z.real());
        max_x = std::max(max_x, z.real());
        min_y = std::min(min_y, -z.imag());
        max_y = std::max(max_y, -z.imag());
    }
    const double diag = std::hypot(max_x - min_x, max_y - min_y);
    if (!(diag > 0.0))
        throw validation_error("svg bounding box is degenerate");
    const double quantum = 1e-6 * diag;
    auto snap = [quantum](double v) { return std::round(v / quantum) * quantum; };
    const double margin = 0.05 * diag;

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"";
    out += format_double(snap(min_x - margin)) + " " + format_double(snap(min_y - margin)) + " " +
           format_double(snap(max_x - min_x + 2 * margin)) + " " +
           format_double(snap(max_y - min_y + 2 * margin)) + "\">\n";
    out += "  <polyline fill=\"none\" stroke=\"" + style.stroke + "\" stroke-width=\"" +
           format_double(style.stroke_width_fraction * diag) + "\" points=\"";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i) out += ' ';
        out += format_double(snap(samples[i].real())) + "," + format_double(snap(-samples[i].imag()));
    }
    out += "\"/>\n</svg>\n";
    return out;
}

} // namespace flatcone
