#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <json.hpp>

#include "flatcone/divisor.hpp"
#include "flatcone/errors.hpp"
#include "flatcone/path.hpp"
#include "flatcone/schwarz_christoffel.hpp"

namespace flatcone {

// All floating output is printed with 17 significant digits, enough to
// round-trip a double exactly and keep byte-identical reruns.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace json_io {

using nlohmann::json;

inline Complex parse_complex(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("re") || !j.contains("im") || !j["re"].is_number() ||
        !j["im"].is_number())
        throw validation_error(std::string(what) + " must be an object {\"re\":..,\"im\":..}");
    return Complex(j["re"].get<double>(), j["im"].get<double>());
}

// Angle fractions arrive either as a JSON number (inexact) or as a "p/q"
// string, which stays exact through the degree checks.
inline ExactReal parse_alpha(const json& j) {
    if (j.is_number()) return ExactReal::from_double(j.get<double>());
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        const auto slash = s.find('/');
        auto parse_int = [&](const std::string& part) {
            std::int64_t v = 0;
            const char* first = part.data();
            const char* last = part.data() + part.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last)
                throw validation_error("malformed integer in fraction: '" + part + "'");
            return v;
        };
        if (slash == std::string::npos) return ExactReal::from_int(parse_int(s));
        return ExactReal::from_fraction(parse_int(s.substr(0, slash)),
                                        parse_int(s.substr(slash + 1)));
    }
    throw validation_error("alpha must be a number or a \"p/q\" string");
}

// {"points":[{"re":..,"im":..,"alpha":..},...],"infinity":{"alpha":..}|null}
inline Divisor parse_divisor(const json& j) {
    if (!j.is_object() || !j.contains("points") || !j["points"].is_array())
        throw validation_error("divisor must be an object with a \"points\" array");
    std::vector<ConePoint> pts;
    for (const auto& pj : j["points"]) {
        if (!pj.is_object() || !pj.contains("alpha"))
            throw validation_error("divisor point needs re, im and alpha");
        pts.emplace_back(SpherePoint::at(parse_complex(pj, "divisor point")),
                         parse_alpha(pj["alpha"]));
    }
    if (j.contains("infinity") && !j["infinity"].is_null()) {
        const auto& ij = j["infinity"];
        if (!ij.is_object() || !ij.contains("alpha"))
            throw validation_error("\"infinity\" must be null or {\"alpha\":..}");
        pts.emplace_back(SpherePoint::at_infinity(), parse_alpha(ij["alpha"]));
    }
    return Divisor(std::move(pts));
}

// {"waypoints":[{"re":..,"im":..},...],"clearance":..}; clearance is
// optional and defaults against the supplied cone points.
inline Path parse_path(const json& j, std::span<const Complex> cone_points) {
    if (!j.is_object() || !j.contains("waypoints") || !j["waypoints"].is_array())
        throw validation_error("path must be an object with a \"waypoints\" array");
    std::vector<Complex> wp;
    for (const auto& wj : j["waypoints"]) wp.push_back(parse_complex(wj, "waypoint"));
    double clearance = default_clearance(cone_points);
    if (j.contains("clearance")) {
        if (!j["clearance"].is_number())
            throw validation_error("clearance must be a number");
        clearance = j["clearance"].get<double>();
    }
    return Path(std::move(wp), clearance);
}

// {"vertices":[{"re":..,"im":..},...],"alphas":["1/2",...]}
inline PolygonSpec parse_polygon(const json& j) {
    if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array() ||
        !j.contains("alphas") || !j["alphas"].is_array())
        throw validation_error("polygon must carry \"vertices\" and \"alphas\" arrays");
    std::vector<Complex> verts;
    for (const auto& vj : j["vertices"]) verts.push_back(parse_complex(vj, "vertex"));
    std::vector<double> alphas;
    for (const auto& aj : j["alphas"]) alphas.push_back(parse_alpha(aj).value());
    return PolygonSpec(std::move(verts), std::move(alphas));
}

/**
 * Minimal deterministic JSON writer: insertion order is emission order
 * and every double goes through format_double, so identical inputs
 * produce byte-identical output.
 */
class Writer {
public:
    void begin_object() { open("{"); }
    void end_object() { close("}"); }
    void begin_array(const std::string& key) {
        comma();
        out_ += '"' + key + "\":[";
        fresh_ = true;
    }
    void begin_array() { open("["); }
    void end_array() { close("]"); }
    void begin_object(const std::string& key) {
        comma();
        out_ += '"' + key + "\":{";
        fresh_ = true;
    }

    void field(const std::string& key, double v) {
        comma();
        out_ += '"' + key + "\":" + format_double(v);
    }
    void field(const std::string& key, long long v) {
        comma();
        out_ += '"' + key + "\":" + std::to_string(v);
    }
    void field(const std::string& key, int v) { field(key, static_cast<long long>(v)); }
    void field(const std::string& key, std::size_t v) {
        field(key, static_cast<long long>(v));
    }
    void field(const std::string& key, bool v) {
        comma();
        out_ += '"' + key + "\":" + (v ? "true" : "false");
    }
    void field(const std::string& key, const std::string& v) {
        comma();
        out_ += '"' + key + "\":\"" + v + '"';
    }
    void field(const std::string& key, Complex v) {
        begin_object(key);
        field("re", v.real());
        field("im", v.imag());
        end_object();
    }
    void element(double v) {
        comma();
        out_ += format_double(v);
    }
    void element(long long v) {
        comma();
        out_ += std::to_string(v);
    }
    void element(Complex v) {
        begin_object();
        field("re", v.real());
        field("im", v.imag());
        end_object();
    }

    const std::string& str() const { return out_; }

private:
    void open(const char* bracket) {
        comma();
        out_ += bracket;
        fresh_ = true;
    }
    void close(const char* bracket) {
        out_ += bracket;
        fresh_ = false;
    }
    void comma() {
        if (!fresh_ && !out_.empty() && out_.back() != '{' && out_.back() != '[') out_ += ',';
        fresh_ = false;
    }

    std::string out_;
    bool fresh_ = true;
};

} // namespace json_io
} // namespace flatcone
