#pragma once

// Human-editable parameter files: one `key = value` per line, `#` comments.
// Keys are `sim.*`, `fw.*` and `car.*`. Angle keys accept a `_deg` suffix and
// speed keys a `_mph` suffix; values are converted to SI at load time and the
// writer always emits SI so a written file reloads bit-exactly.

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "dtcbf/errors.hpp"
#include "dtcbf/params.hpp"

namespace dtcbf {

namespace detail {

enum class Unit { none, angle, speed };

struct ParamField {
    std::string_view key;
    Unit unit;
    double& (*ref)(ParamSet&);
};

// clang-format off
inline constexpr std::array kParamFields = {
    ParamField{"sim.delta", Unit::none, [](ParamSet& p) -> double& { return p.sim.delta; }},
    ParamField{"sim.gravity", Unit::none, [](ParamSet& p) -> double& { return p.sim.gravity; }},
    ParamField{"sim.lambda", Unit::none, [](ParamSet& p) -> double& { return p.sim.lambda; }},
    ParamField{"fw.air_density", Unit::none, [](ParamSet& p) -> double& { return p.fw.air_density; }},
    ParamField{"fw.wing_area", Unit::none, [](ParamSet& p) -> double& { return p.fw.wing_area; }},
    ParamField{"fw.weight", Unit::none, [](ParamSet& p) -> double& { return p.fw.weight; }},
    ParamField{"fw.thrust_max", Unit::none, [](ParamSet& p) -> double& { return p.fw.thrust_max; }},
    ParamField{"fw.load_min", Unit::none, [](ParamSet& p) -> double& { return p.fw.load_min; }},
    ParamField{"fw.load_max", Unit::none, [](ParamSet& p) -> double& { return p.fw.load_max; }},
    ParamField{"fw.parasitic_drag", Unit::none, [](ParamSet& p) -> double& { return p.fw.parasitic_drag; }},
    ParamField{"fw.induced_drag", Unit::none, [](ParamSet& p) -> double& { return p.fw.induced_drag; }},
    ParamField{"fw.bank_max", Unit::angle, [](ParamSet& p) -> double& { return p.fw.bank_max; }},
    ParamField{"fw.speed_min", Unit::none, [](ParamSet& p) -> double& { return p.fw.speed_min; }},
    ParamField{"fw.speed_max", Unit::none, [](ParamSet& p) -> double& { return p.fw.speed_max; }},
    ParamField{"fw.pitch_min", Unit::angle, [](ParamSet& p) -> double& { return p.fw.pitch_min; }},
    ParamField{"fw.pitch_max", Unit::angle, [](ParamSet& p) -> double& { return p.fw.pitch_max; }},
    ParamField{"fw.altitude_floor", Unit::none, [](ParamSet& p) -> double& { return p.fw.altitude_floor; }},
    ParamField{"car.front_axle", Unit::none, [](ParamSet& p) -> double& { return p.car.front_axle; }},
    ParamField{"car.rear_axle", Unit::none, [](ParamSet& p) -> double& { return p.car.rear_axle; }},
    ParamField{"car.accel_min", Unit::none, [](ParamSet& p) -> double& { return p.car.accel_min; }},
    ParamField{"car.accel_max", Unit::none, [](ParamSet& p) -> double& { return p.car.accel_max; }},
    ParamField{"car.evasive_minus", Unit::none, [](ParamSet& p) -> double& { return p.car.evasive_minus; }},
    ParamField{"car.evasive_plus", Unit::none, [](ParamSet& p) -> double& { return p.car.evasive_plus; }},
    ParamField{"car.steer_max", Unit::angle, [](ParamSet& p) -> double& { return p.car.steer_max; }},
    ParamField{"car.headway", Unit::none, [](ParamSet& p) -> double& { return p.car.headway; }},
    ParamField{"car.min_gap", Unit::none, [](ParamSet& p) -> double& { return p.car.min_gap; }},
    ParamField{"car.car_width", Unit::none, [](ParamSet& p) -> double& { return p.car.car_width; }},
    ParamField{"car.lane_width", Unit::none, [](ParamSet& p) -> double& { return p.car.lane_width; }},
    ParamField{"car.speed_limit", Unit::speed, [](ParamSet& p) -> double& { return p.car.speed_limit; }},
};
// clang-format on

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text, const std::string& where)
{
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw ConfigError(where + ": cannot parse number '" + std::string(text) + "'");
    return value;
}

inline std::string format_double(double v)
{
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

}  // namespace detail

/// Parses parameter text on top of the defaults. Throws ConfigError on any
/// parse failure, unknown key, duplicate field, or invariant violation.
inline ParamSet parse_params(std::string_view text, const std::string& source = "<string>")
{
    ParamSet params;
    std::map<std::string_view, int> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value_text = detail::trim(line.substr(eq + 1));

        const detail::ParamField* field = nullptr;
        double scale = 1.0;
        for (const auto& f : detail::kParamFields) {
            if (key == f.key) {
                field = &f;
                break;
            }
            if (f.unit == detail::Unit::angle && key.size() == f.key.size() + 4 &&
                key.starts_with(f.key) && key.ends_with("_deg")) {
                field = &f;
                scale = kDegToRad;
                break;
            }
            if (f.unit == detail::Unit::speed && key.size() == f.key.size() + 4 &&
                key.starts_with(f.key) && key.ends_with("_mph")) {
                field = &f;
                scale = kMphToMps;
                break;
            }
        }
        if (field == nullptr) throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
        if (seen[field->key]++ > 0)
            throw ConfigError(where + ": field '" + std::string(field->key) + "' given twice");
        const double value = detail::parse_double(value_text, where);
        field->ref(params) = scale == 1.0 ? value : value * scale;
    }
    params.validate();
    return params;
}

inline ParamSet load_params(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_params(buffer.str(), path);
}

/// Serializes in SI with shortest round-trip formatting.
inline std::string write_params(const ParamSet& params)
{
    ParamSet copy = params;
    std::string out;
    for (const auto& f : detail::kParamFields) {
        out += f.key;
        out += " = ";
        out += detail::format_double(f.ref(copy));
        out += '\n';
    }
    return out;
}

}  // namespace dtcbf
