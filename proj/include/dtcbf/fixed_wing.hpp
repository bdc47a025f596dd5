#pragma once

// Flight-envelope barrier for the fixed-wing model: five component
// functions b1..b5 (speed, pitch, altitude) combined by min, certified by a
// constant-speed pull-up maneuver with wings level.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "dtcbf/barrier.hpp"
#include "dtcbf/dynamics.hpp"
#include "dtcbf/params.hpp"

namespace dtcbf {

/// Pitch-rate budget (times airspeed) available to the evasive maneuver.
inline double fw_alpha(const FwState& s, const FwParams& fw, const SimParams& sim)
{
    return std::min(fw.pitch_max * sim.lambda * s.v / sim.delta,
                    sim.gravity * fw.load_max - sim.gravity);
}

inline double fw_evasive_load(const FwState& s, const FwParams& fw, const SimParams& sim)
{
    const double climb = sim.lambda * s.v / sim.delta * (fw.pitch_max - s.gamma);
    const double load = std::cos(s.gamma) + std::min(climb, fw_alpha(s, fw, sim)) / sim.gravity;
    // alpha / g can land an ulp above n_max - cos(gamma); snap that back into the box
    if (load > fw.load_max && load - fw.load_max <= 1e-12) return fw.load_max;
    return load;
}

/// Thrust that exactly cancels drag and the gravity component along the path.
inline double fw_evasive_thrust(const FwState& s, const FwParams& fw, const SimParams& sim)
{
    return fw.weight * std::sin(s.gamma) + fw_drag(s.v, fw_evasive_load(s, fw, sim), fw);
}

inline FwControl fw_evasive(const FwState& s, const FwParams& fw, const SimParams& sim)
{
    if (!(s.v > 0.0)) throw DomainError("fw_evasive: airspeed must be > 0");
    const double load = fw_evasive_load(s, fw, sim);
    return {fw.weight * std::sin(s.gamma) + fw_drag(s.v, load, fw), load, 0.0};
}

/// Time for the evasive maneuver to bring the pitch back to zero.
inline double fw_tau(const FwState& s, const FwParams& fw, const SimParams& sim)
{
    const double alpha = fw_alpha(s, fw, sim);
    if (alpha == 0.0) throw DomainError("fw_tau: alpha is zero");
    return -s.gamma / (alpha / s.v);
}

/// Component i in 1..5.
inline double fw_b(const FwState& s, int i, const FwParams& fw, const SimParams& sim)
{
    switch (i) {
    case 1: return fw.speed_max - s.v;
    case 2: return s.v - fw.speed_min;
    case 3: return fw.pitch_max - s.gamma;
    case 4: return s.gamma - fw.pitch_min;
    case 5: {
        if (!(s.v > 0.0)) throw DomainError("fw_b: b5 needs airspeed > 0");
        // tau only matters when gamma < 0; skip it otherwise so the value is exact.
        if (s.gamma >= 0.0) return s.z - fw.altitude_floor;
        const double tau = fw_tau(s, fw, sim);
        return s.z + s.v * s.gamma * (std::max(tau, 0.0) + sim.delta) - fw.altitude_floor;
    }
    default: throw PreconditionError("fw_b: component index must be in 1..5");
    }
}

inline std::array<double, 5> fw_b_all(const FwState& s, const FwParams& fw, const SimParams& sim)
{
    return {fw_b(s, 1, fw, sim), fw_b(s, 2, fw, sim), fw_b(s, 3, fw, sim), fw_b(s, 4, fw, sim),
            fw_b(s, 5, fw, sim)};
}

inline double h_fw(const FwState& s, const FwParams& fw, const SimParams& sim)
{
    const auto b = fw_b_all(s, fw, sim);
    return *std::min_element(b.begin(), b.end());
}

/// Raw flight-envelope membership with the given slack on every inequality.
inline bool fw_in_envelope(const FwState& s, const FwParams& fw, double slack = 0.0)
{
    return s.gamma >= fw.pitch_min - slack && s.gamma <= fw.pitch_max + slack &&
           s.v >= fw.speed_min - slack && s.v <= fw.speed_max + slack &&
           s.z >= fw.altitude_floor - slack;
}

struct ThrustExtrema {
    double min = 0.0;
    double max = 0.0;
    FwState argmin;
    FwState argmax;
};

namespace detail {

inline double ttilde_at(double v, double gamma, const FwParams& fw, const SimParams& sim)
{
    FwState s;
    s.v = v;
    s.gamma = gamma;
    return fw_evasive_thrust(s, fw, sim);
}

// Golden-section search for the minimum of g on [lo, hi].
template <class G>
double golden_minimize(G&& g, double lo, double hi, double tol)
{
    constexpr double kInvPhi = 0.6180339887498949;
    double c = hi - kInvPhi * (hi - lo);
    double d = lo + kInvPhi * (hi - lo);
    double gc = g(c);
    double gd = g(d);
    while (hi - lo > tol) {
        if (gc <= gd) {
            hi = d;
            d = c;
            gd = gc;
            c = hi - kInvPhi * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + kInvPhi * (hi - lo);
            gd = g(d);
        }
    }
    // Endpoints are candidates too: extrema of the evasive thrust sit on the box boundary.
    double best = 0.5 * (lo + hi);
    double best_value = g(best);
    for (double x : {lo, hi}) {
        if (const double gx = g(x); gx < best_value) {
            best = x;
            best_value = gx;
        }
    }
    return best;
}

// sign = +1 minimizes, -1 maximizes.
inline std::pair<double, double> refine_extremum(double v0, double g0, double dv, double dg,
                                                 double sign, const FwParams& fw,
                                                 const SimParams& sim)
{
    const auto objective = [&](double v, double gamma) { return sign * ttilde_at(v, gamma, fw, sim); };
    double v = v0;
    double gamma = g0;
    const double v_lo = std::max(fw.speed_min, v0 - dv);
    const double v_hi = std::min(fw.speed_max, v0 + dv);
    const double g_lo = std::max(fw.pitch_min, g0 - dg);
    const double g_hi = std::min(fw.pitch_max, g0 + dg);
    for (int sweep = 0; sweep < 12; ++sweep) {
        const double v_new = golden_minimize([&](double x) { return objective(x, gamma); }, v_lo, v_hi, 1e-8);
        if (objective(v_new, gamma) <= objective(v, gamma)) v = v_new;
        const double g_new = golden_minimize([&](double x) { return objective(v, x); }, g_lo, g_hi, 1e-8);
        if (objective(v, g_new) <= objective(v, gamma)) gamma = g_new;
    }
    return {v, gamma};
}

}  // namespace detail

/// Extrema of the evasive thrust over v in [v_min, v_max], gamma in
/// [gamma_min, gamma_max]: dense grid, then coordinate golden-section
/// refinement inside the neighbouring cells.
inline ThrustExtrema fw_ttilde_extrema(const FwParams& fw, const SimParams& sim, int grid = 200)
{
    const double dv = (fw.speed_max - fw.speed_min) / grid;
    const double dg = (fw.pitch_max - fw.pitch_min) / grid;
    double best_min = std::numeric_limits<double>::infinity();
    double best_max = -std::numeric_limits<double>::infinity();
    double vmin_at = fw.speed_min, gmin_at = fw.pitch_min, vmax_at = fw.speed_min, gmax_at = fw.pitch_min;
    for (int i = 0; i <= grid; ++i) {
        const double v = i == grid ? fw.speed_max : fw.speed_min + i * dv;
        for (int j = 0; j <= grid; ++j) {
            const double gamma = j == grid ? fw.pitch_max : fw.pitch_min + j * dg;
            const double t = detail::ttilde_at(v, gamma, fw, sim);
            if (t < best_min) {
                best_min = t;
                vmin_at = v;
                gmin_at = gamma;
            }
            if (t > best_max) {
                best_max = t;
                vmax_at = v;
                gmax_at = gamma;
            }
        }
    }
    auto [v1, g1] = detail::refine_extremum(vmin_at, gmin_at, dv, dg, +1.0, fw, sim);
    auto [v2, g2] = detail::refine_extremum(vmax_at, gmax_at, dv, dg, -1.0, fw, sim);

    ThrustExtrema out;
    out.argmin.v = v1;
    out.argmin.gamma = g1;
    out.argmax.v = v2;
    out.argmax.gamma = g2;
    out.min = std::min(best_min, detail::ttilde_at(v1, g1, fw, sim));
    out.max = std::max(best_max, detail::ttilde_at(v2, g2, fw, sim));
    if (out.min == best_min && detail::ttilde_at(v1, g1, fw, sim) != best_min) {
        out.argmin.v = vmin_at;
        out.argmin.gamma = gmin_at;
    }
    if (out.max == best_max && detail::ttilde_at(v2, g2, fw, sim) != best_max) {
        out.argmax.v = vmax_at;
        out.argmax.gamma = gmax_at;
    }
    return out;
}

/// Checks the parameter-level hypotheses under which h_fw is a barrier and the
/// evasive maneuver stays within the actuator box. Throws ConfigError naming
/// the first violated inequality.
inline ThrustExtrema validate_fw_hypotheses(const FwParams& fw, const SimParams& sim)
{
    fw.validate();
    sim.validate();
    const auto ext = fw_ttilde_extrema(fw, sim);
    if (!(ext.min >= 0.0))
        throw ConfigError("fixed-wing hypothesis violated: 0 <= min evasive thrust (got " +
                          std::to_string(ext.min) + " N)");
    if (!(ext.max <= fw.thrust_max))
        throw ConfigError("fixed-wing hypothesis violated: max evasive thrust <= fw.thrust_max (got " +
                          std::to_string(ext.max) + " N)");
    if (!(fw.load_min <= std::min(std::cos(fw.pitch_min), std::cos(fw.pitch_max))))
        throw ConfigError("fixed-wing hypothesis violated: fw.load_min <= min(cos(pitch_min), cos(pitch_max))");
    return ext;
}

inline Stepper<FwState, FwControl> fw_stepper(const SimParams& sim, const FwParams& fw)
{
    return [sim, fw](const FwState& s, const FwControl& u) { return fw_step(s, u, sim, fw); };
}

inline Barrier<FwState, FwControl> fw_barrier(const FwParams& fw, const SimParams& sim)
{
    validate_fw_hypotheses(fw, sim);
    Barrier<FwState, FwControl> h;
    h.name = "h_fw";
    h.evaluate = [fw, sim](const FwState& s) { return h_fw(s, fw, sim); };
    h.evasive = [fw, sim](const FwState& s) { return fw_evasive(s, fw, sim); };
    return h;
}

}  // namespace dtcbf
