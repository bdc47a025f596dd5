#pragma once

// Closed-form barrier machinery for p' = p + delta v, v' = v + delta a under
// the braking law that drives velocity to exactly zero without overshoot.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dtcbf/barrier.hpp"
#include "dtcbf/dynamics.hpp"
#include "dtcbf/params.hpp"

namespace dtcbf {

/// Evasive accelerations: `minus` brakes forward motion, `plus` brakes reverse motion.
struct EvasiveAccelPair {
    double minus = -1.0;
    double plus = 1.0;
};

inline EvasiveAccelPair evasive_pair(const DblIntParams& dbl) { return {dbl.evasive_minus, dbl.evasive_plus}; }

inline double u_dbl(const DblIntState& s, const EvasiveAccelPair& a, double delta)
{
    return s.v >= 0.0 ? std::max(a.minus, -s.v / delta) : std::min(a.plus, -s.v / delta);
}

/// Acceleration applied on the full-braking steps.
inline double braking_accel(const DblIntState& s, const EvasiveAccelPair& a)
{
    return s.v >= 0.0 ? a.minus : a.plus;
}

/// Number of full-braking steps before the final partial step. The ratio is
/// snapped to the nearest integer when within 1e-12 relative, so that values
/// landing exactly on a step boundary do not floor one step short.
inline std::int64_t settle_count(const DblIntState& s, const EvasiveAccelPair& a, double delta)
{
    const double ratio = std::abs(s.v) / std::abs(delta * braking_accel(s, a));
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-12 * std::max(1.0, ratio))
        return static_cast<std::int64_t>(nearest);
    return static_cast<std::int64_t>(std::floor(ratio));
}

/// Position at which the braking rollout comes to rest.
inline double eta(const DblIntState& s, const EvasiveAccelPair& a, double delta)
{
    const double big_a = braking_accel(s, a);
    const double n = static_cast<double>(settle_count(s, a, delta));
    return s.p + delta * n * s.v + 0.5 * n * (n - 1.0) * delta * delta * big_a +
           delta * (s.v + delta * n * big_a);
}

inline double h_low(const DblIntState& s, double p_min, const EvasiveAccelPair& a, double delta)
{
    return std::min(s.p, eta(s, a, delta)) - p_min;
}

inline double h_high(const DblIntState& s, double p_max, const EvasiveAccelPair& a, double delta)
{
    return p_max - std::max(s.p, eta(s, a, delta));
}

inline Stepper<DblIntState, DblIntControl> dblint_stepper(const SimParams& sim)
{
    return [sim](const DblIntState& s, const DblIntControl& u) { return dblint_step(s, u, sim); };
}

inline std::function<DblIntControl(const DblIntState&)> dblint_evasive(const EvasiveAccelPair& a,
                                                                       double delta)
{
    return [a, delta](const DblIntState& s) { return DblIntControl{u_dbl(s, a, delta)}; };
}

inline Barrier<DblIntState, DblIntControl> dblint_low_barrier(double p_min, const EvasiveAccelPair& a,
                                                              const SimParams& sim)
{
    Barrier<DblIntState, DblIntControl> h;
    h.name = "h_low";
    h.evaluate = [=, delta = sim.delta](const DblIntState& s) { return h_low(s, p_min, a, delta); };
    h.evasive = dblint_evasive(a, sim.delta);
    return h;
}

inline Barrier<DblIntState, DblIntControl> dblint_high_barrier(double p_max, const EvasiveAccelPair& a,
                                                               const SimParams& sim)
{
    Barrier<DblIntState, DblIntControl> h;
    h.name = "h_high";
    h.evaluate = [=, delta = sim.delta](const DblIntState& s) { return h_high(s, p_max, a, delta); };
    h.evasive = dblint_evasive(a, sim.delta);
    return h;
}

/// Both position bounds at once; the braking law is shared so the min is sound.
inline Barrier<DblIntState, DblIntControl> dblint_interval_barrier(const DblIntParams& dbl,
                                                                   const SimParams& sim)
{
    const auto a = evasive_pair(dbl);
    return compose_min(dblint_low_barrier(dbl.position_min, a, sim),
                       dblint_high_barrier(dbl.position_max, a, sim), dblint_evasive(a, sim.delta));
}

}  // namespace dtcbf
