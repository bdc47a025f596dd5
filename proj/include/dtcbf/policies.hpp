#pragma once

// Built-in nominal policies standing in for learned ones. A policy maps the
// environment (its state and task data) and a random stream to an action.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>

#include "dtcbf/car_env.hpp"
#include "dtcbf/errors.hpp"
#include "dtcbf/fw_env.hpp"
#include "dtcbf/rng.hpp"

namespace dtcbf {

template <class Env>
using EnvPolicy = std::function<typename Env::Control(const Env&, RngStream&)>;

template <ControlVector C>
C sample_uniform(const ControlBox<C>& box, RngStream& rng)
{
    auto x = box.lower.to_array();
    const auto hi = box.upper.to_array();
    for (std::size_t i = 0; i < C::kDim; ++i) x[i] = rng.uniform(x[i], hi[i]);
    return C::from_array(x);
}

template <ControlVector C>
C box_midpoint(const ControlBox<C>& box)
{
    return lerp(box.lower, box.upper, 0.5);
}

inline double wrap_angle(double a)
{
    return std::remainder(a, 2.0 * std::numbers::pi);
}

/// Proportional pursuit of the next waypoint: bank toward its bearing,
/// pitch toward its elevation, thrust to hold mid-envelope airspeed.
inline FwControl greedy_waypoint(const FwEnv& env)
{
    const auto& fw = env.params().fw;
    const auto& sim = env.params().sim;
    const FwState& s = env.state();
    const auto box = env.box();
    if (env.next_waypoint() >= env.waypoints().size()) return box.clamp({0.0, 1.0, 0.0});
    const auto& w = env.waypoints()[env.next_waypoint()];
    const double dx = w[0] - s.x;
    const double dy = w[1] - s.y;
    const double dz = w[2] - s.z;
    const double heading_error = wrap_angle(std::atan2(dy, dx) - s.psi);
    const double pitch_target = std::clamp(std::atan2(dz, std::hypot(dx, dy)), fw.pitch_min, fw.pitch_max);

    const double bank = 2.0 * heading_error;
    const double load = std::cos(s.gamma) + 2.0 * (pitch_target - s.gamma) * s.v / sim.gravity;
    const double v_target = 0.5 * (fw.speed_min + fw.speed_max);
    const double thrust = fw.weight * std::sin(s.gamma) + fw_drag(s.v, load, fw) +
                          fw.weight / sim.gravity * (v_target - s.v);
    return box.clamp({thrust, load, bank});
}

/// Accelerate to the target speed and keep to the center of the nearest lane.
inline CarControl greedy_speed(const CarEnv& env)
{
    const auto& car = env.params().car;
    const auto& sim = env.params().sim;
    const CarState& e = env.state().ego;
    const double lane = std::clamp(std::floor(e.y / car.lane_width), 0.0, 1.0);
    const double center = (lane + 0.5) * car.lane_width;
    const double psi_target = std::clamp(0.05 * (center - e.y), -0.05, 0.05);
    const double accel = (env.config().target_speed - e.v) / sim.delta;
    const double steer = 0.5 * (psi_target - e.psi);
    return env.box().clamp({accel, steer});
}

template <class Env>
EnvPolicy<Env> make_policy(std::string_view name)
{
    if (name == "random")
        return [](const Env& env, RngStream& rng) { return sample_uniform(env.box(), rng); };
    if (name == "constant")
        return [](const Env& env, RngStream&) { return box_midpoint(env.box()); };
    if constexpr (std::is_same_v<Env, FwEnv>) {
        if (name == "greedy-waypoint")
            return [](const FwEnv& env, RngStream&) { return greedy_waypoint(env); };
    }
    if constexpr (std::is_same_v<Env, CarEnv>) {
        if (name == "greedy-speed")
            return [](const CarEnv& env, RngStream&) { return greedy_speed(env); };
    }
    throw ConfigError("unknown policy '" + std::string(name) + "' for this environment");
}

}  // namespace dtcbf
