#pragma once

// Lane keeping / lane change and adaptive cruise barriers for the two-lane
// road. Lane 1 occupies y in [0, W_lane], lane 2 y in [W_lane, 2 W_lane].
// Lead car j drives in lane j; the ego car is the controlled vehicle.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "dtcbf/barrier.hpp"
#include "dtcbf/double_integrator.hpp"
#include "dtcbf/dynamics.hpp"
#include "dtcbf/params.hpp"

namespace dtcbf {

/// Lane rollouts settle within N + 1 steps of the braking law; 128 covers
/// every state with v <= v_lim regardless of heading.
inline constexpr std::size_t kLaneRolloutMaxSteps = 128;

inline double car_offset(const CarState& s, const CarParams& car)
{
    return car.front_axle * std::abs(std::sin(s.psi)) + 0.5 * car.car_width * std::abs(std::cos(s.psi));
}

inline EvasiveAccelPair ego_evasive_pair(const CarParams& car) { return {car.evasive_minus, car.evasive_plus}; }
inline EvasiveAccelPair lead_worst_case_pair(const CarParams& car) { return {car.accel_min, car.accel_max}; }

/// Steering that cancels the heading error in one step when the actuator
/// allows it, saturated otherwise.
inline double car_evasive_steer(const CarState& s, const CarParams& car, const SimParams& sim)
{
    if (s.v == 0.0) return 0.0;
    const double b_min = std::sin(car_beta(-car.steer_max, car));
    const double b_max = std::sin(car_beta(car.steer_max, car));
    const double target = -s.psi * car.rear_axle / (sim.delta * s.v);
    const double steer = car_beta_inverse(std::asin(std::min(std::max(target, b_min), b_max)), car);
    // beta then beta^-1 can round one ulp past the actuator limit
    return std::clamp(steer, -car.steer_max, car.steer_max);
}

inline CarControl car_evasive(const CarState& s, const CarParams& car, const SimParams& sim)
{
    return {u_dbl({s.x, s.v}, ego_evasive_pair(car), sim.delta), car_evasive_steer(s, car, sim)};
}

/// Once speed or heading is (numerically) zero the lateral position and the
/// offset stop changing, so no lane safety function can decrease further.
inline bool car_lateral_settled(const CarState& s)
{
    return std::abs(s.v) <= 1e-12 || std::abs(s.psi) <= 1e-14;
}

inline double rho_low1(const CarState& s, const CarParams& car) { return s.y - car_offset(s, car); }
inline double rho_high1(const CarState& s, const CarParams& car)
{
    return car.lane_width - car_offset(s, car) - s.y;
}
inline double rho_low2(const CarState& s, const CarParams& car)
{
    return s.y - car_offset(s, car) - car.lane_width;
}
inline double rho_high2(const CarState& s, const CarParams& car)
{
    return 2.0 * car.lane_width - car_offset(s, car) - s.y;
}

inline Stepper<CarState, CarControl> car_stepper(const SimParams& sim, const CarParams& car)
{
    return [sim, car](const CarState& s, const CarControl& u) { return car_step(s, u, sim, car); };
}

enum class LaneBound { low1, high1, low2, high2 };

inline SafetyFunction<CarState> lane_safety_function(LaneBound which, const CarParams& car)
{
    switch (which) {
    case LaneBound::low1: return [car](const CarState& s) { return rho_low1(s, car); };
    case LaneBound::high1: return [car](const CarState& s) { return rho_high1(s, car); };
    case LaneBound::low2: return [car](const CarState& s) { return rho_low2(s, car); };
    case LaneBound::high2: break;
    }
    return [car](const CarState& s) { return rho_high2(s, car); };
}

/// The four lane-boundary barriers over the ego state, each built by the
/// generic rollout-infimum construction.
inline std::array<Barrier<CarState, CarControl>, 4> car_lane_barriers(
    const CarParams& car, const SimParams& sim, std::size_t max_steps = kLaneRolloutMaxSteps)
{
    const std::function<CarControl(const CarState&)> zeta = [car, sim](const CarState& s) {
        return car_evasive(s, car, sim);
    };
    const auto f = car_stepper(sim, car);
    const std::function<bool(const CarState&)> settled = car_lateral_settled;
    return {
        rollout_barrier<CarState, CarControl>(lane_safety_function(LaneBound::low1, car), zeta, f, settled, max_steps, "h_L1"),
        rollout_barrier<CarState, CarControl>(lane_safety_function(LaneBound::high1, car), zeta, f, settled, max_steps, "h_H1"),
        rollout_barrier<CarState, CarControl>(lane_safety_function(LaneBound::low2, car), zeta, f, settled, max_steps, "h_L2"),
        rollout_barrier<CarState, CarControl>(lane_safety_function(LaneBound::high2, car), zeta, f, settled, max_steps, "h_H2"),
    };
}

struct LaneValues {
    double low1 = 0.0;
    double high1 = 0.0;
    double low2 = 0.0;
    double high2 = 0.0;
    std::size_t steps = 0;
};

/// All four lane barriers from one shared rollout (they use the same
/// evasive maneuver, so the trajectories coincide).
inline LaneValues car_lane_values(const CarState& ego, const CarParams& car, const SimParams& sim,
                                  std::size_t max_steps = kLaneRolloutMaxSteps)
{
    CarState s = ego;
    LaneValues out{rho_low1(s, car), rho_high1(s, car), rho_low2(s, car), rho_high2(s, car), 0};
    for (std::size_t k = 0;; ++k) {
        if (car_lateral_settled(s)) {
            out.steps = k;
            return out;
        }
        if (k == max_steps)
            throw HorizonError("lane rollout did not settle within " + std::to_string(max_steps) + " steps");
        s = car_step(s, car_evasive(s, car, sim), sim, car);
        out.low1 = std::min(out.low1, rho_low1(s, car));
        out.high1 = std::min(out.high1, rho_high1(s, car));
        out.low2 = std::min(out.low2, rho_low2(s, car));
        out.high2 = std::min(out.high2, rho_high2(s, car));
    }
}

/// Throws DomainError unless both lead cars drive straight, forward, and
/// inside their own lane.
inline void check_lead_assumption(const CarJointState& s, const CarParams& car)
{
    constexpr double kSlack = 1e-9;
    const double half = 0.5 * car.car_width;
    for (int j = 1; j <= 2; ++j) {
        const CarState& lead = s.lead(j);
        const std::string who = "lead " + std::to_string(j);
        if (lead.psi != 0.0) throw DomainError(who + " heading must be zero");
        if (!(lead.v >= -kSlack)) throw DomainError(who + " speed must be >= 0");
        const double lane_lo = (j - 1) * car.lane_width;
        const double lane_hi = j * car.lane_width;
        if (!(lead.y - half >= lane_lo - kSlack && lead.y + half <= lane_hi + kSlack))
            throw DomainError(who + " must stay inside lane " + std::to_string(j));
    }
}

/// Headway barrier to lead car j (1 or 2).
inline double lead_distance_margin(const CarJointState& s, int j, const CarParams& car,
                                   const SimParams& sim)
{
    if (j != 1 && j != 2) throw PreconditionError("lead_distance_margin: j must be 1 or 2");
    check_lead_assumption(s, car);
    const CarState& lead = s.lead(j);
    const double ego_speed = std::max(0.0, s.ego.v);
    const double lead_stop = eta({lead.x, std::min(lead.v, ego_speed)}, lead_worst_case_pair(car), sim.delta);
    const double ego_stop = eta({s.ego.x, ego_speed}, ego_evasive_pair(car), sim.delta);
    return lead_stop - ego_stop - car.min_gap - ego_speed * car.headway;
}

inline double car_speed_margin(const CarState& ego, const CarParams& car)
{
    return car.speed_limit - std::max(0.0, ego.v);
}

/// The seven component values of the composed car barrier.
struct CarBarrierTerms {
    double speed = 0.0;
    double low1 = 0.0;
    double high1 = 0.0;
    double low2 = 0.0;
    double high2 = 0.0;
    double lead1 = 0.0;
    double lead2 = 0.0;

    /// [spd min L1 min H2] min [(H1 min lead1) max (L2 min lead2) max (lead1 min lead2)]
    double compose() const
    {
        const double road = std::min({speed, low1, high2});
        const double stay1 = std::min(high1, lead1);
        const double stay2 = std::min(low2, lead2);
        const double both = std::min(lead1, lead2);
        return std::min(road, std::max({stay1, stay2, both}));
    }
};

inline CarBarrierTerms car_barrier_terms(const CarJointState& s, const CarParams& car,
                                         const SimParams& sim,
                                         std::size_t max_steps = kLaneRolloutMaxSteps)
{
    const LaneValues lanes = car_lane_values(s.ego, car, sim, max_steps);
    return {car_speed_margin(s.ego, car),     lanes.low1, lanes.high1, lanes.low2, lanes.high2,
            lead_distance_margin(s, 1, car, sim), lead_distance_margin(s, 2, car, sim)};
}

inline double h_car(const CarJointState& s, const CarParams& car, const SimParams& sim,
                    std::size_t max_steps = kLaneRolloutMaxSteps)
{
    return car_barrier_terms(s, car, sim, max_steps).compose();
}

/// Raw road, speed, lane and gap inequalities composed with the same
/// min/max tree; negative means the state is unsafe.
inline double car_raw_safety_margin(const CarJointState& s, const CarParams& car)
{
    const double ego_speed = std::max(0.0, s.ego.v);
    const auto gap = [&](const CarState& lead) {
        return lead.x - s.ego.x - car.min_gap - ego_speed * car.headway;
    };
    CarBarrierTerms raw{car_speed_margin(s.ego, car), rho_low1(s.ego, car), rho_high1(s.ego, car),
                        rho_low2(s.ego, car),         rho_high2(s.ego, car), gap(s.lead1),
                        gap(s.lead2)};
    return raw.compose();
}

/// Joint step with the ego applying `u` and both leads braking as hard as
/// their actuators allow (the worst case for the headway barriers).
inline CarJointState car_joint_step_worst_case(const CarJointState& s, const CarControl& u,
                                               const CarParams& car, const SimParams& sim)
{
    const auto lead_step = [&](const CarState& lead) {
        const double a = u_dbl({lead.x, lead.v}, lead_worst_case_pair(car), sim.delta);
        return car_step(lead, {a, 0.0}, sim, car);
    };
    return {lead_step(s.lead1), lead_step(s.lead2), car_step(s.ego, u, sim, car)};
}

inline Stepper<CarJointState, CarControl> car_joint_stepper(const CarParams& car, const SimParams& sim)
{
    return [car, sim](const CarJointState& s, const CarControl& u) {
        return car_joint_step_worst_case(s, u, car, sim);
    };
}

inline std::function<CarControl(const CarJointState&)> car_joint_evasive(const CarParams& car,
                                                                         const SimParams& sim)
{
    return [car, sim](const CarJointState& s) { return car_evasive(s.ego, car, sim); };
}

inline Barrier<CarJointState, CarControl> car_lead_barrier(int j, const CarParams& car, const SimParams& sim)
{
    Barrier<CarJointState, CarControl> h;
    h.name = j == 1 ? "h_lead1" : "h_lead2";
    h.evaluate = [j, car, sim](const CarJointState& s) { return lead_distance_margin(s, j, car, sim); };
    h.evasive = car_joint_evasive(car, sim);
    return h;
}

inline Barrier<CarJointState, CarControl> car_speed_barrier(const CarParams& car, const SimParams& sim)
{
    Barrier<CarJointState, CarControl> h;
    h.name = "h_spd";
    h.evaluate = [car](const CarJointState& s) { return car_speed_margin(s.ego, car); };
    h.evasive = car_joint_evasive(car, sim);
    return h;
}

inline Barrier<CarJointState, CarControl> car_barrier(const CarParams& car, const SimParams& sim,
                                                      std::size_t max_steps = kLaneRolloutMaxSteps)
{
    car.validate();
    Barrier<CarJointState, CarControl> h;
    h.name = "h_car";
    h.horizon_hint = max_steps;
    h.evaluate = [car, sim, max_steps](const CarJointState& s) { return h_car(s, car, sim, max_steps); };
    h.evasive = car_joint_evasive(car, sim);
    return h;
}

}  // namespace dtcbf
