#pragma once

// Two-lane adaptive cruise / lane change episode. The ego car shares the
// road with one lead car per lane; leads hold a target speed for a random
// time, then retarget and accelerate or brake as hard as allowed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dtcbf/car.hpp"
#include "dtcbf/errors.hpp"
#include "dtcbf/params.hpp"
#include "dtcbf/rng.hpp"
#include "dtcbf/step_result.hpp"

namespace dtcbf {

struct CarEnvConfig {
    double lead_offset_min = 100.0;  // spawn distance ahead of the ego, m
    double lead_offset_max = 500.0;
    double lead_speed_max = 70.0 * kMphToMps;
    double retarget_min = 0.0;  // s
    double retarget_max = 5.0;
    double target_speed = 70.0 * kMphToMps;
    double initial_speed_fraction = 0.95;
    double obs_distance_scale = 500.0;
    std::size_t max_steps = 1000;
    std::size_t reset_max_draws = 10000;
    std::size_t respawn_max_draws = 100;

    void validate() const
    {
        if (!(lead_offset_min >= 0.0 && lead_offset_max >= lead_offset_min))
            throw ConfigError("car_env.lead_offset range is invalid");
        if (!(lead_speed_max >= 0.0)) throw ConfigError("car_env.lead_speed_max must be >= 0");
        if (!(retarget_min >= 0.0 && retarget_max >= retarget_min))
            throw ConfigError("car_env.retarget range is invalid");
        if (!(target_speed > 0.0)) throw ConfigError("car_env.target_speed must be > 0");
        if (!(obs_distance_scale > 0.0)) throw ConfigError("car_env.obs_distance_scale must be > 0");
        if (max_steps == 0) throw ConfigError("car_env.max_steps must be >= 1");
        if (reset_max_draws == 0 || respawn_max_draws == 0)
            throw ConfigError("car_env draw limits must be >= 1");
    }
};

class CarEnv {
public:
    using State = CarJointState;
    using Control = CarControl;

    struct LeadBehavior {
        double target_speed = 0.0;
        double hold_remaining = 0.0;  // s until the next retarget
    };

    explicit CarEnv(const ParamSet& params, CarEnvConfig config = {})
        : params_(params), config_(config)
    {
        params_.validate();
        config_.validate();
    }

    static constexpr std::size_t observation_size() { return 8; }

    std::vector<double> reset(std::uint64_t seed)
    {
        rng_ = RngStream(seed, 1);
        const auto& car = params_.car;
        state_.ego = {0.0, 0.5 * car.lane_width, config_.initial_speed_fraction * config_.target_speed, 0.0};
        bool found = false;
        for (std::size_t draw = 0; draw < config_.reset_max_draws && !found; ++draw) {
            spawn_lead(1);
            spawn_lead(2);
            found = is_safe(state_);
        }
        if (!found)
            throw ConfigError("car env: no safe initial state within " +
                              std::to_string(config_.reset_max_draws) + " draws");
        steps_ = 0;
        done_ = false;
        started_ = true;
        return observation();
    }

    StepResult<CarControl> step(const CarControl& action)
    {
        if (!started_) throw ProtocolError("car env: step before reset");
        if (done_) throw ProtocolError("car env: step after done");
        const auto& car = params_.car;
        const auto& sim = params_.sim;
        const CarControl u = box().clamp(action);
        StepResult<CarControl> r;
        r.info.applied = u;
        r.info.action_clamped = !bit_equal(u, action);

        for (int j = 1; j <= 2; ++j) advance_lead(j);
        state_.ego = car_step(state_.ego, u, sim, car);
        ++steps_;
        check_lead_assumption(state_, car);

        r.reward = 1.0 - std::abs(state_.ego.v - config_.target_speed) / config_.target_speed;
        r.cost = car_raw_safety_margin(state_, car) < -kViolationTolerance ? 1 : 0;

        if (collided()) r.done_reason = DoneReason::collision;
        else if (rho_low1(state_.ego, car) < -kViolationTolerance ||
                 rho_high2(state_.ego, car) < -kViolationTolerance)
            r.done_reason = DoneReason::off_road;
        else if (steps_ >= config_.max_steps) r.done_reason = DoneReason::horizon;
        done_ = r.done_reason != DoneReason::none;
        r.done = done_;

        const auto a = state_.to_array();
        r.info.state.assign(a.begin(), a.end());
        if (!done_) respawn_passed_leads();
        r.observation = observation();
        return r;
    }

    std::vector<double> observation() const
    {
        const double scale = config_.obs_distance_scale;
        const double vt = config_.target_speed;
        const double w = params_.car.lane_width;
        const CarState& e = state_.ego;
        return {(state_.lead1.x - e.x - scale) / scale,
                (state_.lead2.x - e.x - scale) / scale,
                (e.y - w) / w,
                (state_.lead1.v - vt) / vt,
                (state_.lead2.v - vt) / vt,
                (e.v - vt) / vt,
                std::sin(e.psi),
                std::cos(e.psi)};
    }

    ControlBox<CarControl> box() const { return car_control_box(params_.car); }
    Barrier<CarJointState, CarControl> barrier() const { return car_barrier(params_.car, params_.sim); }
    /// Worst-case lead braking; the actual leads are never slower, and every
    /// barrier term is nondecreasing in lead speed.
    Stepper<CarJointState, CarControl> filter_stepper() const
    {
        return car_joint_stepper(params_.car, params_.sim);
    }

    const CarJointState& state() const { return state_; }
    const LeadBehavior& lead_behavior(int j) const { return behavior_[j - 1]; }
    std::size_t steps() const { return steps_; }
    bool done() const { return done_; }
    const ParamSet& params() const { return params_; }
    const CarEnvConfig& config() const { return config_; }

    static std::vector<std::string> state_names()
    {
        return {"x1", "y1", "v1", "psi1", "x2", "y2", "v2", "psi2", "x3", "y3", "v3", "psi3"};
    }
    static std::vector<std::string> control_names() { return {"accel", "steer"}; }

private:
    bool is_safe(const CarJointState& s) const
    {
        try {
            return h_car(s, params_.car, params_.sim) >= 0.0;
        } catch (const HorizonError&) {
            return false;
        }
    }

    void spawn_lead(int j)
    {
        const auto& car = params_.car;
        CarState& lead = state_.lead(j);
        lead.x = state_.ego.x + rng_.uniform(config_.lead_offset_min, config_.lead_offset_max);
        lead.y = (j - 0.5) * car.lane_width;
        lead.v = rng_.uniform(0.0, config_.lead_speed_max);
        lead.psi = 0.0;
        behavior_[j - 1] = {lead.v, rng_.uniform(config_.retarget_min, config_.retarget_max)};
    }

    void advance_lead(int j)
    {
        const auto& car = params_.car;
        const auto& sim = params_.sim;
        LeadBehavior& b = behavior_[j - 1];
        b.hold_remaining -= sim.delta;
        if (b.hold_remaining <= 0.0) {
            b.target_speed = rng_.uniform(0.0, config_.lead_speed_max);
            b.hold_remaining = rng_.uniform(config_.retarget_min, config_.retarget_max);
        }
        CarState& lead = state_.lead(j);
        const double a = std::clamp((b.target_speed - lead.v) / sim.delta, car.accel_min, car.accel_max);
        lead = car_step(lead, {a, 0.0}, sim, car);
        lead.v = std::max(lead.v, 0.0);
    }

    void respawn_passed_leads()
    {
        for (int j = 1; j <= 2; ++j) {
            if (!(state_.ego.x > state_.lead(j).x)) continue;
            for (std::size_t draw = 0; draw < config_.respawn_max_draws; ++draw) {
                spawn_lead(j);
                if (is_safe(state_)) break;
            }
        }
    }

    /// The ego footprint reaches into lead j's lane and the gap ahead is
    /// shorter than D_lead.
    bool collided() const
    {
        const auto& car = params_.car;
        const double off = car_offset(state_.ego, car);
        for (int j = 1; j <= 2; ++j) {
            const double lane_lo = (j - 1) * car.lane_width;
            const double lane_hi = j * car.lane_width;
            const bool overlaps = state_.ego.y + off > lane_lo && state_.ego.y - off < lane_hi;
            const double gap = state_.lead(j).x - state_.ego.x;
            if (overlaps && gap >= 0.0 && gap < car.min_gap - kViolationTolerance) return true;
        }
        return false;
    }

    ParamSet params_;
    CarEnvConfig config_;
    RngStream rng_{0, 1};
    CarJointState state_;
    std::array<LeadBehavior, 2> behavior_{};
    std::size_t steps_ = 0;
    bool done_ = false;
    bool started_ = false;
};

}  // namespace dtcbf
