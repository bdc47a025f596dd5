#pragma once

// Waypoint-following episode for the fixed-wing aircraft.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dtcbf/errors.hpp"
#include "dtcbf/fixed_wing.hpp"
#include "dtcbf/params.hpp"
#include "dtcbf/rng.hpp"
#include "dtcbf/step_result.hpp"

namespace dtcbf {

struct FwEnvConfig {
    int waypoint_count = 5;
    double waypoint_spacing = 100.0;  // x distance between consecutive waypoints, m
    double lateral_range = 25.0;      // y and z offsets drawn from [-range, range], m
    double obs_scale = 50.0;
    double reward_scale = 0.01;
    double bonus_decay = 25.0;
    std::size_t max_steps = 1000;
    double waypoint_timeout = 10.0;  // s
    FwState initial{17.5, 0.0, 0.0, 0.0, 0.0, 500.0};

    void validate() const
    {
        if (waypoint_count < 1) throw ConfigError("fw_env.waypoint_count must be >= 1");
        if (!(waypoint_spacing > 0.0)) throw ConfigError("fw_env.waypoint_spacing must be > 0");
        if (!(lateral_range >= 0.0)) throw ConfigError("fw_env.lateral_range must be >= 0");
        if (!(obs_scale > 0.0)) throw ConfigError("fw_env.obs_scale must be > 0");
        if (!(bonus_decay > 0.0)) throw ConfigError("fw_env.bonus_decay must be > 0");
        if (max_steps == 0) throw ConfigError("fw_env.max_steps must be >= 1");
        if (!(waypoint_timeout > 0.0)) throw ConfigError("fw_env.waypoint_timeout must be > 0");
    }
};

class FwEnv {
public:
    using State = FwState;
    using Control = FwControl;
    using Point = std::array<double, 3>;

    static constexpr std::size_t kLookahead = 4;  // subsequent waypoint deltas in the observation

    explicit FwEnv(const ParamSet& params, FwEnvConfig config = {})
        : params_(params), config_(config)
    {
        params_.validate();
        config_.validate();
    }

    static constexpr std::size_t observation_size() { return 4 + 3 + 4 * kLookahead; }

    std::vector<double> reset(std::uint64_t seed)
    {
        RngStream rng(seed, 0);
        state_ = config_.initial;
        waypoints_.clear();
        Point w{state_.x, state_.y, state_.z};
        for (int i = 0; i < config_.waypoint_count; ++i) {
            const double dy = rng.uniform(-config_.lateral_range, config_.lateral_range);
            const double dz = rng.uniform(-config_.lateral_range, config_.lateral_range);
            w = {w[0] + config_.waypoint_spacing, w[1] + dy, w[2] + dz};
            waypoints_.push_back(w);
        }
        next_ = 0;
        steps_ = 0;
        steps_since_waypoint_ = 0;
        done_ = false;
        started_ = true;
        return observation();
    }

    StepResult<FwControl> step(const FwControl& action)
    {
        if (!started_) throw ProtocolError("fw env: step before reset");
        if (done_) throw ProtocolError("fw env: step after done");
        const FwControl u = box().clamp(action);
        StepResult<FwControl> r;
        r.info.applied = u;
        r.info.action_clamped = !bit_equal(u, action);

        const double d_prev = distance_to(waypoints_[next_]);
        state_ = fw_step(state_, u, params_.sim, params_.fw);
        ++steps_;
        ++steps_since_waypoint_;

        r.reward = config_.reward_scale * (d_prev - distance_to(waypoints_[next_]));
        if (state_.x > waypoints_[next_][0]) {
            r.reward += std::exp(-distance_to(waypoints_[next_]) / config_.bonus_decay);
            ++next_;
            steps_since_waypoint_ = 0;
        }
        r.cost = fw_in_envelope(state_, params_.fw, kViolationTolerance) ? 0 : 1;

        if (state_.z <= 0.0) r.done_reason = DoneReason::ground;
        else if (!(state_.v > 0.0) || std::cos(state_.gamma) == 0.0) r.done_reason = DoneReason::stall;
        else if (next_ == waypoints_.size()) r.done_reason = DoneReason::last_waypoint;
        else if (static_cast<double>(steps_since_waypoint_) * params_.sim.delta >
                 config_.waypoint_timeout + 1e-9)
            r.done_reason = DoneReason::timeout;
        else if (steps_ >= config_.max_steps) r.done_reason = DoneReason::horizon;
        done_ = r.done_reason != DoneReason::none;
        r.done = done_;

        const auto a = state_.to_array();
        r.info.state.assign(a.begin(), a.end());
        r.observation = observation();
        return r;
    }

    /// Scaled speed (sign as in the task definition), scaled pitch, heading
    /// sin/cos, vector to the next waypoint, then the deltas between the
    /// following waypoints, each with a validity flag and zero-filled.
    std::vector<double> observation() const
    {
        const auto& fw = params_.fw;
        std::vector<double> obs;
        obs.reserve(observation_size());
        obs.push_back((state_.v - fw.speed_min) / (fw.speed_min - fw.speed_max));
        obs.push_back(state_.gamma / fw.pitch_max);
        obs.push_back(std::sin(state_.psi));
        obs.push_back(std::cos(state_.psi));
        const double scale = config_.obs_scale;
        if (next_ < waypoints_.size()) {
            const Point& w = waypoints_[next_];
            obs.push_back((w[0] - state_.x) / scale);
            obs.push_back((w[1] - state_.y) / scale);
            obs.push_back((w[2] - state_.z) / scale);
        } else {
            obs.insert(obs.end(), 3, 0.0);
        }
        for (std::size_t m = 1; m <= kLookahead; ++m) {
            const std::size_t l = next_ + m;
            if (l < waypoints_.size()) {
                for (int c = 0; c < 3; ++c) obs.push_back((waypoints_[l][c] - waypoints_[l - 1][c]) / scale);
                obs.push_back(1.0);
            } else {
                obs.insert(obs.end(), 4, 0.0);
            }
        }
        return obs;
    }

    ControlBox<FwControl> box() const { return fw_control_box(params_.fw); }
    Barrier<FwState, FwControl> barrier() const { return fw_barrier(params_.fw, params_.sim); }
    Stepper<FwState, FwControl> filter_stepper() const { return fw_stepper(params_.sim, params_.fw); }

    const FwState& state() const { return state_; }
    const std::vector<Point>& waypoints() const { return waypoints_; }
    std::size_t next_waypoint() const { return next_; }
    std::size_t steps() const { return steps_; }
    bool done() const { return done_; }
    const ParamSet& params() const { return params_; }
    const FwEnvConfig& config() const { return config_; }

    static std::vector<std::string> state_names() { return {"v", "gamma", "psi", "x", "y", "z"}; }
    static std::vector<std::string> control_names() { return {"thrust", "load", "bank"}; }

private:
    double distance_to(const Point& w) const
    {
        return std::hypot(w[0] - state_.x, w[1] - state_.y, w[2] - state_.z);
    }

    ParamSet params_;
    FwEnvConfig config_;
    FwState state_ = config_.initial;
    std::vector<Point> waypoints_;
    std::size_t next_ = 0;
    std::size_t steps_ = 0;
    std::size_t steps_since_waypoint_ = 0;
    bool done_ = false;
    bool started_ = false;
};

}  // namespace dtcbf
