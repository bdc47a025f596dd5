#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dtcbf/control.hpp"
#include "dtcbf/safety_filter.hpp"

namespace dtcbf {

enum class DoneReason {
    none,
    horizon,        // step budget exhausted
    last_waypoint,  // final waypoint reached
    timeout,        // too long without reaching the next waypoint
    ground,         // z <= 0
    stall,          // airspeed left the flight model's domain (v <= 0)
    collision,      // gap to a lead car in an occupied lane below D_lead
    off_road,
};

inline std::string_view to_string(DoneReason r)
{
    switch (r) {
    case DoneReason::none: return "none";
    case DoneReason::horizon: return "horizon";
    case DoneReason::last_waypoint: return "last_waypoint";
    case DoneReason::timeout: return "timeout";
    case DoneReason::ground: return "ground";
    case DoneReason::stall: return "stall";
    case DoneReason::collision: return "collision";
    case DoneReason::off_road: return "off_road";
    }
    return "?";
}

template <ControlVector C>
struct StepInfo {
    std::vector<double> state;  // raw state after the step
    C applied{};                // action fed to the dynamics (after the box clamp)
    bool action_clamped = false;
    std::optional<FilterDecision<C>> decision;  // set only by a shielded environment
};

template <ControlVector C>
struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    int cost = 0;
    bool done = false;
    DoneReason done_reason = DoneReason::none;
    StepInfo<C> info;
};

}  // namespace dtcbf
