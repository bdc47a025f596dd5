#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "dtcbf/errors.hpp"

namespace dtcbf {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kMphToMps = 0.44704;

/// A state counts as violating a safety limit only beyond this slack.
inline constexpr double kViolationTolerance = 1e-6;
/// Slack for inequalities that hold exactly in real arithmetic.
inline constexpr double kConstraintTolerance = 1e-9;

struct SimParams {
    double delta = 0.1;    // s
    double gravity = 9.81; // m/s^2
    double lambda = 0.5;   // in (0, 1]

    void validate() const
    {
        if (!(delta > 0.0)) throw ConfigError("sim.delta must be > 0");
        if (!(gravity > 0.0)) throw ConfigError("sim.gravity must be > 0");
        if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("sim.lambda must lie in (0, 1]");
    }

    bool operator==(const SimParams&) const = default;
};

/// Fixed-wing airframe and flight envelope. All SI; angles in radians.
struct FwParams {
    double air_density = 1.2251;  // kg/m^3
    double wing_area = 1.058;     // m^2
    double weight = 68.68;        // N
    double thrust_max = 20.60;    // N
    double load_min = -1.0;
    double load_max = 2.5;
    double parasitic_drag = 0.02544;
    double induced_drag = 0.059;
    double bank_max = 30.0 * kDegToRad;
    double speed_min = 15.0;      // m/s
    double speed_max = 20.0;      // m/s
    double pitch_min = -10.0 * kDegToRad;
    double pitch_max = 10.0 * kDegToRad;
    double altitude_floor = 400.0; // m

    void validate() const
    {
        if (!(air_density > 0.0)) throw ConfigError("fw.air_density must be > 0");
        if (!(wing_area > 0.0)) throw ConfigError("fw.wing_area must be > 0");
        if (!(weight > 0.0)) throw ConfigError("fw.weight must be > 0");
        if (!(thrust_max > 0.0)) throw ConfigError("fw.thrust_max must be > 0");
        if (!(load_min < load_max)) throw ConfigError("fw.load_min must be < fw.load_max");
        if (!(load_max > 1.0)) throw ConfigError("fw.load_max must be > 1");
        if (!(parasitic_drag >= 0.0)) throw ConfigError("fw.parasitic_drag must be >= 0");
        if (!(induced_drag >= 0.0)) throw ConfigError("fw.induced_drag must be >= 0");
        if (!(bank_max > 0.0)) throw ConfigError("fw.bank_max must be > 0");
        if (!(speed_min > 0.0)) throw ConfigError("fw.speed_min must be > 0");
        if (!(speed_min < speed_max)) throw ConfigError("fw.speed_min must be < fw.speed_max");
        if (!(pitch_max > 0.0)) throw ConfigError("fw.pitch_max must be > 0");
        if (!(pitch_min < 0.0)) throw ConfigError("fw.pitch_min must be < 0");
        if (!std::isfinite(altitude_floor)) throw ConfigError("fw.altitude_floor must be finite");
    }

    bool operator==(const FwParams&) const = default;
};

/// Kinematic bicycle, lane geometry and headway rules. All SI; angles in radians.
struct CarParams {
    double front_axle = 1.17;      // l_f, m
    double rear_axle = 1.77;       // l_r, m
    double accel_min = -2.87;      // lead/ego actuator box, m/s^2
    double accel_max = 2.87;
    double evasive_minus = -2.86;  // ego evasive braking, m/s^2
    double evasive_plus = 2.86;
    double steer_max = 1.0 * kDegToRad;
    double headway = 1.8;          // s
    double min_gap = 5.0;          // D_lead, m
    double car_width = 1.83;       // m
    double lane_width = 3.6;       // m
    double speed_limit = 70.0 * kMphToMps;

    void validate() const
    {
        if (!(front_axle > 0.0)) throw ConfigError("car.front_axle must be > 0");
        if (!(rear_axle > 0.0)) throw ConfigError("car.rear_axle must be > 0");
        if (!(accel_min < 0.0 && accel_max > 0.0))
            throw ConfigError("car.accel_min must be < 0 < car.accel_max");
        if (!(evasive_minus >= accel_min && evasive_minus < 0.0))
            throw ConfigError("car.evasive_minus must lie in [car.accel_min, 0)");
        if (!(evasive_plus > 0.0 && evasive_plus <= accel_max))
            throw ConfigError("car.evasive_plus must lie in (0, car.accel_max]");
        if (!(steer_max > 0.0 && steer_max < std::numbers::pi / 4.0))
            throw ConfigError("car.steer_max must lie in (0, pi/4)");
        if (!(headway >= 0.0)) throw ConfigError("car.headway must be >= 0");
        if (!(min_gap >= 0.0)) throw ConfigError("car.min_gap must be >= 0");
        if (!(car_width > 0.0)) throw ConfigError("car.car_width must be > 0");
        if (!(car_width < lane_width)) throw ConfigError("car.car_width must be < car.lane_width");
        if (!(speed_limit > 0.0)) throw ConfigError("car.speed_limit must be > 0");
    }

    bool operator==(const CarParams&) const = default;
};

/// Double integrator used for the closed-form barrier and filter benchmarks.
struct DblIntParams {
    double accel_min = -2.0;
    double accel_max = 2.0;
    double evasive_minus = -2.0;
    double evasive_plus = 2.0;
    double position_min = 0.0;
    double position_max = 10.0;

    void validate() const
    {
        if (!(evasive_minus >= accel_min && evasive_minus < 0.0))
            throw ConfigError("dbl.evasive_minus must lie in [dbl.accel_min, 0)");
        if (!(evasive_plus > 0.0 && evasive_plus <= accel_max))
            throw ConfigError("dbl.evasive_plus must lie in (0, dbl.accel_max]");
        if (!(position_min < position_max))
            throw ConfigError("dbl.position_min must be < dbl.position_max");
    }

    bool operator==(const DblIntParams&) const = default;
};

struct ParamSet {
    SimParams sim;
    FwParams fw;
    CarParams car;

    void validate() const
    {
        sim.validate();
        fw.validate();
        car.validate();
    }

    bool operator==(const ParamSet&) const = default;
};

}  // namespace dtcbf
