#pragma once

// Discrete-time steppers for the three systems. Every right-hand side is
// evaluated from the pre-step state; nothing is clamped here.

#include <array>
#include <cmath>
#include <numbers>

#include "dtcbf/control.hpp"
#include "dtcbf/errors.hpp"
#include "dtcbf/params.hpp"

namespace dtcbf {

// ---------------------------------------------------------------- fixed wing

struct FwState {
    double v = 0.0;      // airspeed, m/s
    double gamma = 0.0;  // pitch (flight path angle), rad
    double psi = 0.0;    // heading, rad
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static constexpr std::size_t kDim = 6;
    std::array<double, kDim> to_array() const { return {v, gamma, psi, x, y, z}; }
    bool operator==(const FwState&) const = default;
};

struct FwControl {
    double thrust = 0.0;  // N
    double load = 0.0;    // load factor n
    double bank = 0.0;    // rad

    static constexpr std::size_t kDim = 3;
    std::array<double, kDim> to_array() const { return {thrust, load, bank}; }
    static FwControl from_array(const std::array<double, kDim>& a) { return {a[0], a[1], a[2]}; }
    bool operator==(const FwControl&) const = default;
};

inline ControlBox<FwControl> fw_control_box(const FwParams& fw)
{
    return {{0.0, fw.load_min, -fw.bank_max}, {fw.thrust_max, fw.load_max, fw.bank_max}};
}

/// Parasitic plus induced drag, N.
inline double fw_drag(double v, double load, const FwParams& fw)
{
    if (!(v > 0.0)) throw DomainError("fw_drag: airspeed must be > 0");
    const double q = fw.air_density * v * v * fw.wing_area;
    return 0.5 * q * fw.parasitic_drag +
           2.0 * fw.induced_drag * load * load * fw.weight * fw.weight / q;
}

inline FwState fw_step(const FwState& s, const FwControl& u, const SimParams& sim,
                       const FwParams& fw)
{
    if (!(s.v > 0.0)) throw DomainError("fw_step: airspeed must be > 0");
    const double cos_gamma = std::cos(s.gamma);
    if (cos_gamma == 0.0) throw DomainError("fw_step: cos(gamma) is zero");
    const double dg = sim.delta * sim.gravity;

    FwState next;
    next.v = s.v + dg * ((u.thrust - fw_drag(s.v, u.load, fw)) / fw.weight - std::sin(s.gamma));
    next.gamma = s.gamma + dg * (u.load * std::cos(u.bank) - cos_gamma) / s.v;
    next.psi = s.psi + dg * u.load * std::sin(u.bank) / (s.v * cos_gamma);
    next.x = s.x + sim.delta * s.v * cos_gamma * std::cos(s.psi);
    next.y = s.y + sim.delta * s.v * cos_gamma * std::sin(s.psi);
    next.z = s.z + sim.delta * s.v * std::sin(s.gamma);
    return next;
}

// ----------------------------------------------------------------------- car

struct CarState {
    double x = 0.0;
    double y = 0.0;
    double v = 0.0;
    double psi = 0.0;  // angle to the road centerline, rad

    static constexpr std::size_t kDim = 4;
    std::array<double, kDim> to_array() const { return {x, y, v, psi}; }
    bool operator==(const CarState&) const = default;
};

struct CarControl {
    double accel = 0.0;  // m/s^2
    double steer = 0.0;  // front wheel angle, rad

    static constexpr std::size_t kDim = 2;
    std::array<double, kDim> to_array() const { return {accel, steer}; }
    static CarControl from_array(const std::array<double, kDim>& a) { return {a[0], a[1]}; }
    bool operator==(const CarControl&) const = default;
};

/// Lead cars in lanes 1 and 2 and the controlled (ego) car.
struct CarJointState {
    CarState lead1;
    CarState lead2;
    CarState ego;

    static constexpr std::size_t kDim = 12;
    std::array<double, kDim> to_array() const
    {
        return {lead1.x, lead1.y, lead1.v, lead1.psi, lead2.x, lead2.y,
                lead2.v, lead2.psi, ego.x,   ego.y,   ego.v,   ego.psi};
    }
    const CarState& lead(int j) const { return j == 1 ? lead1 : lead2; }
    CarState& lead(int j) { return j == 1 ? lead1 : lead2; }
    bool operator==(const CarJointState&) const = default;
};

inline ControlBox<CarControl> car_control_box(const CarParams& car)
{
    return {{car.accel_min, -car.steer_max}, {car.accel_max, car.steer_max}};
}

/// Slip angle at the center of gravity.
inline double car_beta(double steer, const CarParams& car)
{
    return std::atan(std::tan(steer) * car.rear_axle / (car.front_axle + car.rear_axle));
}

inline double car_beta_inverse(double beta, const CarParams& car)
{
    return std::atan(std::tan(beta) * (car.front_axle + car.rear_axle) / car.rear_axle);
}

inline CarState car_step(const CarState& s, const CarControl& u, const SimParams& sim,
                         const CarParams& car)
{
    const double beta = car_beta(u.steer, car);
    CarState next;
    next.x = s.x + sim.delta * s.v * std::cos(s.psi + beta);
    next.y = s.y + sim.delta * s.v * std::sin(s.psi + beta);
    next.v = s.v + sim.delta * u.accel;
    next.psi = s.psi + sim.delta * (s.v / car.rear_axle) * std::sin(beta);
    return next;
}

// --------------------------------------------------------- double integrator

struct DblIntState {
    double p = 0.0;
    double v = 0.0;

    static constexpr std::size_t kDim = 2;
    std::array<double, kDim> to_array() const { return {p, v}; }
    bool operator==(const DblIntState&) const = default;
};

struct DblIntControl {
    double accel = 0.0;

    static constexpr std::size_t kDim = 1;
    std::array<double, kDim> to_array() const { return {accel}; }
    static DblIntControl from_array(const std::array<double, kDim>& a) { return {a[0]}; }
    bool operator==(const DblIntControl&) const = default;
};

inline ControlBox<DblIntControl> dblint_control_box(const DblIntParams& dbl)
{
    return {{dbl.accel_min}, {dbl.accel_max}};
}

inline DblIntState dblint_step(const DblIntState& s, double accel, const SimParams& sim)
{
    return {s.p + sim.delta * s.v, s.v + sim.delta * accel};
}

inline DblIntState dblint_step(const DblIntState& s, const DblIntControl& u, const SimParams& sim)
{
    return dblint_step(s, u.accel, sim);
}

}  // namespace dtcbf
