#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "dtcbf/errors.hpp"
#include "dtcbf/params.hpp"

namespace dtcbf {

template <class State, class Control>
using Stepper = std::function<State(const State&, const Control&)>;

template <class State, class Control>
using Policy = std::function<Control(const State&)>;

/// Safety function rho: rho(s) >= 0 iff s meets the safety specification.
template <class State>
using SafetyFunction = std::function<double(const State&)>;

/// A discrete-time exponential control barrier function h together with
/// the evasive maneuver zeta that certifies it.
template <class State, class Control>
struct Barrier {
    std::function<double(const State&)> evaluate;
    std::function<Control(const State&)> evasive;
    std::optional<std::size_t> horizon_hint;
    std::string name;

    double operator()(const State& s) const { return evaluate(s); }
};

/// h(f(s, u)) - (1 - lambda) h(s).
template <class State, class Control>
double constraint(const Barrier<State, Control>& h, const Stepper<State, Control>& f,
                  const State& s, const Control& u, double lambda)
{
    if (!(lambda > 0.0 && lambda <= 1.0)) throw PreconditionError("constraint: lambda must lie in (0, 1]");
    return h(f(s, u)) - (1.0 - lambda) * h(s);
}

/// Same as constraint() with h(s) already known; used on hot paths.
template <class State, class Control>
double constraint_given(const Barrier<State, Control>& h, const Stepper<State, Control>& f,
                        const State& s, double h_at_s, const Control& u, double lambda)
{
    return h(f(s, u)) - (1.0 - lambda) * h_at_s;
}

/// Pointwise minimum. Sound only when one control satisfies both constraints
/// at every state; the caller supplies that shared evasive maneuver.
template <class State, class Control>
Barrier<State, Control> compose_min(Barrier<State, Control> h1, Barrier<State, Control> h2,
                                    std::function<Control(const State&)> shared_evasive)
{
    Barrier<State, Control> out;
    out.name = "min(" + h1.name + ", " + h2.name + ")";
    if (h1.horizon_hint || h2.horizon_hint)
        out.horizon_hint = std::max(h1.horizon_hint.value_or(0), h2.horizon_hint.value_or(0));
    out.evaluate = [a = std::move(h1.evaluate), b = std::move(h2.evaluate)](const State& s) {
        return std::min(a(s), b(s));
    };
    out.evasive = std::move(shared_evasive);
    return out;
}

/// Pointwise maximum. The evasive maneuver follows whichever argument
/// attains the max at the queried state (ties go to h1).
template <class State, class Control>
Barrier<State, Control> compose_max(Barrier<State, Control> h1, Barrier<State, Control> h2)
{
    Barrier<State, Control> out;
    out.name = "max(" + h1.name + ", " + h2.name + ")";
    if (h1.horizon_hint || h2.horizon_hint)
        out.horizon_hint = std::max(h1.horizon_hint.value_or(0), h2.horizon_hint.value_or(0));
    out.evaluate = [a = h1.evaluate, b = h2.evaluate](const State& s) {
        return std::max(a(s), b(s));
    };
    out.evasive = [a = std::move(h1.evaluate), b = std::move(h2.evaluate),
                   za = std::move(h1.evasive), zb = std::move(h2.evasive)](const State& s) {
        return a(s) >= b(s) ? za(s) : zb(s);
    };
    return out;
}

struct RolloutValue {
    double value = 0.0;
    std::size_t steps = 0;  // index of the settling state
};

/// min over k in [0, K] of rho(s_k) along s_{k+1} = f(s_k, zeta(s_k)), where K
/// is the first index at which `settled` holds. Once settled, rho must be
/// unable to decrease further; the predicate encodes that per system.
template <class State, class Control>
RolloutValue rollout_infimum(const SafetyFunction<State>& rho,
                             const std::function<Control(const State&)>& zeta,
                             const Stepper<State, Control>& f,
                             const std::function<bool(const State&)>& settled,
                             std::size_t max_steps, const State& s0)
{
    State s = s0;
    double value = rho(s);
    for (std::size_t k = 0;; ++k) {
        if (settled(s)) return {value, k};
        if (k == max_steps)
            throw HorizonError("rollout did not settle within " + std::to_string(max_steps) + " steps");
        s = f(s, zeta(s));
        value = std::min(value, rho(s));
    }
}

template <class State, class Control>
Barrier<State, Control> rollout_barrier(SafetyFunction<State> rho,
                                        std::function<Control(const State&)> zeta,
                                        Stepper<State, Control> f,
                                        std::function<bool(const State&)> settled,
                                        std::size_t max_steps, std::string name = "rollout")
{
    Barrier<State, Control> out;
    out.name = std::move(name);
    out.horizon_hint = max_steps;
    out.evasive = zeta;
    out.evaluate = [=](const State& s) {
        return rollout_infimum<State, Control>(rho, zeta, f, settled, max_steps, s).value;
    };
    return out;
}

struct InvarianceReport {
    std::optional<std::size_t> first_violation;  // step index k with h(s_k) < -tolerance
    double min_value = std::numeric_limits<double>::infinity();
    std::size_t steps = 0;

    bool ok() const { return !first_violation.has_value(); }
};

/// Simulates `policy` from s0 and records the smallest barrier value seen.
template <class State, class Control>
InvarianceReport check_forward_invariance(const Barrier<State, Control>& h,
                                          const Stepper<State, Control>& f,
                                          const Policy<State, Control>& policy, const State& s0,
                                          std::size_t steps)
{
    const double h0 = h(s0);
    if (h0 < 0.0) throw PreconditionError("check_forward_invariance: h(s0) < 0");
    InvarianceReport report;
    report.min_value = h0;
    State s = s0;
    for (std::size_t k = 1; k <= steps; ++k) {
        s = f(s, policy(s));
        const double hk = h(s);
        report.min_value = std::min(report.min_value, hk);
        report.steps = k;
        if (hk < -kViolationTolerance && !report.first_violation) report.first_violation = k;
    }
    return report;
}

}  // namespace dtcbf
