#pragma once

// Randomized and grid checks of the barrier theorems, the double-integrator
// lemmas, composition, filter soundness and rollout horizons. Each check
// returns counts plus the first few counterexamples; suites group them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dtcbf/barrier.hpp"
#include "dtcbf/car.hpp"
#include "dtcbf/double_integrator.hpp"
#include "dtcbf/fixed_wing.hpp"
#include "dtcbf/params.hpp"
#include "dtcbf/rng.hpp"
#include "dtcbf/safety_filter.hpp"

namespace dtcbf {

struct CheckResult {
    CheckResult() = default;
    explicit CheckResult(std::string n) : name(std::move(n)) {}

    std::string name;
    std::size_t samples = 0;
    std::size_t failures = 0;
    double worst = std::numeric_limits<double>::infinity();  // smallest observed margin
    std::vector<std::string> counterexamples;
    std::string note;

    bool ok() const { return failures == 0 && samples > 0; }

    /// Records one sample; margin >= 0 means it passed.
    template <class Describe>
    void record(double margin, Describe&& describe)
    {
        ++samples;
        worst = std::min(worst, margin);
        if (margin >= 0.0) return;
        ++failures;
        if (counterexamples.size() < 5) counterexamples.push_back(describe());
    }

    void record_pass(bool pass, const std::string& what)
    {
        record(pass ? 0.0 : -1.0, [&] { return what; });
    }
};

struct VerifyReport {
    std::string suite;
    std::vector<CheckResult> checks;

    bool ok() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.ok(); });
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["suite"] = suite;
        j["ok"] = ok();
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json cj{{"name", c.name},
                              {"samples", c.samples},
                              {"failures", c.failures},
                              {"ok", c.ok()},
                              {"counterexamples", c.counterexamples}};
            cj["worst_margin"] = std::isfinite(c.worst) ? nlohmann::json(c.worst) : nlohmann::json(nullptr);
            if (!c.note.empty()) cj["note"] = c.note;
            j["checks"].push_back(cj);
        }
        return j;
    }
};

struct VerifyOptions {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    ParamSet params;
};

inline const std::vector<std::string>& verify_suite_names()
{
    static const std::vector<std::string> names{"dblint-lemma", "fw-theorems",       "car-theorem", "composition",
                                                "filter-soundness", "invariance", "horizon"};
    return names;
}

namespace detail {

template <class Array>
std::string describe(std::string_view label, const Array& a)
{
    std::ostringstream o;
    o.precision(17);
    o << label << " (";
    for (std::size_t i = 0; i < a.size(); ++i) o << (i ? ", " : "") << a[i];
    o << ")";
    return o.str();
}

inline bool close_rel(double a, double b, double rel)
{
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// ------------------------------------------------------------------ samplers

inline DblIntState sample_dblint_state(RngStream& rng)
{
    return {rng.uniform(-2.0, 12.0), rng.uniform(-8.0, 8.0)};
}

/// Evasive accelerations drawn inside the actuator box, away from zero so
/// the settle count stays moderate.
inline EvasiveAccelPair sample_evasive_pair(RngStream& rng, const DblIntParams& dbl)
{
    return {rng.uniform(dbl.accel_min, 0.1 * dbl.accel_min), rng.uniform(0.1 * dbl.accel_max, dbl.accel_max)};
}

/// Uniform over a box somewhat larger than the flight envelope.
inline FwState sample_fw_state(RngStream& rng, const FwParams& fw)
{
    const double dv = fw.speed_max - fw.speed_min;
    FwState s;
    s.v = rng.uniform(fw.speed_min - 0.1 * dv, fw.speed_max + 0.1 * dv);
    s.gamma = rng.uniform(1.2 * fw.pitch_min, 1.2 * fw.pitch_max);
    s.psi = rng.uniform(-std::numbers::pi, std::numbers::pi);
    s.x = rng.uniform(-500.0, 500.0);
    s.y = rng.uniform(-500.0, 500.0);
    s.z = rng.uniform(fw.altitude_floor - 20.0, fw.altitude_floor + 200.0);
    return s;
}

inline CarState sample_lead(RngStream& rng, int j, double ego_x, const CarParams& car)
{
    const double half = 0.5 * car.car_width;
    CarState lead;
    lead.x = ego_x + rng.uniform(-50.0, 400.0);
    lead.y = rng.uniform((j - 1) * car.lane_width + half, j * car.lane_width - half);
    lead.v = rng.uniform(0.0, car.speed_limit);
    lead.psi = 0.0;
    return lead;
}

inline CarState sample_ego(RngStream& rng, const CarParams& car)
{
    return {rng.uniform(0.0, 1000.0), rng.uniform(0.0, 2.0 * car.lane_width), rng.uniform(-2.0, car.speed_limit),
            rng.uniform(-0.3, 0.3)};
}

/// Joint state satisfying the lead car assumption.
inline CarJointState sample_car_joint(RngStream& rng, const CarParams& car)
{
    CarJointState s;
    s.ego = sample_ego(rng, car);
    s.lead1 = sample_lead(rng, 1, s.ego.x, car);
    s.lead2 = sample_lead(rng, 2, s.ego.x, car);
    return s;
}

enum class LeadCase { any, ego_reversing, lead_slower, lead_faster };

/// Joint state aimed at one branch of the headway argument, with the gap to
/// lead j placed near the barrier boundary.
inline CarJointState sample_lead_case(RngStream& rng, int j, LeadCase which, const CarParams& car,
                                      const SimParams& sim)
{
    CarJointState s = sample_car_joint(rng, car);
    CarState& lead = s.lead(j);
    switch (which) {
    case LeadCase::ego_reversing: s.ego.v = rng.uniform(-5.0, 0.0); break;
    case LeadCase::lead_slower:
        s.ego.v = rng.uniform(0.0, car.speed_limit);
        lead.v = rng.uniform(0.0, s.ego.v);
        break;
    case LeadCase::lead_faster:
        s.ego.v = rng.uniform(0.0, car.speed_limit);
        lead.v = rng.uniform(s.ego.v, car.speed_limit);
        break;
    case LeadCase::any: return s;
    }
    // shift the lead so that the margin lands in [0, 0.01) m
    const double m = lead_distance_margin(s, j, car, sim);
    lead.x += rng.uniform(0.0, 0.01) - m;
    return s;
}

// ---------------------------------------------------------- generic checks

/// c_h(s, zeta(s)) >= -tol and zeta(s) in U over sampled states with h(s) >= 0.
template <class State, ControlVector C, class Sampler>
CheckResult check_barrier_constraint(std::string name, const Barrier<State, C>& h, const Stepper<State, C>& f,
                                     const ControlBox<C>& box, double lambda, Sampler&& sample,
                                     std::size_t samples, std::size_t max_draws_factor = 200)
{
    CheckResult r;
    r.name = std::move(name);
    std::size_t draws = 0;
    while (r.samples < samples && draws < samples * max_draws_factor) {
        ++draws;
        const State s = sample();
        const double hs = h(s);
        if (!(hs >= 0.0)) continue;
        const C z = h.evasive(s);
        const double c = constraint_given(h, f, s, hs, z, lambda);
        const bool in_box = box.contains(z);
        r.record(in_box ? c + kConstraintTolerance : -1.0, [&] {
            return detail::describe("state", s.to_array()) + detail::describe(" evasive", z.to_array()) +
                   " c=" + std::to_string(c) + (in_box ? "" : " (evasive outside U)");
        });
    }
    if (r.samples < samples) {
        r.note = "only " + std::to_string(r.samples) + " safe states found";
        r.failures += 1;
    }
    return r;
}

// ------------------------------------------------------ double integrator

/// Rollout under the braking law: positions after the settle count equal
/// eta, and every position stays on the near side of eta.
inline std::vector<CheckResult> check_dblint_lemmas(const VerifyOptions& opt)
{
    const auto& sim = opt.params.sim;
    const DblIntParams dbl;
    RngStream rng(opt.seed, 101);
    CheckResult a{"eta equals the rollout rest position"}, b{"rollout stays on one side of eta"},
        c{"eta invariant along the braking step"}, cont{"eta continuous across settle-count jumps"},
        d{"eta nondecreasing in v"};
    for (std::size_t i = 0; i < opt.samples; ++i) {
        const DblIntState s0 = sample_dblint_state(rng);
        const auto pair = sample_evasive_pair(rng, dbl);
        const double e = eta(s0, pair, sim.delta);
        const auto n = settle_count(s0, pair, sim.delta);
        const auto show = [&] {
            return detail::describe("state", s0.to_array()) + " a=(" + std::to_string(pair.minus) + ", " +
                   std::to_string(pair.plus) + ")";
        };
        DblIntState s = s0;
        double side = std::numeric_limits<double>::infinity();
        double rest = std::numeric_limits<double>::infinity();
        const double tol = 1e-12 * std::max(1.0, std::abs(e));
        for (std::int64_t k = 1; k <= n + 3; ++k) {
            s = dblint_step(s, u_dbl(s, pair, sim.delta), sim);
            side = std::min(side, s0.v >= 0.0 ? e - s.p + tol : s.p - e + tol);
            if (k > n) rest = std::min(rest, tol - std::abs(s.p - e));
        }
        a.record(rest, show);
        b.record(side, show);
        const DblIntState s1 = dblint_step(s0, u_dbl(s0, pair, sim.delta), sim);
        const double e1 = eta(s1, pair, sim.delta);
        c.record(detail::close_rel(e, e1, 1e-12) ? 0.0 : -std::abs(e - e1), show);
    }
    // continuity at the velocities where the settle count jumps
    for (std::size_t i = 0; i < std::max<std::size_t>(1, opt.samples / 1000); ++i) {
        const auto pair = sample_evasive_pair(rng, dbl);
        const double p = rng.uniform(-2.0, 12.0);
        for (int m = 1; m <= 40; ++m) {
            for (double sign : {1.0, -1.0}) {
                const double step = sim.delta * std::abs(sign > 0 ? pair.minus : pair.plus);
                const double v = sign * m * step;
                const double lo = eta({p, v * (1.0 - 1e-9)}, pair, sim.delta);
                const double hi = eta({p, v * (1.0 + 1e-9)}, pair, sim.delta);
                const double at = eta({p, v}, pair, sim.delta);
                const double jump = std::max(std::abs(hi - lo), std::max(std::abs(at - lo), std::abs(at - hi)));
                cont.record(1e-6 - jump, [&] { return "p=" + std::to_string(p) + " v=" + std::to_string(v); });
            }
        }
    }
    for (std::size_t i = 0; i < std::max<std::size_t>(1, opt.samples / 1000); ++i) {
        const auto pair = sample_evasive_pair(rng, dbl);
        const double p = rng.uniform(-2.0, 12.0);
        std::vector<double> vs(1000);
        for (auto& v : vs) v = rng.uniform(-8.0, 8.0);
        std::sort(vs.begin(), vs.end());
        double prev = eta({p, vs.front()}, pair, sim.delta);
        for (std::size_t k = 1; k < vs.size(); ++k) {
            const double cur = eta({p, vs[k]}, pair, sim.delta);
            d.record(cur - prev + 1e-12 * std::max(1.0, std::abs(prev)),
                     [&] { return "p=" + std::to_string(p) + " v=" + std::to_string(vs[k]); });
            prev = cur;
        }
    }
    return {a, b, c, cont, d};
}

inline std::vector<CheckResult> check_dblint_theorem(const VerifyOptions& opt)
{
    const auto& sim = opt.params.sim;
    const DblIntParams dbl;
    const auto f = dblint_stepper(sim);
    const auto box = dblint_control_box(dbl);
    const auto pair = evasive_pair(dbl);
    RngStream rng(opt.seed, 102);
    auto sampler = [&] { return sample_dblint_state(rng); };
    return {
        check_barrier_constraint("h_low constraint under the braking law",
                                 dblint_low_barrier(dbl.position_min, pair, sim), f, box, sim.lambda, sampler,
                                 opt.samples),
        check_barrier_constraint("h_high constraint under the braking law",
                                 dblint_high_barrier(dbl.position_max, pair, sim), f, box, sim.lambda, sampler,
                                 opt.samples),
    };
}

/// The generic rollout construction with a long budget reproduces the
/// closed-form position barriers.
inline CheckResult check_rollout_matches_closed_form(const VerifyOptions& opt)
{
    const auto& sim = opt.params.sim;
    const DblIntParams dbl;
    const auto pair = evasive_pair(dbl);
    const auto f = dblint_stepper(sim);
    const auto zeta = dblint_evasive(pair, sim.delta);
    const std::function<bool(const DblIntState&)> settled = [](const DblIntState& s) { return s.v == 0.0; };
    const auto low = rollout_barrier<DblIntState, DblIntControl>(
        [&](const DblIntState& s) { return s.p - dbl.position_min; }, zeta, f, settled, 10000);
    const auto high = rollout_barrier<DblIntState, DblIntControl>(
        [&](const DblIntState& s) { return dbl.position_max - s.p; }, zeta, f, settled, 10000);
    RngStream rng(opt.seed, 103);
    CheckResult r{"rollout barrier equals closed form"};
    const std::size_t n = std::max<std::size_t>(1, opt.samples / 10);
    for (std::size_t i = 0; i < n; ++i) {
        const DblIntState s = sample_dblint_state(rng);
        const double d1 = std::abs(low(s) - h_low(s, dbl.position_min, pair, sim.delta));
        const double d2 = std::abs(high(s) - h_high(s, dbl.position_max, pair, sim.delta));
        r.record(1e-9 - std::max(d1, d2), [&] { return detail::describe("state", s.to_array()); });
    }
    return r;
}

// --------------------------------------------------------------- fixed wing

inline std::vector<CheckResult> check_fw_hypotheses(const VerifyOptions& opt, int brute_grid = 1000)
{
    const auto& fw = opt.params.fw;
    const auto& sim = opt.params.sim;
    CheckResult hyp{"evasive thrust range and load hypotheses"};
    ThrustExtrema ext;
    try {
        ext = validate_fw_hypotheses(fw, sim);
        hyp.record_pass(true, "");
    } catch (const ConfigError& e) {
        hyp.record_pass(false, e.what());
        ext = fw_ttilde_extrema(fw, sim);
    }
    hyp.note = "T~ in [" + std::to_string(ext.min) + ", " + std::to_string(ext.max) + "] N";

    CheckResult grid{"evasive thrust extrema agree with a brute-force grid"};
    double bmin = std::numeric_limits<double>::infinity();
    double bmax = -bmin;
    for (int i = 0; i < brute_grid; ++i) {
        const double v = fw.speed_min + (fw.speed_max - fw.speed_min) * i / (brute_grid - 1);
        for (int k = 0; k < brute_grid; ++k) {
            const double g = fw.pitch_min + (fw.pitch_max - fw.pitch_min) * k / (brute_grid - 1);
            const double t = detail::ttilde_at(v, g, fw, sim);
            bmin = std::min(bmin, t);
            bmax = std::max(bmax, t);
        }
    }
    // the refined extrema may only be more extreme than grid points, never by more than the tolerance less
    grid.record(1e-6 - std::abs(ext.min - bmin), [&] {
        return "min refined " + std::to_string(ext.min) + " vs grid " + std::to_string(bmin);
    });
    grid.record(1e-6 - std::abs(ext.max - bmax), [&] {
        return "max refined " + std::to_string(ext.max) + " vs grid " + std::to_string(bmax);
    });
    return {hyp, grid};
}

inline std::vector<CheckResult> check_fw_theorems(const VerifyOptions& opt)
{
    const auto& fw = opt.params.fw;
    const auto& sim = opt.params.sim;
    const auto box = fw_control_box(fw);
    const auto f = fw_stepper(sim, fw);
    RngStream rng(opt.seed, 201);
    CheckResult contain{"safe set lies inside the flight envelope"}, in_u{"evasive action inside U"},
        comp{"each component meets its constraint under the evasive action"},
        hold{"evasive action holds airspeed"};
    std::size_t safe = 0, near_safe = 0;
    for (std::size_t draws = 0; (safe < opt.samples || near_safe < opt.samples) && draws < 200 * opt.samples;
         ++draws) {
        const FwState s = sample_fw_state(rng, fw);
        const auto b = fw_b_all(s, fw, sim);
        const bool first_four = b[0] >= 0 && b[1] >= 0 && b[2] >= 0 && b[3] >= 0;
        if (first_four && near_safe < opt.samples) {
            ++near_safe;
            const FwControl u = fw_evasive(s, fw, sim);
            in_u.record(box.contains(u) ? 0.0 : -1.0, [&] {
                return detail::describe("state", s.to_array()) + detail::describe(" u", u.to_array());
            });
        }
        if (!(first_four && b[4] >= 0) || safe >= opt.samples) continue;
        ++safe;
        contain.record(fw_in_envelope(s, fw) ? 0.0 : -1.0, [&] { return detail::describe("state", s.to_array()); });
        const FwControl u = fw_evasive(s, fw, sim);
        const FwState n = fw_step(s, u, sim, fw);
        const auto bn = fw_b_all(n, fw, sim);
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 5; ++i) worst = std::min(worst, bn[i] - (1.0 - sim.lambda) * b[i]);
        comp.record(worst + kConstraintTolerance, [&] { return detail::describe("state", s.to_array()); });
        hold.record(detail::close_rel(n.v, s.v, 1e-12) ? 0.0 : -std::abs(n.v - s.v),
                    [&] { return detail::describe("state", s.to_array()); });
    }
    return {contain, in_u, comp, hold};
}

inline CheckResult check_fw_barrier(const VerifyOptions& opt)
{
    const auto& fw = opt.params.fw;
    const auto& sim = opt.params.sim;
    RngStream rng(opt.seed, 202);
    return check_barrier_constraint("h_fw constraint under the evasive action", fw_barrier(fw, sim),
                                    fw_stepper(sim, fw), fw_control_box(fw), sim.lambda,
                                    [&] { return sample_fw_state(rng, fw); }, opt.samples);
}

/// With drag removed and T_max = W sin(gamma_max), a state at v_min pitched
/// above gamma_max loses speed under every admissible action (and the mirror
/// case at v_max pitched below -gamma_max gains speed), so b2 and b1 alone are
/// not barriers.
inline std::vector<CheckResult> check_fw_counterexample(const VerifyOptions& opt, int grid = 100)
{
    FwParams fw = opt.params.fw;
    fw.parasitic_drag = 0.0;
    fw.induced_drag = 0.0;
    fw.thrust_max = fw.weight * std::sin(fw.pitch_max);
    const auto& sim = opt.params.sim;
    const auto box = fw_control_box(fw);
    const auto lo = box.lower.to_array();
    const auto hi = box.upper.to_array();
    CheckResult slow{"b2 has no safe action above the pitch limit at v_min"};
    CheckResult fast{"b1 has no safe action below the pitch limit at v_max"};
    for (double frac : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        const double above = fw.pitch_max + frac * (std::numbers::pi / 2 - fw.pitch_max);
        const FwState s_slow{fw.speed_min, above, 0.0, 0.0, 0.0, 500.0};
        const FwState s_fast{fw.speed_max, -above, 0.0, 0.0, 0.0, 500.0};
        for (int i = 0; i <= grid; ++i) {
            for (int j = 0; j <= grid; ++j) {
                for (int k = 0; k <= grid; ++k) {
                    const FwControl u{lo[0] + (hi[0] - lo[0]) * i / grid, lo[1] + (hi[1] - lo[1]) * j / grid,
                                      lo[2] + (hi[2] - lo[2]) * k / grid};
                    const double b2 = fw_b(fw_step(s_slow, u, sim, fw), 2, fw, sim) -
                                      (1.0 - sim.lambda) * fw_b(s_slow, 2, fw, sim);
                    slow.record(-b2 - 1e-300, [&] { return detail::describe("safe action found", u.to_array()); });
                    const double b1 = fw_b(fw_step(s_fast, u, sim, fw), 1, fw, sim) -
                                      (1.0 - sim.lambda) * fw_b(s_fast, 1, fw, sim);
                    fast.record(-b1 - 1e-300, [&] { return detail::describe("safe action found", u.to_array()); });
                }
            }
        }
    }
    return {slow, fast};
}

// ---------------------------------------------------------------------- car

inline std::vector<CheckResult> check_car_theorems(const VerifyOptions& opt)
{
    const auto& car = opt.params.car;
    const auto& sim = opt.params.sim;
    const auto box = car_control_box(car);
    const auto f = car_joint_stepper(car, sim);
    RngStream rng(opt.seed, 301);
    std::vector<CheckResult> out;
    for (int j = 1; j <= 2; ++j) {
        const auto h = car_lead_barrier(j, car, sim);
        const std::string tag = "h_lead" + std::to_string(j);
        out.push_back(check_barrier_constraint(tag + " constraint", h, f, box, sim.lambda,
                                               [&] { return sample_car_joint(rng, car); }, opt.samples));
        const std::pair<LeadCase, const char*> cases[] = {{LeadCase::ego_reversing, " case: ego reversing"},
                                                          {LeadCase::lead_slower, " case: lead slower"},
                                                          {LeadCase::lead_faster, " case: lead faster"}};
        for (const auto& [which, label] : cases) {
            out.push_back(check_barrier_constraint(tag + label, h, f, box, sim.lambda,
                                                   [&, w = which] { return sample_lead_case(rng, j, w, car, sim); },
                                                   std::max<std::size_t>(1, opt.samples / 10)));
        }
    }
    out.push_back(check_barrier_constraint("h_spd constraint", car_speed_barrier(car, sim), f, box, sim.lambda,
                                           [&] { return sample_car_joint(rng, car); }, opt.samples));
    out.push_back(check_barrier_constraint("h_car constraint", car_barrier(car, sim), f, box, sim.lambda,
                                           [&] { return sample_car_joint(rng, car); }, opt.samples));

    CheckResult assumption{"lead car assumption violations are rejected"};
    for (int variant = 0; variant < 3; ++variant) {
        CarJointState s = sample_car_joint(rng, car);
        if (variant == 0) s.lead1.psi = 0.01;
        if (variant == 1) s.lead2.v = -1.0;
        if (variant == 2) s.lead1.y = car.lane_width;
        bool threw = false;
        try {
            lead_distance_margin(s, 1, car, sim);
        } catch (const DomainError&) {
            threw = true;
        }
        assumption.record_pass(threw, "variant " + std::to_string(variant) + " accepted");
    }
    out.push_back(assumption);
    return out;
}

inline std::vector<CheckResult> check_lane_barriers(const VerifyOptions& opt)
{
    const auto& car = opt.params.car;
    const auto& sim = opt.params.sim;
    const auto box = car_control_box(car);
    const auto f = car_stepper(sim, car);
    const auto lanes = car_lane_barriers(car, sim);
    const auto lanes_long = car_lane_barriers(car, sim, 2 * kLaneRolloutMaxSteps);
    RngStream rng(opt.seed, 302);
    std::vector<CheckResult> out;
    for (std::size_t i = 0; i < lanes.size(); ++i) {
        out.push_back(check_barrier_constraint(lanes[i].name + " constraint", lanes[i], f, box, sim.lambda,
                                               [&] { return sample_ego(rng, car); }, opt.samples));
    }
    CheckResult same{"lane barriers unchanged by a doubled step budget and by the fused rollout"};
    for (std::size_t k = 0; k < std::max<std::size_t>(1, opt.samples / 10); ++k) {
        const CarState s = sample_ego(rng, car);
        const LaneValues fused = car_lane_values(s, car, sim);
        const double values[] = {fused.low1, fused.high1, fused.low2, fused.high2};
        // inlining can round the trig calls differently per call site, so not bitwise
        double gap = 0.0;
        for (std::size_t i = 0; i < lanes.size(); ++i) {
            gap = std::max({gap, std::abs(lanes[i](s) - values[i]), std::abs(lanes_long[i](s) - values[i])});
        }
        same.record(1e-12 - gap, [&] { return detail::describe("ego", s.to_array()); });
    }
    out.push_back(same);
    return out;
}

/// Forward invariance of h_car from safe starts with the ego applying its
/// evasive action and both leads braking maximally.
inline CheckResult check_car_invariance(const VerifyOptions& opt, std::size_t starts = 50, std::size_t steps = 1000)
{
    const auto& car = opt.params.car;
    const auto& sim = opt.params.sim;
    const auto h = car_barrier(car, sim);
    const auto f = car_joint_stepper(car, sim);
    const Policy<CarJointState, CarControl> zeta = h.evasive;
    RngStream rng(opt.seed, 303);
    CheckResult r{"h_car forward invariant under the evasive action"};
    std::size_t found = 0;
    for (std::size_t draws = 0; found < starts && draws < 1000 * starts; ++draws) {
        const CarJointState s0 = sample_car_joint(rng, car);
        if (!(h(s0) >= 0.0)) continue;
        ++found;
        const auto rep = check_forward_invariance(h, f, zeta, s0, steps);
        r.record(rep.min_value + kViolationTolerance, [&] { return detail::describe("start", s0.to_array()); });
    }
    return r;
}

// -------------------------------------------------------------- composition

/// For random pairs of position barriers with independent bounds, any action
/// meeting both constraints meets the min-composed one.
inline std::vector<CheckResult> check_composition(const VerifyOptions& opt)
{
    const auto& sim = opt.params.sim;
    const DblIntParams dbl;
    const auto f = dblint_stepper(sim);
    const auto box = dblint_control_box(dbl);
    RngStream rng(opt.seed, 401);
    const auto random_barrier = [&] {
        const auto pair = sample_evasive_pair(rng, dbl);
        const double bound = rng.uniform(-2.0, 12.0);
        return rng.uniform01() < 0.5 ? dblint_low_barrier(bound, pair, sim) : dblint_high_barrier(bound, pair, sim);
    };
    CheckResult lemma{"min of two satisfied constraints is satisfied"};
    CheckResult algebra{"min/max composition commutative and associative in value"};
    CheckResult argmax{"max composition uses the evasive action of the larger barrier"};
    std::size_t draws = 0;
    while (lemma.samples < opt.samples && draws < 1000 * opt.samples) {
        ++draws;
        const auto q1 = random_barrier();
        const auto q2 = random_barrier();
        const DblIntState s = sample_dblint_state(rng);
        const DblIntControl u{rng.uniform(box.lower.accel, box.upper.accel)};
        if (!(q1(s) >= 0.0 && q2(s) >= 0.0)) continue;
        if (!(constraint(q1, f, s, u, sim.lambda) >= 0.0 && constraint(q2, f, s, u, sim.lambda) >= 0.0)) continue;
        const auto m = compose_min(q1, q2, q1.evasive);
        const double c = constraint(m, f, s, u, sim.lambda);
        lemma.record(c, [&] { return detail::describe("state", s.to_array()) + " u=" + std::to_string(u.accel); });
    }
    const std::size_t n = std::max<std::size_t>(1, opt.samples / 10);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = random_barrier();
        const auto b = random_barrier();
        const auto c = random_barrier();
        const DblIntState s = sample_dblint_state(rng);
        const auto z = a.evasive;
        const bool ok = compose_min(a, b, z)(s) == compose_min(b, a, z)(s) &&
                        compose_min(compose_min(a, b, z), c, z)(s) == compose_min(a, compose_min(b, c, z), z)(s) &&
                        compose_max(a, b)(s) == compose_max(b, a)(s) &&
                        compose_max(compose_max(a, b), c)(s) == compose_max(a, compose_max(b, c))(s);
        algebra.record_pass(ok, detail::describe("state", s.to_array()));
        const auto mx = compose_max(a, b);
        const auto expect = a(s) >= b(s) ? a.evasive(s) : b.evasive(s);
        argmax.record_pass(mx.evasive(s) == expect, detail::describe("state", s.to_array()));
    }
    return {lemma, algebra, argmax};
}

// ------------------------------------------------------------------ filters

template <class State, ControlVector C, class Sampler>
CheckResult check_filter_soundness(std::string name, const FilterProblem<State, C>& p, Sampler&& sample,
                                   std::size_t samples, RngStream& rng)
{
    CheckResult r;
    r.name = std::move(name);
    const auto lo = p.box.lower.to_array();
    const auto hi = p.box.upper.to_array();
    std::size_t draws = 0;
    while (r.samples < samples && draws < 200 * samples) {
        ++draws;
        const State s = sample();
        if (!(p.h(s) >= 0.0)) continue;
        // nominal drawn from a box 20% wider than U so the clamp path is exercised
        auto x = lo;
        for (std::size_t i = 0; i < C::kDim; ++i) {
            const double w = hi[i] - lo[i];
            x[i] = rng.uniform(lo[i] - 0.1 * w, hi[i] + 0.1 * w);
        }
        const C nominal = C::from_array(x);
        const auto z = p.box.clamp(p.h.evasive(s));
        const auto candidates = axis_swap_candidates(p.box.clamp(nominal), z);
        for (auto mode : {FilterMode::single, FilterMode::line, FilterMode::candidates}) {
            const auto d = apply_filter(mode, p, s, nominal, candidates);
            const auto again = apply_filter(mode, p, s, nominal, candidates);
            const double c = constraint(p.h, p.f, s, d.applied, p.lambda);
            bool ok = p.box.contains(d.applied) && bit_equal(d.applied, again.applied) &&
                      d.constraint_value == again.constraint_value;
            if (d.branch == FilterBranch::nominal_passed)
                ok = ok && bit_equal(d.applied, p.box.clamp(nominal)) && d.override_distance == 0.0;
            r.record(ok ? c + kConstraintTolerance : -1.0, [&] {
                return std::string(to_string(mode)) + " " + detail::describe("state", s.to_array()) +
                       detail::describe(" nominal", nominal.to_array()) + " c=" + std::to_string(c);
            });
        }
    }
    if (r.samples < samples) ++r.failures;
    return r;
}

inline std::vector<CheckResult> check_filters(const VerifyOptions& opt)
{
    const auto& prm = opt.params;
    RngStream rng(opt.seed, 501);
    const DblIntParams dbl;
    FilterProblem<DblIntState, DblIntControl> pd{dblint_interval_barrier(dbl, prm.sim), dblint_stepper(prm.sim),
                                                 dblint_control_box(dbl), prm.sim.lambda, 32};
    FilterProblem<FwState, FwControl> pf{fw_barrier(prm.fw, prm.sim), fw_stepper(prm.sim, prm.fw),
                                         fw_control_box(prm.fw), prm.sim.lambda, 32};
    FilterProblem<CarJointState, CarControl> pc{car_barrier(prm.car, prm.sim), car_joint_stepper(prm.car, prm.sim),
                                                car_control_box(prm.car), prm.sim.lambda, 32};
    const std::size_t n = opt.samples;
    return {
        check_filter_soundness("double integrator filters sound", pd, [&] { return sample_dblint_state(rng); }, n, rng),
        check_filter_soundness("fixed-wing filters sound", pf, [&] { return sample_fw_state(rng, prm.fw); },
                               std::max<std::size_t>(1, n / 10), rng),
        check_filter_soundness("car filters sound", pc, [&] { return sample_car_joint(rng, prm.car); },
                               std::max<std::size_t>(1, n / 10), rng),
    };
}

/// Distances to the nominal order as oracle <= candidates <= line <= single
/// on states where the nominal is unsafe.
inline CheckResult check_filter_dominance(const VerifyOptions& opt, std::size_t resolution = 1000)
{
    const auto& sim = opt.params.sim;
    const DblIntParams dbl;
    FilterProblem<DblIntState, DblIntControl> p{dblint_low_barrier(dbl.position_min, evasive_pair(dbl), sim),
                                                dblint_stepper(sim), dblint_control_box(dbl), sim.lambda, 32};
    RngStream rng(opt.seed, 502);
    CheckResult r{"oracle <= candidates <= line <= single"};
    std::size_t draws = 0;
    while (r.samples < opt.samples && draws < 1000 * opt.samples) {
        ++draws;
        const DblIntState s{rng.uniform(0.0, 3.0), rng.uniform(-4.0, 1.0)};
        if (!(p.h(s) >= 0.0)) continue;
        const DblIntControl nominal{rng.uniform(dbl.accel_min, dbl.accel_max)};
        if (constraint(p.h, p.f, s, nominal, p.lambda) >= 0.0) continue;
        const auto single = filter_single(p, s, nominal);
        const auto line = filter_line(p, s, nominal);
        const auto oracle = grid_oracle(p, s, nominal, resolution);
        const auto cand = filter_with_candidates(p, s, nominal, {oracle});
        const double d_o = distance(oracle, nominal);
        const double tol = 1e-12;
        double margin = std::min({cand.override_distance - d_o, line.override_distance - cand.override_distance,
                                  single.override_distance - line.override_distance}) + tol;
        for (const auto& u : {single.applied, line.applied, cand.applied, oracle}) {
            if (!(constraint(p.h, p.f, s, u, p.lambda) >= -kConstraintTolerance)) margin = -1.0;
        }
        r.record(margin, [&] {
            return detail::describe("state", s.to_array()) + " nominal=" + std::to_string(nominal.accel) +
                   " d=(" + std::to_string(d_o) + ", " + std::to_string(cand.override_distance) + ", " +
                   std::to_string(line.override_distance) + ", " + std::to_string(single.override_distance) + ")";
        });
    }
    return r;
}

// ---------------------------------------------------------------- invariance

template <class State, ControlVector C, class Sampler>
CheckResult check_filtered_invariance(std::string name, const FilterProblem<State, C>& p, FilterMode mode,
                                      Sampler&& sample, RngStream& rng, std::size_t starts, std::size_t steps)
{
    CheckResult r;
    r.name = std::move(name);
    const Policy<State, C> policy = [&](const State& s) {
        auto x = p.box.lower.to_array();
        const auto hi = p.box.upper.to_array();
        for (std::size_t i = 0; i < C::kDim; ++i) x[i] = rng.uniform(x[i], hi[i]);
        return apply_filter(mode, p, s, C::from_array(x)).applied;
    };
    std::size_t draws = 0;
    while (r.samples < starts && draws < 1000 * starts) {
        ++draws;
        const State s0 = sample();
        if (!(p.h(s0) >= 0.0)) continue;
        const auto rep = check_forward_invariance(p.h, p.f, policy, s0, steps);
        r.record(rep.min_value + kViolationTolerance, [&] { return detail::describe("start", s0.to_array()); });
    }
    if (r.samples < starts) ++r.failures;
    return r;
}

inline std::vector<CheckResult> check_invariance(const VerifyOptions& opt, std::size_t starts = 20,
                                                 std::size_t steps = 1000)
{
    const auto& prm = opt.params;
    RngStream rng(opt.seed, 601);
    const DblIntParams dbl;
    FilterProblem<DblIntState, DblIntControl> pd{dblint_interval_barrier(dbl, prm.sim), dblint_stepper(prm.sim),
                                                 dblint_control_box(dbl), prm.sim.lambda, 32};
    FilterProblem<FwState, FwControl> pf{fw_barrier(prm.fw, prm.sim), fw_stepper(prm.sim, prm.fw),
                                         fw_control_box(prm.fw), prm.sim.lambda, 32};
    FilterProblem<CarJointState, CarControl> pc{car_barrier(prm.car, prm.sim), car_joint_stepper(prm.car, prm.sim),
                                                car_control_box(prm.car), prm.sim.lambda, 32};
    std::vector<CheckResult> out;
    for (auto mode : {FilterMode::single, FilterMode::line}) {
        const std::string m(to_string(mode));
        out.push_back(check_filtered_invariance("double integrator, random nominal, " + m, pd, mode,
                                                [&] { return sample_dblint_state(rng); }, rng, starts, steps));
        out.push_back(check_filtered_invariance("fixed wing, random nominal, " + m, pf, mode,
                                                [&] { return sample_fw_state(rng, prm.fw); }, rng, starts, steps));
        out.push_back(check_filtered_invariance("car, random nominal, " + m, pc, mode,
                                                [&] { return sample_car_joint(rng, prm.car); }, rng, starts, steps));
    }
    out.push_back(check_car_invariance(opt));
    {
        const auto h = fw_barrier(prm.fw, prm.sim);
        const auto f = fw_stepper(prm.sim, prm.fw);
        const Policy<FwState, FwControl> zeta = h.evasive;
        CheckResult r{"h_fw forward invariant under the evasive action"};
        for (std::size_t draws = 0; r.samples < starts && draws < 1000 * starts; ++draws) {
            const FwState s0 = sample_fw_state(rng, prm.fw);
            if (!(h(s0) >= 0.0)) continue;
            const auto rep = check_forward_invariance(h, f, zeta, s0, steps);
            r.record(rep.min_value + kViolationTolerance, [&] { return detail::describe("start", s0.to_array()); });
        }
        out.push_back(r);
    }
    return out;
}

// ------------------------------------------------------------------- horizon

struct HorizonScan {
    std::size_t max_steps = 0;
    double argmax_v = 0.0;
    double argmax_psi = 0.0;
};

/// Largest lane-rollout settling count over a v x psi grid (y does not
/// affect the count).
inline HorizonScan scan_lane_horizon(const ParamSet& prm, double v_max, double psi_max, int nv, int npsi)
{
    HorizonScan out;
    for (int i = 0; i < nv; ++i) {
        const double v = v_max * i / (nv - 1);
        for (int k = 0; k < npsi; ++k) {
            const double psi = -psi_max + 2.0 * psi_max * k / (npsi - 1);
            const CarState s{0.0, prm.car.lane_width, v, psi};
            const auto steps = car_lane_values(s, prm.car, prm.sim, 100000).steps;
            if (steps > out.max_steps) out = {steps, v, psi};
        }
    }
    return out;
}

inline std::vector<CheckResult> check_horizon(const VerifyOptions& opt, std::size_t bound = 33)
{
    const auto scan = scan_lane_horizon(opt.params, 31.3, 0.2, 314, 401);
    CheckResult r{"lane settling steps <= " + std::to_string(bound) + " for v in [0, 31.3], |psi| <= 0.2 rad"};
    r.record(static_cast<double>(bound) - static_cast<double>(scan.max_steps), [&] {
        return "max " + std::to_string(scan.max_steps) + " steps at v=" + std::to_string(scan.argmax_v) +
               " psi=" + std::to_string(scan.argmax_psi);
    });
    r.note = "max " + std::to_string(scan.max_steps) + " steps";
    const auto deg = scan_lane_horizon(opt.params, 31.3, 5.0 * kDegToRad, 314, 401);
    CheckResult d{"lane settling steps <= " + std::to_string(bound) + " for |psi| <= 5 deg"};
    d.record(static_cast<double>(bound) - static_cast<double>(deg.max_steps), [&] {
        return "max " + std::to_string(deg.max_steps) + " steps at v=" + std::to_string(deg.argmax_v) +
               " psi=" + std::to_string(deg.argmax_psi);
    });
    d.note = "max " + std::to_string(deg.max_steps) + " steps";
    const auto wide = scan_lane_horizon(opt.params, opt.params.car.speed_limit, std::numbers::pi / 4, 100, 201);
    CheckResult w{"lane rollouts settle within the default budget for |psi| <= pi/4"};
    w.record(static_cast<double>(kLaneRolloutMaxSteps) - static_cast<double>(wide.max_steps),
             [&] { return "max " + std::to_string(wide.max_steps) + " steps"; });
    w.note = "max " + std::to_string(wide.max_steps) + " steps";
    return {r, d, w};
}

// -------------------------------------------------------------------- suites

inline VerifyReport verify_suite(std::string_view suite, const VerifyOptions& opt)
{
    VerifyReport rep;
    rep.suite = std::string(suite);
    const auto add = [&](std::vector<CheckResult> v) { rep.checks.insert(rep.checks.end(), v.begin(), v.end()); };
    if (suite == "dblint-lemma") {
        add(check_dblint_lemmas(opt));
        add(check_dblint_theorem(opt));
        rep.checks.push_back(check_rollout_matches_closed_form(opt));
    } else if (suite == "fw-theorems") {
        add(check_fw_hypotheses(opt));
        add(check_fw_theorems(opt));
        rep.checks.push_back(check_fw_barrier(opt));
        add(check_fw_counterexample(opt));
    } else if (suite == "car-theorem") {
        add(check_car_theorems(opt));
        add(check_lane_barriers(opt));
    } else if (suite == "composition") {
        add(check_composition(opt));
    } else if (suite == "filter-soundness") {
        add(check_filters(opt));
        rep.checks.push_back(check_filter_dominance(opt));
    } else if (suite == "invariance") {
        add(check_invariance(opt));
    } else if (suite == "horizon") {
        add(check_horizon(opt));
    } else {
        throw ConfigError("unknown verify suite '" + std::string(suite) + "'");
    }
    return rep;
}

}  // namespace dtcbf
