#pragma once

// Runtime override: keep the nominal action when it satisfies the barrier
// constraint, otherwise substitute a safe action close to it.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtcbf/barrier.hpp"
#include "dtcbf/control.hpp"
#include "dtcbf/errors.hpp"
#include "dtcbf/params.hpp"

namespace dtcbf {

enum class FilterMode { none, single, line, candidates };

/// Which branch produced the applied action.
enum class FilterBranch { nominal_passed, single, line, candidate_line };

inline std::string_view to_string(FilterMode m)
{
    switch (m) {
    case FilterMode::none: return "none";
    case FilterMode::single: return "single";
    case FilterMode::line: return "line";
    case FilterMode::candidates: return "candidates";
    }
    return "?";
}

inline std::string_view to_string(FilterBranch b)
{
    switch (b) {
    case FilterBranch::nominal_passed: return "nominal";
    case FilterBranch::single: return "single";
    case FilterBranch::line: return "line";
    case FilterBranch::candidate_line: return "candidate";
    }
    return "?";
}

inline FilterMode parse_filter_mode(std::string_view name)
{
    if (name == "none") return FilterMode::none;
    if (name == "single") return FilterMode::single;
    if (name == "line") return FilterMode::line;
    if (name == "candidates") return FilterMode::candidates;
    throw ConfigError("unknown filter mode '" + std::string(name) + "'");
}

template <ControlVector C>
struct FilterDecision {
    C applied{};
    C nominal{};  // as proposed, before the box clamp
    FilterBranch branch = FilterBranch::nominal_passed;
    double constraint_value = 0.0;
    double override_distance = 0.0;  // to the clamped nominal
    double line_fraction = 0.0;      // 0 = nominal end of the search segment
    bool nominal_clamped = false;
};

/// Everything a filter needs besides the state and the nominal action.
template <class State, ControlVector C>
struct FilterProblem {
    Barrier<State, C> h;
    Stepper<State, C> f;
    ControlBox<C> box;
    double lambda = 0.5;
    std::size_t segments = 32;
};

namespace detail {

template <class State, ControlVector C>
struct FilterContext {
    const FilterProblem<State, C>& p;
    const State& s;
    double h_at_s;
    C nominal;  // clamped
    bool clamped;

    double c(const C& u) const { return constraint_given(p.h, p.f, s, h_at_s, u, p.lambda); }
};

template <class State, ControlVector C>
FilterContext<State, C> make_context(const FilterProblem<State, C>& p, const State& s, const C& nominal)
{
    if (!(p.lambda > 0.0 && p.lambda <= 1.0)) throw PreconditionError("filter: lambda must lie in (0, 1]");
    const double h_at_s = p.h(s);
    if (h_at_s < -kViolationTolerance) throw PreconditionError("filter: state is outside the safe set");
    const C clamped = p.box.clamp(nominal);
    return {p, s, h_at_s, clamped, !bit_equal(clamped, nominal)};
}

/// The evasive action, clamped into the box and checked against the theorem.
template <class State, ControlVector C>
std::pair<C, double> certified_evasive(const FilterContext<State, C>& ctx)
{
    const C z = ctx.p.box.clamp(ctx.p.h.evasive(ctx.s));
    const double cz = ctx.c(z);
    if (!(cz >= -kConstraintTolerance))
        throw InvariantError("evasive maneuver of " + ctx.p.h.name + " violates its constraint (" +
                             std::to_string(cz) + ")");
    return {z, cz};
}

template <class State, ControlVector C>
FilterDecision<C> decide(const FilterContext<State, C>& ctx, const C& raw_nominal, const C& applied,
                         FilterBranch branch, double c, double t)
{
    FilterDecision<C> d;
    d.applied = applied;
    d.nominal = raw_nominal;
    d.branch = branch;
    d.constraint_value = c;
    d.override_distance = branch == FilterBranch::nominal_passed ? 0.0 : distance(applied, ctx.nominal);
    d.line_fraction = t;
    d.nominal_clamped = ctx.clamped;
    return d;
}

template <class State, ControlVector C>
std::optional<FilterDecision<C>> try_nominal(const FilterContext<State, C>& ctx, const C& raw_nominal)
{
    const double c = ctx.c(ctx.nominal);
    if (c >= 0.0) return decide(ctx, raw_nominal, ctx.nominal, FilterBranch::nominal_passed, c, 0.0);
    return std::nullopt;
}

struct LinePoint {
    double t = 1.0;
    double c = 0.0;
};

/// Smallest grid t in (0, 1] whose point is safe; t = 1 is accepted with the
/// theorem tolerance when `end_certified`, otherwise only when c >= 0.
template <class State, ControlVector C>
std::optional<LinePoint> scan_segment(const FilterContext<State, C>& ctx, const C& end,
                                      std::size_t segments, bool end_certified)
{
    for (std::size_t i = 1; i <= segments; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(segments);
        const double c = ctx.c(lerp(ctx.nominal, end, t));
        if (c >= 0.0 || (i == segments && end_certified && c >= -kConstraintTolerance)) return LinePoint{t, c};
    }
    return std::nullopt;
}

}  // namespace detail

/// Nominal if safe, otherwise the evasive maneuver.
template <class State, ControlVector C>
FilterDecision<C> filter_single(const FilterProblem<State, C>& p, const State& s, const C& nominal)
{
    const auto ctx = detail::make_context(p, s, nominal);
    if (auto d = detail::try_nominal(ctx, nominal)) return *d;
    const auto [z, cz] = detail::certified_evasive(ctx);
    return detail::decide(ctx, nominal, z, FilterBranch::single, cz, 1.0);
}

/// Safe point nearest the nominal on a uniform grid along the segment toward
/// the evasive maneuver. The safe set along the segment need not be an
/// interval, so the grid is scanned rather than bisected.
template <class State, ControlVector C>
FilterDecision<C> filter_line(const FilterProblem<State, C>& p, const State& s, const C& nominal)
{
    if (p.segments == 0) throw PreconditionError("filter_line: segments must be >= 1");
    const auto ctx = detail::make_context(p, s, nominal);
    if (auto d = detail::try_nominal(ctx, nominal)) return *d;
    const auto [z, cz] = detail::certified_evasive(ctx);
    const auto hit = detail::scan_segment(ctx, z, p.segments, true);
    const detail::LinePoint at = hit.value_or(detail::LinePoint{1.0, cz});
    return detail::decide(ctx, nominal, lerp(ctx.nominal, z, at.t), FilterBranch::line, at.c, at.t);
}

/// Line search toward the evasive maneuver and toward each candidate; the
/// safe result nearest the nominal wins, ties going to the evasive line.
template <class State, ControlVector C>
FilterDecision<C> filter_with_candidates(const FilterProblem<State, C>& p, const State& s,
                                         const C& nominal, const std::vector<C>& candidates)
{
    FilterDecision<C> best = filter_line(p, s, nominal);
    if (best.branch == FilterBranch::nominal_passed || candidates.empty()) return best;
    const auto ctx = detail::make_context(p, s, nominal);
    double best_d2 = squared_distance(best.applied, ctx.nominal);
    for (const C& raw : candidates) {
        const C cand = p.box.clamp(raw);
        const auto hit = detail::scan_segment(ctx, cand, p.segments, false);
        if (!hit) continue;
        const C u = lerp(ctx.nominal, cand, hit->t);
        const double d2 = squared_distance(u, ctx.nominal);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = detail::decide(ctx, nominal, u, FilterBranch::candidate_line, hit->c, hit->t);
        }
    }
    return best;
}

template <class State, ControlVector C>
FilterDecision<C> apply_filter(FilterMode mode, const FilterProblem<State, C>& p, const State& s,
                               const C& nominal, const std::vector<C>& candidates = {})
{
    switch (mode) {
    case FilterMode::single: return filter_single(p, s, nominal);
    case FilterMode::line: return filter_line(p, s, nominal);
    case FilterMode::candidates: return filter_with_candidates(p, s, nominal, candidates);
    case FilterMode::none: break;
    }
    throw PreconditionError("apply_filter: mode none has no decision");
}

/// Swaps of individual nominal components with the evasive action's. Stands
/// in for a learned candidate generator.
template <ControlVector C>
std::vector<C> axis_swap_candidates(const C& nominal, const C& evasive)
{
    std::vector<C> out;
    const auto n = nominal.to_array();
    const auto z = evasive.to_array();
    for (std::size_t i = 0; i < C::kDim; ++i) {
        auto x = n;
        x[i] = z[i];
        out.push_back(C::from_array(x));
        auto y = z;
        y[i] = n[i];
        out.push_back(C::from_array(y));
    }
    return out;
}

/// Brute-force approximation of the min-distance safe action: every point of
/// a (resolution + 1)^dim lattice over the box plus the evasive action. With
/// `refine`, the winner is pushed toward the nominal by bisection along the
/// segment between them. Test-only; cost grows exponentially with dim.
template <class State, ControlVector C>
C grid_oracle(const FilterProblem<State, C>& p, const State& s, const C& nominal,
              std::size_t resolution, bool refine = true)
{
    static_assert(C::kDim <= 3, "grid_oracle supports at most three control axes");
    if (resolution == 0) throw PreconditionError("grid_oracle: resolution must be >= 1");
    const auto ctx = detail::make_context(p, s, nominal);
    if (ctx.c(ctx.nominal) >= 0.0) return ctx.nominal;

    C best = detail::certified_evasive(ctx).first;
    double best_d2 = squared_distance(best, ctx.nominal);
    const auto lo = p.box.lower.to_array();
    const auto hi = p.box.upper.to_array();
    std::array<std::size_t, C::kDim> idx{};
    for (;;) {
        std::array<double, C::kDim> x{};
        for (std::size_t i = 0; i < C::kDim; ++i) {
            x[i] = idx[i] == resolution ? hi[i]
                                        : lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) /
                                                      static_cast<double>(resolution);
        }
        const C u = C::from_array(x);
        const double d2 = squared_distance(u, ctx.nominal);
        if (d2 < best_d2 && ctx.c(u) >= 0.0) {
            best = u;
            best_d2 = d2;
        }
        std::size_t axis = 0;
        while (axis < C::kDim && ++idx[axis] > resolution) idx[axis++] = 0;
        if (axis == C::kDim) break;
    }
    if (!refine) return best;

    // nominal end is unsafe, best end is safe
    double t_unsafe = 0.0;
    double t_safe = 1.0;
    for (int it = 0; it < 200 && t_safe - t_unsafe > 1e-16; ++it) {
        const double mid = 0.5 * (t_unsafe + t_safe);
        if (ctx.c(lerp(ctx.nominal, best, mid)) >= 0.0) t_safe = mid;
        else t_unsafe = mid;
    }
    return lerp(ctx.nominal, best, t_safe);
}

}  // namespace dtcbf
