#pragma once

// Environment wrapper that routes every action through a safety filter.

#include <cstdint>
#include <utility>
#include <vector>

#include "dtcbf/safety_filter.hpp"
#include "dtcbf/step_result.hpp"

namespace dtcbf {

template <class Env>
class ShieldedEnv {
public:
    using State = typename Env::State;
    using Control = typename Env::Control;

    ShieldedEnv(Env env, FilterMode mode, std::size_t segments = 32) : env_(std::move(env)), mode_(mode)
    {
        if (mode_ != FilterMode::none) {
            problem_.h = env_.barrier();
            problem_.f = env_.filter_stepper();
            problem_.box = env_.box();
            problem_.lambda = env_.params().sim.lambda;
            problem_.segments = segments;
        }
    }

    std::vector<double> reset(std::uint64_t seed) { return env_.reset(seed); }

    StepResult<Control> step(const Control& nominal)
    {
        if (mode_ == FilterMode::none) return env_.step(nominal);
        if (env_.done()) throw ProtocolError("shielded env: step after done");
        std::vector<Control> candidates;
        if (mode_ == FilterMode::candidates)
            candidates = axis_swap_candidates(problem_.box.clamp(nominal),
                                              problem_.box.clamp(problem_.h.evasive(env_.state())));
        auto decision = apply_filter(mode_, problem_, env_.state(), nominal, candidates);
        auto r = env_.step(decision.applied);
        r.info.action_clamped = decision.nominal_clamped;
        r.info.decision = std::move(decision);
        return r;
    }

    FilterMode mode() const { return mode_; }
    const FilterProblem<State, Control>& problem() const { return problem_; }
    const Env& env() const { return env_; }
    const State& state() const { return env_.state(); }
    bool done() const { return env_.done(); }

private:
    Env env_;
    FilterMode mode_;
    FilterProblem<State, Control> problem_;
};

template <class Env>
ShieldedEnv<Env> wrap_with_filter(Env env, FilterMode mode, std::size_t segments = 32)
{
    return ShieldedEnv<Env>(std::move(env), mode, segments);
}

}  // namespace dtcbf
