// One car episode with a random nominal policy, shielded by the line-search
// filter. Prints how often the filter overrode the policy.

#include <cstdio>

#include "dtcbf/dtcbf.hpp"

int main()
{
    using namespace dtcbf;
    const ParamSet params;
    auto env = wrap_with_filter(CarEnv(params), FilterMode::line);
    env.reset(7);
    RngStream rng(7, 2);
    int steps = 0, overrides = 0, cost = 0;
    double reward = 0.0;
    while (!env.done()) {
        const auto r = env.step(sample_uniform(env.env().box(), rng));
        ++steps;
        reward += r.reward;
        cost += r.cost;
        if (r.info.decision->branch != FilterBranch::nominal_passed) ++overrides;
    }
    std::printf("steps %d  reward %.3f  cost %d  overrides %d\n", steps, reward, cost, overrides);
    return cost == 0 ? 0 : 1;
}
