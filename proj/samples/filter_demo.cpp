// Filters an unsafe acceleration for a double integrator approaching its
// lower position bound and compares the three override strategies.

#include <cstdio>

#include "dtcbf/dtcbf.hpp"

int main()
{
    using namespace dtcbf;
    const SimParams sim;
    const DblIntParams dbl;
    FilterProblem<DblIntState, DblIntControl> p{dblint_low_barrier(dbl.position_min, evasive_pair(dbl), sim),
                                                dblint_stepper(sim), dblint_control_box(dbl), sim.lambda, 32};
    const DblIntState s{1.0, -1.5};
    const DblIntControl nominal{-2.0};
    std::printf("h(s) = %.6f\n", p.h(s));
    const auto single = filter_single(p, s, nominal);
    const auto line = filter_line(p, s, nominal);
    const auto oracle = grid_oracle(p, s, nominal, 1000);
    const auto cand = filter_with_candidates(p, s, nominal, {oracle});
    std::printf("single     u = %+.6f  distance %.6f\n", single.applied.accel, single.override_distance);
    std::printf("line       u = %+.6f  distance %.6f  t = %.4f\n", line.applied.accel, line.override_distance,
                line.line_fraction);
    std::printf("candidates u = %+.6f  distance %.6f\n", cand.applied.accel, cand.override_distance);
    std::printf("oracle     u = %+.6f\n", oracle.accel);
    return 0;
}
