#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "dtcbf/double_integrator.hpp"
#include "dtcbf/fixed_wing.hpp"
#include "dtcbf/rng.hpp"
#include "dtcbf/safety_filter.hpp"

using namespace dtcbf;

namespace {

const SimParams kSim;
const DblIntParams kDbl;

using DblProblem = FilterProblem<DblIntState, DblIntControl>;

DblProblem dbl_low_problem()
{
    return {dblint_low_barrier(kDbl.position_min, evasive_pair(kDbl), kSim), dblint_stepper(kSim),
            dblint_control_box(kDbl)};
}

// h(s) = p with p' = p + u: the constraint is 0.5 p + u, affine along any segment.
DblProblem affine_problem()
{
    DblProblem p;
    p.h.name = "affine";
    p.h.evaluate = [](const DblIntState& s) { return s.p; };
    p.h.evasive = [](const DblIntState&) { return DblIntControl{2.0}; };
    p.f = [](const DblIntState& s, const DblIntControl& u) { return DblIntState{s.p + u.accel, s.v}; };
    p.box = dblint_control_box(kDbl);
    return p;
}

const DblIntState kNearWall{1.5, -2.0};  // h_low = 0.4; full reverse thrust is unsafe

}  // namespace

TEST(FilterMode, ParseRoundTrip)
{
    for (auto m : {FilterMode::none, FilterMode::single, FilterMode::line, FilterMode::candidates})
        EXPECT_EQ(parse_filter_mode(to_string(m)), m);
    EXPECT_THROW(parse_filter_mode("bisect"), ConfigError);
}

TEST(FilterSingle, EvasiveNominalPassesThrough)
{
    const auto p = dbl_low_problem();
    const auto z = p.h.evasive(kNearWall);
    const auto d = filter_single(p, kNearWall, z);
    EXPECT_EQ(d.branch, FilterBranch::nominal_passed);
    EXPECT_EQ(d.override_distance, 0.0);
    EXPECT_EQ(d.applied.accel, z.accel);
}

TEST(FilterSingle, DeeplySafeStatePassesAnyNominal)
{
    const auto p = dbl_low_problem();
    for (double a = -2.0; a <= 2.0; a += 0.25) {
        const auto d = filter_single(p, {5.0, 0.0}, {a});
        EXPECT_EQ(d.branch, FilterBranch::nominal_passed);
        EXPECT_EQ(d.applied.accel, a);
    }
}

TEST(FilterSingle, FixedWingAtTopSpeedWithFullThrust)
{
    const ParamSet ps;
    FilterProblem<FwState, FwControl> p{fw_barrier(ps.fw, ps.sim), fw_stepper(ps.sim, ps.fw),
                                         fw_control_box(ps.fw)};
    const FwState s{ps.fw.speed_max, 0.0, 0.0, 0.0, 0.0, 500.0};
    const auto d = filter_single(p, s, FwControl{ps.fw.thrust_max, 1.0, 0.0});
    EXPECT_EQ(d.branch, FilterBranch::single);
    const FwControl z = fw_evasive(s, ps.fw, ps.sim);
    EXPECT_EQ(d.applied.thrust, z.thrust);
    EXPECT_EQ(d.applied.load, z.load);
    EXPECT_EQ(d.applied.bank, z.bank);
    EXPECT_GE(d.constraint_value, -kConstraintTolerance);
    EXPECT_GT(d.override_distance, 0.0);
}

TEST(FilterLine, AffineCrossingWithinOneCell)
{
    const auto p = affine_problem();
    const DblIntState s{1.1, 0.0};
    // c(t) = 0.55 - 2 + 4 t, zero at t = 0.3625
    const auto d = filter_line(p, s, {-2.0});
    EXPECT_EQ(d.branch, FilterBranch::line);
    EXPECT_GE(d.line_fraction, 0.3625);
    EXPECT_LT(d.line_fraction - 0.3625, 1.0 / 32.0);
    EXPECT_EQ(d.line_fraction, 12.0 / 32.0);
    EXPECT_GE(d.constraint_value, 0.0);
    EXPECT_NEAR(d.override_distance, 4.0 * d.line_fraction, 1e-15);
}

TEST(FilterLine, SafeNominalHasZeroFraction)
{
    const auto d = filter_line(affine_problem(), {1.1, 0.0}, {1.0});
    EXPECT_EQ(d.branch, FilterBranch::nominal_passed);
    EXPECT_EQ(d.line_fraction, 0.0);
}

TEST(FilterLine, OneSegmentMatchesSingle)
{
    auto p = dbl_low_problem();
    p.segments = 1;
    RngStream rng(21, 0);
    for (int i = 0; i < 2000; ++i) {
        const DblIntState s{rng.uniform(0.0, 4.0), rng.uniform(-4.0, 1.0)};
        if (p.h(s) < 0.0) continue;
        const DblIntControl u{rng.uniform(-2.0, 2.0)};
        const auto a = filter_line(p, s, u);
        const auto b = filter_single(p, s, u);
        ASSERT_EQ(a.applied.accel, b.applied.accel);
    }
    p.segments = 0;
    EXPECT_THROW(filter_line(p, kNearWall, {-2.0}), PreconditionError);
}

TEST(FilterCandidates, EmptyListMatchesLine)
{
    const auto p = dbl_low_problem();
    const auto a = filter_with_candidates(p, kNearWall, {-2.0}, {});
    const auto b = filter_line(p, kNearWall, {-2.0});
    EXPECT_EQ(a.applied.accel, b.applied.accel);
    EXPECT_EQ(a.branch, b.branch);
}

TEST(FilterCandidates, EvasiveCandidateTiesGoToTheEvasiveLine)
{
    const auto p = dbl_low_problem();
    const auto z = p.h.evasive(kNearWall);
    const auto d = filter_with_candidates(p, kNearWall, {-2.0}, {z});
    EXPECT_EQ(d.branch, FilterBranch::line);
}

TEST(FilterCandidates, OracleCandidateBeatsTheGrid)
{
    const auto p = dbl_low_problem();
    const DblIntControl nominal{-2.0};
    const auto line = filter_line(p, kNearWall, nominal);
    const auto best = grid_oracle(p, kNearWall, nominal, 1000);
    const auto d = filter_with_candidates(p, kNearWall, nominal, {best});
    EXPECT_EQ(d.branch, FilterBranch::candidate_line);
    EXPECT_LT(d.override_distance, line.override_distance);
    EXPECT_LE(distance(best, nominal), line.override_distance + 1e-12);
    EXPECT_GE(constraint(p.h, p.f, kNearWall, d.applied, p.lambda), 0.0);
}

TEST(FilterCandidates, UnsafeCandidateIsDiscarded)
{
    const auto p = dbl_low_problem();
    const auto d = filter_with_candidates(p, kNearWall, {-2.0}, {DblIntControl{-1.9}});
    EXPECT_EQ(d.branch, FilterBranch::line);
}

TEST(GridOracle, SafeNominalIsReturned)
{
    const auto u = grid_oracle(dbl_low_problem(), {5.0, 0.0}, DblIntControl{0.5}, 10);
    EXPECT_EQ(u.accel, 0.5);
}

TEST(GridOracle, RefiningTheLatticeNeverHurts)
{
    const auto p = dbl_low_problem();
    RngStream rng(22, 0);
    for (int i = 0; i < 200; ++i) {
        const DblIntState s{rng.uniform(0.0, 3.0), rng.uniform(-4.0, 0.0)};
        if (p.h(s) < 0.0) continue;
        const DblIntControl nominal{rng.uniform(-2.0, 2.0)};
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t res : {5u, 10u, 20u, 40u, 80u}) {
            const double d = distance(grid_oracle(p, s, nominal, res, false), nominal);
            ASSERT_LE(d, prev);
            prev = d;
        }
    }
    EXPECT_THROW(grid_oracle(p, kNearWall, DblIntControl{-2.0}, 0), PreconditionError);
}

TEST(Dominance, OracleThenLineThenSingle)
{
    const auto p = dbl_low_problem();
    RngStream rng(23, 0);
    int overridden = 0;
    for (int i = 0; i < 500; ++i) {
        const DblIntState s{rng.uniform(0.0, 3.0), rng.uniform(-4.0, 0.0)};
        if (p.h(s) < 0.0) continue;
        const DblIntControl nominal{rng.uniform(-2.0, 2.0)};
        const auto single = filter_single(p, s, nominal);
        const auto line = filter_line(p, s, nominal);
        const double oracle = distance(grid_oracle(p, s, nominal, 1000), nominal);
        if (single.branch != FilterBranch::nominal_passed) ++overridden;
        ASSERT_LE(line.override_distance, single.override_distance + 1e-12);
        ASSERT_LE(oracle, line.override_distance + 1e-12);
    }
    EXPECT_GT(overridden, 20);
}

TEST(FilterSoundness, AppliedActionIsSafeAndInTheBox)
{
    const auto p = dbl_low_problem();
    RngStream rng(24, 0);
    for (int i = 0; i < 5000; ++i) {
        const DblIntState s{rng.uniform(0.0, 5.0), rng.uniform(-5.0, 5.0)};
        if (p.h(s) < 0.0) continue;
        const DblIntControl nominal{rng.uniform(-3.0, 3.0)};
        for (auto m : {FilterMode::single, FilterMode::line, FilterMode::candidates}) {
            const auto d = apply_filter(m, p, s, nominal, axis_swap_candidates(nominal, p.h.evasive(s)));
            ASSERT_TRUE(p.box.contains(d.applied));
            ASSERT_GE(constraint(p.h, p.f, s, d.applied, p.lambda), -kConstraintTolerance);
            ASSERT_EQ(d.constraint_value, constraint(p.h, p.f, s, d.applied, p.lambda));
        }
    }
    EXPECT_THROW(apply_filter(FilterMode::none, p, kNearWall, DblIntControl{0.0}), PreconditionError);
}

TEST(FilterClamp, OutOfBoxNominalIsClampedAndReported)
{
    const auto p = dbl_low_problem();
    const auto d = filter_line(p, {5.0, 0.0}, {7.5});
    EXPECT_TRUE(d.nominal_clamped);
    EXPECT_EQ(d.nominal.accel, 7.5);
    EXPECT_EQ(d.applied.accel, 2.0);
    EXPECT_EQ(d.branch, FilterBranch::nominal_passed);
    EXPECT_FALSE(filter_line(p, {5.0, 0.0}, {1.0}).nominal_clamped);
}

TEST(FilterErrors, BrokenEvasiveIsAnInvariantError)
{
    auto p = dbl_low_problem();
    p.h.evasive = [](const DblIntState&) { return DblIntControl{-2.0}; };
    EXPECT_THROW(filter_single(p, kNearWall, {-2.0}), InvariantError);
    EXPECT_THROW(filter_line(p, kNearWall, {-2.0}), InvariantError);
}

TEST(FilterErrors, UnsafeStateIsAPreconditionError)
{
    EXPECT_THROW(filter_single(dbl_low_problem(), {-1.0, 0.0}, {0.0}), PreconditionError);
    auto p = dbl_low_problem();
    p.lambda = 0.0;
    EXPECT_THROW(filter_single(p, kNearWall, {0.0}), PreconditionError);
}

TEST(FilterDeterminism, IdenticalInputsIdenticalDecisions)
{
    const auto p = dbl_low_problem();
    const auto a = filter_with_candidates(p, kNearWall, {-1.7}, {DblIntControl{0.3}});
    const auto b = filter_with_candidates(p, kNearWall, {-1.7}, {DblIntControl{0.3}});
    EXPECT_EQ(std::memcmp(&a.applied, &b.applied, sizeof a.applied), 0);
    EXPECT_EQ(a.line_fraction, b.line_fraction);
    EXPECT_EQ(a.branch, b.branch);
}
