#include <gtest/gtest.h>

#include <cmath>

#include "dtcbf/barrier.hpp"
#include "dtcbf/double_integrator.hpp"
#include "dtcbf/rng.hpp"

using namespace dtcbf;

namespace {

const SimParams kSim;
const EvasiveAccelPair kPair{-2.0, 2.0};

Barrier<DblIntState, DblIntControl> constant_barrier(double c)
{
    Barrier<DblIntState, DblIntControl> h;
    h.name = "const";
    h.evaluate = [c](const DblIntState&) { return c; };
    h.evasive = [](const DblIntState&) { return DblIntControl{0.0}; };
    return h;
}

}  // namespace

TEST(Constraint, MatchesDefinition)
{
    const auto h = dblint_low_barrier(0.0, kPair, kSim);
    const auto f = dblint_stepper(kSim);
    const DblIntState s{1.0, -1.0};
    const DblIntControl u{0.5};
    const double expect = h(dblint_step(s, u, kSim)) - 0.5 * h(s);
    EXPECT_DOUBLE_EQ(constraint(h, f, s, u, 0.5), expect);
    EXPECT_DOUBLE_EQ(constraint_given(h, f, s, h(s), u, 0.5), expect);
    EXPECT_THROW(constraint(h, f, s, u, 0.0), PreconditionError);
    EXPECT_THROW(constraint(h, f, s, u, 1.5), PreconditionError);
}

TEST(Composition, MinAndMaxValues)
{
    const auto a = constant_barrier(1.0);
    const auto b = constant_barrier(-2.0);
    const DblIntState s{};
    EXPECT_EQ(compose_min(a, b, a.evasive)(s), -2.0);
    EXPECT_EQ(compose_max(a, b)(s), 1.0);
}

TEST(Composition, MaxTieGoesToFirstArgument)
{
    auto a = constant_barrier(1.0);
    auto b = constant_barrier(1.0);
    a.evasive = [](const DblIntState&) { return DblIntControl{-1.0}; };
    b.evasive = [](const DblIntState&) { return DblIntControl{+1.0}; };
    EXPECT_EQ(compose_max(a, b).evasive({}).accel, -1.0);
    EXPECT_EQ(compose_max(b, a).evasive({}).accel, +1.0);
}

TEST(Composition, HorizonHintTakesTheLarger)
{
    auto a = constant_barrier(1.0);
    auto b = constant_barrier(1.0);
    a.horizon_hint = 10;
    b.horizon_hint = 64;
    EXPECT_EQ(compose_min(a, b, a.evasive).horizon_hint.value(), 64u);
    EXPECT_FALSE(compose_max(constant_barrier(0), constant_barrier(0)).horizon_hint.has_value());
}

TEST(Rollout, ConstantSafetyFunctionGivesConstant)
{
    const auto f = dblint_stepper(kSim);
    const auto zeta = dblint_evasive(kPair, kSim.delta);
    const std::function<bool(const DblIntState&)> settled = [](const DblIntState& s) { return s.v == 0.0; };
    const auto h = rollout_barrier<DblIntState, DblIntControl>([](const DblIntState&) { return 3.25; }, zeta, f,
                                                               settled, 100);
    EXPECT_EQ(h({0.0, 5.0}), 3.25);
    EXPECT_EQ(h({-4.0, -7.0}), 3.25);
}

TEST(Rollout, ReportsSettlingIndexAndHorizonError)
{
    const auto f = dblint_stepper(kSim);
    const auto zeta = dblint_evasive(kPair, kSim.delta);
    const std::function<bool(const DblIntState&)> settled = [](const DblIntState& s) { return s.v == 0.0; };
    const SafetyFunction<DblIntState> rho = [](const DblIntState& s) { return -s.p; };
    const auto r = rollout_infimum<DblIntState, DblIntControl>(rho, zeta, f, settled, 100, {0.0, 1.0});
    EXPECT_GE(r.steps, 5u);
    EXPECT_LE(r.steps, 6u);
    EXPECT_NEAR(r.value, -0.3, 1e-15);
    EXPECT_THROW((rollout_infimum<DblIntState, DblIntControl>(rho, zeta, f, settled, 3, {0.0, 1.0})), HorizonError);
    const auto still = rollout_infimum<DblIntState, DblIntControl>(rho, zeta, f, settled, 0, {2.0, 0.0});
    EXPECT_EQ(still.steps, 0u);
    EXPECT_EQ(still.value, -2.0);
}

TEST(Rollout, MatchesClosedFormDoubleIntegratorBarrier)
{
    const auto f = dblint_stepper(kSim);
    const auto zeta = dblint_evasive(kPair, kSim.delta);
    const std::function<bool(const DblIntState&)> settled = [](const DblIntState& s) { return s.v == 0.0; };
    const auto h = rollout_barrier<DblIntState, DblIntControl>([](const DblIntState& s) { return s.p - 0.5; }, zeta,
                                                               f, settled, 10000);
    RngStream rng(3, 0);
    for (int i = 0; i < 2000; ++i) {
        const DblIntState s{rng.uniform(-5.0, 5.0), rng.uniform(-6.0, 6.0)};
        ASSERT_NEAR(h(s), h_low(s, 0.5, kPair, kSim.delta), 1e-9) << s.p << " " << s.v;
    }
}

TEST(ForwardInvariance, EvasivePolicyNeverViolates)
{
    const auto h = dblint_interval_barrier(DblIntParams{}, kSim);
    const auto f = dblint_stepper(kSim);
    const Policy<DblIntState, DblIntControl> zeta = h.evasive;
    const auto rep = check_forward_invariance(h, f, zeta, {5.0, 3.0}, 200);
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.steps, 200u);
    EXPECT_GE(rep.min_value, 0.0);
}

TEST(ForwardInvariance, ReportsFirstViolationAsData)
{
    const auto h = dblint_low_barrier(0.0, kPair, kSim);
    const auto f = dblint_stepper(kSim);
    const Policy<DblIntState, DblIntControl> push = [](const DblIntState&) { return DblIntControl{-2.0}; };
    const auto rep = check_forward_invariance(h, f, push, {1.0, 0.0}, 100);
    ASSERT_FALSE(rep.ok());
    EXPECT_LT(rep.min_value, -1e-6);
    // p_k = 1 - 0.01 k (k - 1), v_k = -0.2 k: eta is 0.02 at k = 7 and -0.28 at k = 8
    EXPECT_EQ(*rep.first_violation, 8u);
}

TEST(ForwardInvariance, UnsafeStartIsAPreconditionError)
{
    const auto h = dblint_low_barrier(0.0, kPair, kSim);
    const Policy<DblIntState, DblIntControl> zero = [](const DblIntState&) { return DblIntControl{0.0}; };
    EXPECT_THROW(check_forward_invariance(h, dblint_stepper(kSim), zero, {-1.0, 0.0}, 10), PreconditionError);
}
