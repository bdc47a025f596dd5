#include <gtest/gtest.h>

#include <cmath>

#include "dtcbf/car_env.hpp"
#include "dtcbf/fw_env.hpp"
#include "dtcbf/policies.hpp"
#include "dtcbf/shielded_env.hpp"

using namespace dtcbf;

namespace {

const ParamSet kP;

FwControl level_flight(const FwEnv& env) { return fw_evasive(env.state(), kP.fw, kP.sim); }

}  // namespace

// ------------------------------------------------------------------ fixed wing

TEST(FwEnvReset, SameSeedSameWaypoints)
{
    FwEnv a(kP), b(kP), c(kP);
    a.reset(42);
    b.reset(42);
    c.reset(43);
    ASSERT_EQ(a.waypoints().size(), 5u);
    EXPECT_EQ(a.waypoints(), b.waypoints());
    EXPECT_NE(a.waypoints(), c.waypoints());
}

TEST(FwEnvReset, WaypointsChainFromTheStart)
{
    FwEnv env(kP);
    env.reset(1);
    std::array<double, 3> prev{0.0, 0.0, 500.0};
    for (const auto& w : env.waypoints()) {
        EXPECT_DOUBLE_EQ(w[0] - prev[0], 100.0);
        EXPECT_LE(std::abs(w[1] - prev[1]), 25.0);
        EXPECT_LE(std::abs(w[2] - prev[2]), 25.0);
        prev = w;
    }
}

TEST(FwEnvReset, ObservationAtStart)
{
    FwEnv env(kP);
    const auto obs = env.reset(3);
    ASSERT_EQ(obs.size(), FwEnv::observation_size());
    ASSERT_EQ(obs.size(), 23u);
    EXPECT_DOUBLE_EQ(obs[0], (17.5 - 15.0) / (15.0 - 20.0));
    EXPECT_EQ(obs[1], 0.0);
    EXPECT_EQ(obs[2], 0.0);
    EXPECT_EQ(obs[3], 1.0);
    const auto& w = env.waypoints();
    EXPECT_DOUBLE_EQ(obs[4], 100.0 / 50.0);
    EXPECT_DOUBLE_EQ(obs[5], w[0][1] / 50.0);
    EXPECT_DOUBLE_EQ(obs[6], (w[0][2] - 500.0) / 50.0);
    for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(obs[7 + 4 * m + 3], 1.0);
}

TEST(FwEnvReset, ObservationIsZeroFilledNearTheEnd)
{
    FwEnvConfig cfg;
    cfg.waypoint_count = 2;
    FwEnv env(kP, cfg);
    const auto obs = env.reset(3);
    ASSERT_EQ(obs.size(), 23u);
    EXPECT_EQ(obs[10], 1.0);
    for (std::size_t i = 11; i < 23; ++i) EXPECT_EQ(obs[i], 0.0) << i;
}

TEST(FwEnvStep, ProtocolErrors)
{
    FwEnv env(kP);
    EXPECT_THROW(env.step({}), ProtocolError);
    FwEnvConfig cfg;
    cfg.max_steps = 1;
    FwEnv one(kP, cfg);
    one.reset(0);
    const auto r = one.step(level_flight(one));
    EXPECT_TRUE(r.done);
    EXPECT_EQ(r.done_reason, DoneReason::horizon);
    EXPECT_THROW(one.step(level_flight(one)), ProtocolError);
}

TEST(FwEnvStep, HorizonAtStepOneThousand)
{
    FwEnvConfig cfg;
    cfg.waypoint_spacing = 1e6;
    cfg.waypoint_timeout = 1e6;
    FwEnv env(kP, cfg);
    env.reset(0);
    for (std::size_t k = 1; k < 1000; ++k) ASSERT_FALSE(env.step(level_flight(env)).done) << k;
    const auto r = env.step(level_flight(env));
    EXPECT_TRUE(r.done);
    EXPECT_EQ(r.done_reason, DoneReason::horizon);
    EXPECT_EQ(r.cost, 0);
}

TEST(FwEnvStep, RewardIsScaledDistanceChange)
{
    FwEnv env(kP);
    env.reset(5);
    const auto& w = env.waypoints()[0];
    const FwState s0 = env.state();
    const double d0 = std::hypot(w[0] - s0.x, w[1] - s0.y, w[2] - s0.z);
    const auto r = env.step(level_flight(env));
    const FwState& s1 = env.state();
    const double d1 = std::hypot(w[0] - s1.x, w[1] - s1.y, w[2] - s1.z);
    EXPECT_NEAR(r.reward, 0.01 * (d0 - d1), 1e-15);
}

TEST(FwEnvStep, CrossingAddsTheBonus)
{
    FwEnvConfig cfg;
    cfg.lateral_range = 0.0;
    cfg.waypoint_spacing = 1.7;
    FwEnv env(kP, cfg);
    env.reset(0);
    const auto r = env.step(level_flight(env));
    const double d = env.state().x - 1.7;
    ASSERT_GT(d, 0.0);
    EXPECT_NEAR(r.reward, 0.01 * (1.7 - d) + std::exp(-d / 25.0), 1e-12);
    EXPECT_EQ(env.next_waypoint(), 1u);
}

TEST(FwEnvStep, TimeoutAfterTenSecondsWithoutAWaypoint)
{
    FwEnvConfig cfg;
    cfg.waypoint_spacing = 1e6;
    FwEnv env(kP, cfg);
    env.reset(0);
    for (int k = 1; k <= 100; ++k) ASSERT_FALSE(env.step(level_flight(env)).done) << k;
    EXPECT_EQ(env.step(level_flight(env)).done_reason, DoneReason::timeout);
}

TEST(FwEnvStep, LastWaypointEndsTheEpisode)
{
    FwEnvConfig cfg;
    cfg.lateral_range = 0.0;
    cfg.waypoint_spacing = 10.0;
    cfg.waypoint_count = 2;
    FwEnv env(kP, cfg);
    env.reset(0);
    StepResult<FwControl> r;
    int k = 0;
    do {
        r = env.step(level_flight(env));
        ++k;
    } while (!r.done && k < 100);
    EXPECT_EQ(r.done_reason, DoneReason::last_waypoint);
    EXPECT_EQ(k, 12);  // x = 1.75 k passes 20 at k = 12
}

TEST(FwEnvStep, HittingTheGroundCostsAndEnds)
{
    FwEnvConfig cfg;
    cfg.initial = {17.5, -0.5, 0.0, 0.0, 0.0, 0.5};
    FwEnv env(kP, cfg);
    env.reset(0);
    const auto r = env.step({10.0, 1.0, 0.0});
    EXPECT_EQ(r.done_reason, DoneReason::ground);
    EXPECT_EQ(r.cost, 1);
}

TEST(FwEnvStep, CostMatchesIndependentEnvelopeCheck)
{
    FwEnv env(kP);
    RngStream rng(9, 0);
    int costs = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        env.reset(seed);
        while (!env.done()) {
            const auto r = env.step(sample_uniform(env.box(), rng));
            const auto& s = r.info.state;
            const bool bad = s[0] < 15.0 - 1e-6 || s[0] > 20.0 + 1e-6 || s[1] < kP.fw.pitch_min - 1e-6 ||
                             s[1] > kP.fw.pitch_max + 1e-6 || s[5] < 400.0 - 1e-6;
            ASSERT_EQ(r.cost, bad ? 1 : 0);
            costs += r.cost;
        }
    }
    EXPECT_GT(costs, 0);
}

TEST(FwEnvStep, ActionIsClampedAndReported)
{
    FwEnv env(kP);
    env.reset(0);
    const auto r = env.step({100.0, 1.0, 0.0});
    EXPECT_TRUE(r.info.action_clamped);
    EXPECT_EQ(r.info.applied.thrust, kP.fw.thrust_max);
    EXPECT_FALSE(r.info.decision.has_value());
}

// ------------------------------------------------------------------------ car

TEST(CarEnvReset, DeterministicAndSafe)
{
    CarEnv a(kP), b(kP);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        a.reset(seed);
        b.reset(seed);
        ASSERT_EQ(a.state().to_array(), b.state().to_array());
        EXPECT_GE(h_car(a.state(), kP.car, kP.sim), 0.0);
        for (int j = 1; j <= 2; ++j) {
            const double off = a.state().lead(j).x - a.state().ego.x;
            EXPECT_GE(off, 100.0);
            EXPECT_LE(off, 500.0);
            EXPECT_DOUBLE_EQ(a.state().lead(j).y, (j - 0.5) * 3.6);
        }
    }
}

TEST(CarEnvReset, ObservationLayout)
{
    CarEnv env(kP);
    const auto obs = env.reset(4);
    ASSERT_EQ(obs.size(), 8u);
    const double vt = 70.0 * kMphToMps;
    const auto& s = env.state();
    EXPECT_DOUBLE_EQ(obs[3], (s.lead1.v - vt) / vt);
    EXPECT_DOUBLE_EQ(obs[4], (s.lead2.v - vt) / vt);
    EXPECT_DOUBLE_EQ(obs[5], (s.ego.v - vt) / vt);
    EXPECT_NEAR(obs[5], -0.05, 1e-15);
    EXPECT_DOUBLE_EQ(obs[2], -0.5);
    EXPECT_EQ(obs[6], 0.0);
    EXPECT_EQ(obs[7], 1.0);
}

TEST(CarEnvReset, ImpossibleStartIsAConfigError)
{
    CarEnvConfig cfg;
    cfg.lead_offset_min = 0.0;
    cfg.lead_offset_max = 1.0;
    cfg.reset_max_draws = 50;
    CarEnv env(kP, cfg);
    EXPECT_THROW(env.reset(0), ConfigError);
}

TEST(CarEnvStep, RewardOneAtTargetSpeed)
{
    CarEnvConfig cfg;
    cfg.initial_speed_fraction = 1.0;
    CarEnv env(kP, cfg);
    env.reset(0);
    EXPECT_EQ(env.step({0.0, 0.0}).reward, 1.0);
}

TEST(CarEnvStep, ProtocolErrors)
{
    CarEnv env(kP);
    EXPECT_THROW(env.step({}), ProtocolError);
    CarEnvConfig cfg;
    cfg.max_steps = 2;
    CarEnv two(kP, cfg);
    two.reset(0);
    EXPECT_FALSE(two.step({}).done);
    EXPECT_EQ(two.step({}).done_reason, DoneReason::horizon);
    EXPECT_THROW(two.step({}), ProtocolError);
}

TEST(CarEnvStep, SteeringOffTheRoadEndsWithCost)
{
    CarEnv env(kP);
    env.reset(2);
    StepResult<CarControl> r;
    do {
        r = env.step({0.0, -kP.car.steer_max});
    } while (!r.done);
    EXPECT_EQ(r.done_reason, DoneReason::off_road);
    EXPECT_EQ(r.cost, 1);
}

TEST(CarEnvStep, LeadsKeepTheAssumptionAndSpeedBox)
{
    CarEnv env(kP);
    RngStream rng(10, 0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        env.reset(seed);
        while (!env.done()) {
            const auto prev = env.state();
            env.step(sample_uniform(env.box(), rng));
            ASSERT_NO_THROW(check_lead_assumption(env.state(), kP.car));
            for (int j = 1; j <= 2; ++j) {
                const double dv = env.state().lead(j).v - prev.lead(j).v;
                const bool respawned = env.state().lead(j).x - prev.lead(j).x > 50.0;
                if (!respawned) {
                    ASSERT_LE(std::abs(dv), kP.car.accel_max * kP.sim.delta + 1e-12);
                }
                ASSERT_LE(env.state().lead(j).v, 70.0 * kMphToMps + 1e-12);
            }
        }
    }
}

TEST(CarEnvStep, PassedLeadsRespawnAhead)
{
    CarEnvConfig cfg;
    cfg.lead_speed_max = 0.0;  // parked leads
    cfg.lead_offset_min = 400.0;
    cfg.lead_offset_max = 500.0;
    // a start where lane 2 is clear well past the lane 1 lead
    std::uint64_t seed = 0;
    for (CarEnv probe(kP, cfg);; ++seed) {
        probe.reset(seed);
        if (probe.state().lead2.x - probe.state().lead1.x > 60.0) break;
        ASSERT_LT(seed, 200u);
    }
    auto env = wrap_with_filter(CarEnv(kP, cfg), FilterMode::line);
    env.reset(seed);
    int respawns = 0;
    while (!env.done() && respawns == 0) {
        const auto before = env.state();
        const CarState& e = before.ego;
        const double steer = std::clamp(0.5 * (0.02 * (5.4 - e.y) - e.psi), -kP.car.steer_max, kP.car.steer_max);
        env.step({kP.car.accel_max, steer});
        for (int j = 1; j <= 2; ++j) {
            if (env.state().lead(j).x > before.lead(j).x + 50.0) {
                ++respawns;
                EXPECT_EQ(j, 1);
                const double off = env.state().lead(j).x - env.state().ego.x;
                EXPECT_GE(off, 400.0);
                EXPECT_LE(off, 500.0);
            }
        }
    }
    EXPECT_GT(respawns, 0);
}

TEST(CarEnvStep, CostMatchesIndependentRecheck)
{
    CarEnv env(kP);
    RngStream rng(12, 0);
    int costs = 0;
    const auto& car = kP.car;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        env.reset(seed);
        while (!env.done()) {
            const auto r = env.step(sample_uniform(env.box(), rng));
            const auto& x = r.info.state;
            const CarState ego{x[8], x[9], x[10], x[11]};
            const double off = car_offset(ego, car);
            const double v = std::max(0.0, ego.v);
            const double gap1 = x[0] - ego.x - car.min_gap - v * car.headway;
            const double gap2 = x[4] - ego.x - car.min_gap - v * car.headway;
            const bool in1 = ego.y - off >= -1e-6 && ego.y + off <= 3.6 + 1e-6;
            const bool in2 = ego.y - off >= 3.6 - 1e-6 && ego.y + off <= 7.2 + 1e-6;
            const bool on_road = ego.y - off >= -1e-6 && ego.y + off <= 7.2 + 1e-6;
            const bool lane_ok = (in1 && gap1 >= -1e-6) || (in2 && gap2 >= -1e-6) ||
                                 (gap1 >= -1e-6 && gap2 >= -1e-6);
            const bool safe = v <= car.speed_limit + 1e-6 && on_road && lane_ok;
            ASSERT_EQ(r.cost, safe ? 0 : 1);
            costs += r.cost;
        }
    }
    EXPECT_GT(costs, 0);
}

// ------------------------------------------------------------------- shielded

TEST(ShieldedEnv, NoneModeHasNoDecision)
{
    auto env = wrap_with_filter(CarEnv(kP), FilterMode::none);
    env.reset(0);
    EXPECT_FALSE(env.step({0.0, 0.0}).info.decision.has_value());
}

template <class Env>
void expect_shielded_cost_free(FilterMode mode, int episodes)
{
    auto env = wrap_with_filter(Env(kP), mode);
    RngStream rng(77, 0);
    int steps = 0, overrides = 0;
    for (int e = 0; e < episodes; ++e) {
        env.reset(static_cast<std::uint64_t>(e));
        while (!env.done()) {
            const auto r = env.step(sample_uniform(env.env().box(), rng));
            ASSERT_EQ(r.cost, 0) << "episode " << e << " step " << steps;
            ASSERT_TRUE(r.info.decision.has_value());
            ++steps;
            overrides += r.info.decision->branch != FilterBranch::nominal_passed;
        }
    }
    const double pct = 100.0 * overrides / steps;
    EXPECT_GT(pct, 0.0);
    EXPECT_LT(pct, 100.0);
}

TEST(ShieldedEnv, FixedWingSingleRandomActionsCostNothing) { expect_shielded_cost_free<FwEnv>(FilterMode::single, 10); }
TEST(ShieldedEnv, FixedWingCandidatesCostNothing) { expect_shielded_cost_free<FwEnv>(FilterMode::candidates, 5); }
TEST(ShieldedEnv, CarSingleRandomActionsCostNothing) { expect_shielded_cost_free<CarEnv>(FilterMode::single, 10); }
TEST(ShieldedEnv, CarLineCostNothing) { expect_shielded_cost_free<CarEnv>(FilterMode::line, 5); }
