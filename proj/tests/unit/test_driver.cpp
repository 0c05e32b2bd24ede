#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "passfl/driver.hpp"
#include "passfl/errors.hpp"
#include "passfl/random.hpp"

using namespace passfl;

namespace {

Scenario scenario(std::uint64_t seed, int K = 12) {
  return generate_scenario(seed, K, ScenarioTemplate{});
}

}  // namespace

TEST(OptimizeRound, LambdaNearOneSchedulesNobody) {
  const Scenario s = scenario(1);
  const RoundOutcome r = optimize_round(s, 1.0 - 1e-9);
  EXPECT_EQ(r.scheduled_count(), 0);
  EXPECT_EQ(r.tau_t, 0.0);
  EXPECT_EQ(r.f_learn, static_cast<double>(s.total_data()));
  EXPECT_TRUE(audit(r, s).empty());
}

TEST(OptimizeRound, LambdaNearZeroSchedulesEveryFeasibleDevice) {
  const Scenario s = scenario(2);
  const RoundOutcome r = optimize_round(s, 1e-6);
  EXPECT_EQ(r.scheduled_count(), 12);
  EXPECT_EQ(r.f_learn, 0.0);
  EXPECT_TRUE(audit(r, s).empty());
}

TEST(OptimizeRound, RejectsLambdaOutsideOpenInterval) {
  const Scenario s = scenario(3, 3);
  EXPECT_THROW(optimize_round(s, 0.0), ConfigError);
  EXPECT_THROW(optimize_round(s, 1.5), ConfigError);
}

TEST(OptimizeRound, EveryPipelinePassesAudit) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario s = scenario(seed);
    for (double lambda : {0.3, 0.5, 0.9995, 0.99975}) {
      for (auto p : {Pipeline::kFedPass, Pipeline::kPassUniform, Pipeline::kConventional,
                     Pipeline::kPerfect}) {
        for (auto mode : {PlacementMode::kPerUser, PlacementMode::kShared}) {
          OptimizerSettings o;
          o.mode = mode;
          const RoundOutcome r = run_pipeline(s, lambda, p, o);
          const auto issues = audit(r, s);
          EXPECT_TRUE(issues.empty()) << to_string(p) << " seed " << seed << ": " << issues.front();
          EXPECT_TRUE(std::isfinite(r.objective));
          EXPECT_EQ(r.monotonicity_violations, 0);
        }
      }
    }
  }
}

TEST(OptimizeRound, FinalObjectiveNoWorseThanInitialPoint) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scenario s = scenario(seed, 3);
    const RoundOutcome r = optimize_round(s, 0.5);
    ASSERT_FALSE(r.trace.empty());
    EXPECT_LE(r.objective, r.trace.front().feasible);
  }
}

TEST(OptimizeRound, ToyInstanceCloseToBestOfRandomRestarts) {
  const Scenario s = scenario(5, 3);
  const RoundOutcome base = optimize_round(s, 0.5);
  Rng rng(55);
  double best = INFINITY;
  for (int restart = 0; restart < 50; ++restart) {
    std::vector<double> x(static_cast<std::size_t>(s.num_pas));
    for (int n = 0; n < s.num_pas; ++n) x[n] = (n + rng.uniform(0.05, 0.95)) * s.area_x_m / s.num_pas;
    OptimizerSettings o;
    o.initial_positions = x;
    best = std::min(best, optimize_round(s, 0.5, o).objective);
  }
  EXPECT_LE(std::abs(base.objective - best), 0.05 * std::abs(best));
}

TEST(OptimizeRound, Deterministic) {
  const Scenario s = scenario(6);
  for (auto mode : {PlacementMode::kPerUser, PlacementMode::kShared}) {
    OptimizerSettings o;
    o.mode = mode;
    const RoundOutcome a = optimize_round(s, 0.5, o), b = optimize_round(s, 0.5, o);
    EXPECT_EQ(a.tau_t, b.tau_t);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.shared_positions, b.shared_positions);
    EXPECT_EQ(a.per_user_positions, b.per_user_positions);
    EXPECT_EQ(a.allocation.e_cm, b.allocation.e_cm);
  }
}

TEST(OptimizeRound, PerUserPlacementRaisesEveryScheduledGain) {
  const Scenario s = scenario(7);
  const RoundOutcome fed = optimize_round(s, 0.5);
  const RoundOutcome uni = baseline_round(s, 0.5, Pipeline::kPassUniform);
  for (int k = 0; k < s.num_devices(); ++k)
    if (fed.mask[k]) EXPECT_GE(fed.gains[k], uni.gains[k]);
}

TEST(Baselines, PerfectHasIdealLinks) {
  const Scenario s = scenario(8);
  const RoundOutcome r = baseline_round(s, 0.5, Pipeline::kPerfect);
  EXPECT_EQ(r.f_learn, 0.0);
  EXPECT_EQ(r.scheduled_count(), 12);
  EXPECT_EQ(r.tau_t, r.tau_cp);
  EXPECT_TRUE(r.ideal_links);
}

TEST(Baselines, FedPassNoSlowerThanUniformOrConventional) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario s = scenario(seed);
    const double fed = optimize_round(s, 0.5).tau_t;
    EXPECT_LE(fed, baseline_round(s, 0.5, Pipeline::kPassUniform).tau_t);
    EXPECT_LE(fed, baseline_round(s, 0.5, Pipeline::kConventional).tau_t);
  }
}

TEST(Pareto, RetainedFrontIsStrictlyMonotone) {
  const Scenario s = scenario(9);
  const auto grid = default_lambda_grid();
  ASSERT_EQ(grid.size(), 21u);
  const auto points = pareto_sweep(s, grid);
  ASSERT_EQ(points.size(), 21u);
  const auto front = retained_front(points);
  ASSERT_FALSE(front.empty());
  for (std::size_t i = 1; i < front.size(); ++i) {
    EXPECT_GT(front[i].tau_t, front[i - 1].tau_t);
    EXPECT_LT(front[i].f_learn, front[i - 1].f_learn);
  }
}

TEST(Pareto, SingleLambdaGivesSinglePoint) {
  const Scenario s = scenario(10, 4);
  const std::vector<double> grid = {0.5};
  const auto points = pareto_sweep(s, grid);
  ASSERT_EQ(points.size(), 1u);
  EXPECT_FALSE(points[0].dominated);
}

TEST(Pareto, ThreadCountDoesNotChangeResults) {
  const Scenario s = scenario(11);
  const auto grid = default_lambda_grid();
  setenv("PASSFL_THREADS", "1", 1);
  const auto serial = pareto_sweep(s, grid);
  setenv("PASSFL_THREADS", "4", 1);
  const auto parallel = pareto_sweep(s, grid);
  unsetenv("PASSFL_THREADS");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(serial[i].tau_t, parallel[i].tau_t);
    EXPECT_EQ(serial[i].f_learn, parallel[i].f_learn);
  }
}

TEST(Pareto, DominanceMarking) {
  std::vector<ParetoPoint> p = {{0.1, 1.0, 0.0, false},
                                {0.2, 0.5, 10.0, false},
                                {0.3, 0.5, 10.0, false},  // duplicate of the previous point
                                {0.4, 0.7, 12.0, false},  // beaten by (0.5, 10)
                                {0.5, 0.0, 50.0, false}};
  mark_dominated(p);
  EXPECT_FALSE(p[0].dominated);
  EXPECT_FALSE(p[1].dominated);
  EXPECT_TRUE(p[2].dominated);
  EXPECT_TRUE(p[3].dominated);
  EXPECT_FALSE(p[4].dominated);
  const auto front = retained_front(p);
  ASSERT_EQ(front.size(), 3u);
  EXPECT_EQ(front[0].tau_t, 0.0);
  EXPECT_EQ(front[2].tau_t, 1.0);

  const std::vector<ParetoPoint> better = {{0.1, 0.4, 10.0, false}, {0.2, 0.9, 0.0, false}};
  EXPECT_TRUE(weakly_dominates(better, std::vector<ParetoPoint>{p[0], p[1]}));
  EXPECT_FALSE(weakly_dominates(std::vector<ParetoPoint>{p[0], p[1]}, better));
}

TEST(Names, RoundTrip) {
  for (auto p : {Pipeline::kFedPass, Pipeline::kConventional, Pipeline::kPassUniform,
                 Pipeline::kPerfect})
    EXPECT_EQ(parse_pipeline(to_string(p)), p);
  EXPECT_EQ(parse_placement_mode("shared"), PlacementMode::kShared);
  EXPECT_EQ(parse_placement_mode("per-user"), PlacementMode::kPerUser);
  EXPECT_THROW(parse_pipeline("magic"), ConfigError);
  EXPECT_THROW(parse_placement_mode("both"), ConfigError);
}

TEST(Audit, DetectsTamperedOutcome) {
  const Scenario s = scenario(12, 4);
  RoundOutcome r = optimize_round(s, 0.5);
  ASSERT_TRUE(audit(r, s).empty());
  auto slow = r;
  slow.allocation.tau_cm[0] *= 0.5;  // same energy, half the time: power and rate break
  EXPECT_FALSE(audit(slow, s).empty());
  auto greedy = r;
  greedy.allocation.tau_cp *= 0.5;
  EXPECT_FALSE(audit(greedy, s).empty());
  auto liar = r;
  liar.f_learn += 1.0;
  EXPECT_FALSE(audit(liar, s).empty());
}
