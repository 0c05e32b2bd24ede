#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "passfl/channel.hpp"
#include "passfl/errors.hpp"
#include "passfl/random.hpp"
#include "passfl/solvers.hpp"

using namespace passfl;

namespace {

double bits(double tau, double e, double g, const Scenario& s) {
  const double snr = e / tau * s.radio.eta_m2() * g / (s.num_pas * s.radio.noise_power_w());
  return tau * s.radio.bandwidth_hz() * std::log2(1.0 + snr);
}

struct Instance {
  Scenario s;
  std::vector<double> gains;
};

Instance instance(std::uint64_t seed, int K) {
  Instance in{generate_scenario(seed, K, ScenarioTemplate{}), {}};
  Rng rng(seed + 1000);
  for (const auto& d : in.s.devices) {
    std::vector<double> x;
    for (int n = 0; n < in.s.num_pas; ++n) x.push_back(3.0 + 7.0 * n + rng.uniform(0.0, 2.0));
    in.gains.push_back(gain(d, x, in.s));
  }
  return in;
}

}  // namespace

TEST(Tradeoff, Validation) {
  EXPECT_NO_THROW(validate(TradeoffConfig{0.5, {0.5, 0.5}}, 2));
  EXPECT_THROW(validate(TradeoffConfig{1.5, {0.5, 0.5}}, 2), ConfigError);
  EXPECT_THROW(validate(TradeoffConfig{0.0, {0.5, 0.5}}, 2), ConfigError);
  EXPECT_THROW(validate(TradeoffConfig{0.5, {0.7, 0.5}}, 2), ConfigError);
  EXPECT_THROW(validate(TradeoffConfig{0.5, {1.0}}, 2), ConfigError);
  EXPECT_EQ(uniform_theta(std::vector<double>{1, 0, 1, 1}),
            (std::vector<double>{1.0 / 3, 0, 1.0 / 3, 1.0 / 3}));
}

TEST(UploadTime, RootIsTightAndFeasible) {
  const Instance in = instance(1, 6);
  for (int k = 0; k < 6; ++k) {
    for (double e : {1e-4, 1e-3, 1e-2}) {
      const double tau = upload_time(1.0, e, in.gains[k], in.s);
      const double delivered = bits(tau, e, in.gains[k], in.s);
      EXPECT_GE(delivered, in.s.upload_bits);
      EXPECT_LE(delivered - in.s.upload_bits, 1e-9 * in.s.upload_bits);
      EXPECT_LT(bits(tau * (1 - 1e-9), e, in.gains[k], in.s), in.s.upload_bits);
    }
  }
}

TEST(UploadTime, MoreEnergyShortensSlot) {
  const Instance in = instance(2, 1);
  double prev = INFINITY;
  for (double e : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
    const double tau = upload_time(1.0, e, in.gains[0], in.s);
    EXPECT_LT(tau, prev);
    prev = tau;
  }
}

TEST(UploadTime, InfeasibleCases) {
  const Instance in = instance(3, 1);
  EXPECT_EQ(upload_time(0.0, 1e-3, in.gains[0], in.s), 0.0);
  EXPECT_THROW(upload_time(1.0, 0.0, in.gains[0], in.s), RateInfeasibleError);
  EXPECT_THROW(upload_time(1.0, 1e-3, 0.0, in.s), RateInfeasibleError);
  EXPECT_THROW(upload_time(1.0, 1e-30, in.gains[0], in.s), RateInfeasibleError);
}

TEST(ComputeTime, EnergyAndFrequencyCaps) {
  const Instance in = instance(4, 1);
  const auto& d = in.s.devices[0];
  const double w = d.workload_cycles();
  const double e = 0.01;
  const double expected = std::max(std::sqrt(1e-28 * w * w * w / (d.e_max_j - e)), w / d.f_max_hz);
  EXPECT_NEAR(min_compute_time(d, 1.0, e, in.s), expected, 1e-15);
  EXPECT_THROW(min_compute_time(d, 1.0, d.e_max_j, in.s), EnergyInfeasibleError);
  EXPECT_EQ(min_compute_time(d, 0.0, 0.5, in.s), 0.0);
}

TEST(Schedule, ClosedFormMatchesVertexEnumeration) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int K = 1 + static_cast<int>(rng.below(8));
    const Instance in = instance(100 + trial, K);
    const double lambda = rng.uniform(0.5, 0.99999);
    std::vector<double> e(K);
    TimeAllocation t;
    t.tau_cm.resize(K);
    t.tau_cp = rng.uniform(0.1, 0.4);
    for (int k = 0; k < K; ++k) {
      e[k] = rng.uniform(1e-4, 0.03);
      t.tau_cm[k] = rng.uniform(1e-3, 0.5);
    }
    const ScheduleDecision d = solve_schedule(in.s, t, e, lambda, in.gains);
    double best = INFINITY;
    for (unsigned v = 0; v < (1u << K); ++v) {
      std::vector<double> m(K, 0.0);
      for (int k = 0; k < K; ++k)
        if (v >> k & 1u) m[k] = d.upper_bounds[k];
      best = std::min(best, scalarized_objective(in.s, m, t, lambda));
    }
    EXPECT_NEAR(scalarized_objective(in.s, d.relaxed, t, lambda), best, 1e-9);
    for (int k = 0; k < K; ++k) {
      EXPECT_GE(d.relaxed[k], 0.0);
      EXPECT_LE(d.relaxed[k], 1.0);
      EXPECT_EQ(d.rounded[k], d.relaxed[k] >= 0.5 ? 1.0 : 0.0);
    }
  }
}

TEST(Schedule, LambdaLimits) {
  const Instance in = instance(5, 5);
  const std::vector<double> ones(5, 1.0);
  std::vector<double> e(5, 2e-3);
  const TimeAllocation t = solve_times(in.s, ones, e, in.gains);
  const auto near_one = solve_schedule(in.s, t, e, 1.0 - 1e-9, in.gains);
  for (double v : near_one.rounded) EXPECT_EQ(v, 0.0);
  const auto near_zero = solve_schedule(in.s, t, e, 1e-6, in.gains);
  for (double v : near_zero.rounded) EXPECT_EQ(v, 1.0);
  EXPECT_THROW(solve_schedule(in.s, t, e, 1.0, in.gains), ConfigError);
}

TEST(Energies, UpperCornerOfTheBox) {
  const Instance in = instance(6, 4);
  const std::vector<double> mask = {1, 1, 0, 1};
  TimeAllocation t{{0.02, 0.05, 0.0, 0.01}, 0.3};
  const auto theta = uniform_theta(mask);
  const EnergyDecision d = solve_energies(in.s, mask, t, theta, in.gains);
  for (int k = 0; k < 4; ++k) {
    const auto& dev = in.s.devices[k];
    if (mask[k] == 0.0) {
      EXPECT_EQ(d.e_cm[k], 0.0);
      continue;
    }
    const double w = dev.workload_cycles();
    const double ub = std::min(dev.p_max_w * t.tau_cm[k], dev.e_max_j - 1e-28 * w * w * w / 0.09);
    EXPECT_DOUBLE_EQ(d.e_cm[k], ub);
    EXPECT_FALSE(d.infeasible[k]);
  }
}

TEST(Energies, NegativeCornerFlagged) {
  const Instance in = instance(7, 1);
  const std::vector<double> mask = {1};
  TimeAllocation t{{0.02}, 0.01};  // far too short to compute in budget
  const EnergyDecision d = solve_energies(in.s, mask, t, uniform_theta(mask), in.gains);
  EXPECT_TRUE(d.infeasible[0]);
  EXPECT_EQ(d.e_cm[0], 0.0);
}
