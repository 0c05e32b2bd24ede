#pragma once

#include <span>
#include <vector>

#include "passfl/scenario.hpp"

namespace passfl {

/// Scalarization weight lambda in (0, 1) and convex per-device weights.
struct TradeoffConfig {
  double lambda = 0.5;
  std::vector<double> theta;
};

/// Throws ConfigError unless lambda is in (0, 1), theta >= 0 and theta sums
/// to one (an all-zero theta is accepted for an empty schedule).
void validate(const TradeoffConfig& cfg, int num_devices);

/// Uniform theta over devices with mask > 0, zero elsewhere.
std::vector<double> uniform_theta(std::span<const double> mask);

struct TimeAllocation {
  std::vector<double> tau_cm;
  double tau_cp = 0.0;
};

/// Shortest upload time for `mask` x D_b bits when E_cm joules are spread
/// over the slot: the root of D_b s = tau B log2(1 + E eta G / (tau sigma^2 N)).
/// Bisection on [1e-9, 1e3] s to 1e-12 s; returns the upper end of the final
/// bracket so the rate constraint holds. Throws RateInfeasibleError when no
/// root exists in the bracket.
double upload_time(double mask, double e_cm, double gain, const Scenario& s);

/// Smallest computation window satisfying the energy and frequency caps of
/// device k. Throws EnergyInfeasibleError when e_cm >= E_max.
double min_compute_time(const DeviceProfile& dev, double mask, double e_cm, const Scenario& s);

/// Delay sub-problem: per-device upload roots and the straggler-bound
/// computation window.
TimeAllocation solve_times(const Scenario& s, std::span<const double> mask,
                           std::span<const double> e_cm, std::span<const double> gains);

/// lambda [tau_cp + sum_k s_k (tau_k + |D_k|)] - D(s).
double scalarized_objective(const Scenario& s, std::span<const double> mask,
                            const TimeAllocation& times, double lambda);

struct ScheduleDecision {
  std::vector<double> coefficients;  // c_k = lambda (tau_k + |D_k|) - |D_k|
  std::vector<double> upper_bounds;  // constraint-induced box for s_k
  std::vector<double> relaxed;
  std::vector<double> rounded;
};

/// Scheduling sub-problem: the separable LP over [0, 1]^K solved per
/// device in closed form, then thresholded at 0.5.
ScheduleDecision solve_schedule(const Scenario& s, const TimeAllocation& times,
                                std::span<const double> e_cm, double lambda,
                                std::span<const double> gains);

struct EnergyDecision {
  std::vector<double> e_cm;
  std::vector<bool> infeasible;  // upper corner below zero; drop the device
};

/// Power sub-problem. Each rate grows with its own energy only, so the
/// weighted sum-rate optimum sits at the per-device upper corner
/// min(P tau_k, E_max - xi s_k (C_k |D_k|)^3 / tau_cp^2).
EnergyDecision solve_energies(const Scenario& s, std::span<const double> mask,
                              const TimeAllocation& times, std::span<const double> theta,
                              std::span<const double> gains);

}  // namespace passfl
