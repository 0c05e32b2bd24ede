#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "passfl/channel.hpp"
#include "passfl/cost.hpp"
#include "passfl/placement.hpp"
#include "passfl/scenario.hpp"

namespace passfl {

enum class Pipeline {
  kFedPass,       // joint scheduling, resources and antenna placement
  kConventional,  // fixed centred array, same outer loop
  kPassUniform,   // equally spaced pinching antennas, frozen
  kPerfect,       // everyone participates over ideal links
};

std::string_view to_string(Pipeline p);
/// Accepts fedpass | conventional | pass_uniform | perfect.
Pipeline parse_pipeline(std::string_view name);

std::string_view to_string(PlacementMode m);
/// Accepts per-user | shared.
PlacementMode parse_placement_mode(std::string_view name);

struct OptimizerSettings {
  int grid_points = 2001;
  int max_outer = 30;
  double outer_tol = 1e-4;  // relative change of the objective
  int max_sweeps = 20;
  PlacementMode mode = PlacementMode::kPerUser;
  /// Start of the placement search; uniform spacing when empty.
  std::optional<std::vector<double>> initial_positions;
};

void validate(const OptimizerSettings& o);

/// Objective values seen by one outer iteration.
struct IterationRecord {
  int iteration = 0;
  double after_times = 0.0;      // relaxed objective after the delay step
  double after_schedule = 0.0;   // relaxed objective after the LP step
  double feasible = 0.0;         // objective of the repaired, feasible point
  int scheduled = 0;
  bool times_checked = false;    // previous times were feasible, so monotonicity applies
  bool times_monotone = true;
  bool schedule_monotone = true;
};

struct RoundOutcome {
  Pipeline pipeline = Pipeline::kFedPass;
  PlacementMode mode = PlacementMode::kPerUser;
  ArrayKind array = ArrayKind::kPinching;
  double lambda = 0.5;
  bool ideal_links = false;

  std::vector<int> mask;
  ScheduleAllocation allocation;
  /// Array serving every slot (shared mode and the fixed-array baselines).
  std::vector<double> shared_positions;
  /// Per-slot configurations in per-user mode, keyed by device.
  std::map<int, std::vector<double>> per_user_positions;

  std::vector<double> gains;
  std::vector<double> powers;
  std::vector<double> frequencies;
  std::vector<double> rates;

  double tau_t = 0.0;
  double tau_cm_total = 0.0;
  double tau_cp = 0.0;
  double f_learn = 0.0;
  double objective = 0.0;  // lambda [tau_cp + sum s_k (tau_k + |D_k|)] - D(s)

  std::vector<IterationRecord> trace;
  int best_iteration = 0;
  int monotonicity_violations = 0;

  int scheduled_count() const;
  /// Antenna coordinates serving device k's slot; empty for ideal links.
  const std::vector<double>& positions_for(int k) const;
};

/// Two-tier loop: delay, scheduling, weights, energies, then antenna
/// placement, repeated until the objective settles. Returns the best
/// feasible point visited.
RoundOutcome optimize_round(const Scenario& s, double lambda, const OptimizerSettings& opt = {});

/// Reference schemes sharing the outer loop (or, for kPerfect, ideal links).
RoundOutcome baseline_round(const Scenario& s, double lambda, Pipeline kind,
                            const OptimizerSettings& opt = {});

/// Dispatches to optimize_round or baseline_round.
RoundOutcome run_pipeline(const Scenario& s, double lambda, Pipeline kind,
                          const OptimizerSettings& opt = {});

/// Re-checks every round constraint from raw scenario data. Returns one
/// message per violation; empty when the outcome is feasible.
std::vector<std::string> audit(const RoundOutcome& out, const Scenario& s);

struct ParetoPoint {
  double lambda = 0.0;
  double tau_t = 0.0;
  double f_learn = 0.0;
  bool dominated = false;
};

/// 21 weights with 1 - lambda geometric from 0.5 down to 5e-7. Latency is
/// in seconds and the learning penalty in samples, so the trade-off lives
/// close to lambda = 1.
std::vector<double> default_lambda_grid();

/// One round per lambda; dominated points and exact duplicates (beyond the
/// first, in grid order) are flagged.
std::vector<ParetoPoint> pareto_sweep(const Scenario& s, std::span<const double> lambda_grid,
                                      const OptimizerSettings& opt = {},
                                      Pipeline pipeline = Pipeline::kFedPass);

/// Flags dominated points in place.
void mark_dominated(std::vector<ParetoPoint>& points);

/// Non-dominated points sorted by increasing latency.
std::vector<ParetoPoint> retained_front(std::span<const ParetoPoint> points);

/// True when every point of `other` is weakly dominated by some point of
/// `front`.
bool weakly_dominates(std::span<const ParetoPoint> front, std::span<const ParetoPoint> other);

}  // namespace passfl
