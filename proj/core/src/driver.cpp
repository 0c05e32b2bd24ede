#include "passfl/driver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "passfl/bound.hpp"
#include "passfl/errors.hpp"
#include "passfl/parallel.hpp"
#include "passfl/solvers.hpp"

namespace passfl {

namespace {

const std::vector<double> kNoPositions;

struct Channels {
  ArrayKind kind = ArrayKind::kPinching;
  std::vector<double> shared;
  std::map<int, std::vector<double>> per_user;

  const std::vector<double>& serving(int k) const {
    const auto it = per_user.find(k);
    return it == per_user.end() ? shared : it->second;
  }

  std::vector<double> gains(const Scenario& s) const {
    std::vector<double> g(s.devices.size());
    for (std::size_t k = 0; k < g.size(); ++k)
      g[k] = gain(s.devices[k], serving(static_cast<int>(k)), s, kind);
    return g;
  }
};

// Devices whose upload or computation cannot fit their budget are removed
// from the schedule together with their energy.
void prune(const Scenario& s, std::vector<double>& mask, std::vector<double>& e_cm,
           const std::vector<double>& gains) {
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] <= 0.0) continue;
    try {
      upload_time(mask[k], e_cm[k], gains[k], s);
      min_compute_time(s.devices[k], mask[k], e_cm[k], s);
    } catch (const InfeasibleError&) {
      mask[k] = 0.0;
      e_cm[k] = 0.0;
    }
  }
}

bool times_feasible(const Scenario& s, std::span<const double> mask, const TimeAllocation& t,
                    std::span<const double> e_cm, std::span<const double> gains) {
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] <= 0.0) continue;
    const double tau = t.tau_cm[k];
    if (!(tau > 0.0) || !(e_cm[k] > 0.0)) return false;
    if (tau * rate(gains[k], e_cm[k] / tau, s) < mask[k] * s.upload_bits * (1.0 - 1e-9))
      return false;
    try {
      if (t.tau_cp < min_compute_time(s.devices[k], mask[k], e_cm[k], s) * (1.0 - 1e-9))
        return false;
    } catch (const InfeasibleError&) {
      return false;
    }
  }
  return true;
}

bool not_worse(double after, double before) {
  return after <= before + 1e-9 * std::max(1.0, std::abs(before));
}

// Repairs (mask, energy) into a point that meets every constraint with the
// power cap: the slot is stretched to E / P_max when the root is shorter.
RoundOutcome snapshot(const Scenario& s, double lambda, std::vector<double> mask,
                      std::vector<double> e_cm, const Channels& ch) {
  const std::size_t K = s.devices.size();
  RoundOutcome out;
  out.lambda = lambda;
  out.array = ch.kind;
  out.gains = ch.gains(s);

  ScheduleAllocation& a = out.allocation;
  a.tau_cm.assign(K, 0.0);
  a.e_cm.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    if (mask[k] <= 0.0) {
      mask[k] = 0.0;
      continue;
    }
    const auto& dev = s.devices[k];
    try {
      const double root = upload_time(1.0, e_cm[k], out.gains[k], s);
      const double cp = min_compute_time(dev, 1.0, e_cm[k], s);
      a.tau_cm[k] = std::max(root, e_cm[k] / dev.p_max_w);
      a.e_cm[k] = e_cm[k];
      a.tau_cp = std::max(a.tau_cp, cp);
      mask[k] = 1.0;
    } catch (const InfeasibleError&) {
      mask[k] = 0.0;
      a.tau_cm[k] = 0.0;
    }
  }
  a.mask = mask;

  out.mask.assign(K, 0);
  out.powers.assign(K, 0.0);
  out.frequencies.assign(K, 0.0);
  out.rates.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    if (mask[k] <= 0.0) continue;
    out.mask[k] = 1;
    out.powers[k] = a.power(static_cast<int>(k));
    out.frequencies[k] = a.frequency(static_cast<int>(k), s);
    out.rates[k] = rate(out.gains[k], out.powers[k], s);
  }

  const RoundLatency lat = round_latency(a, s);
  out.tau_t = lat.tau_t;
  out.tau_cm_total = lat.tau_cm_total;
  out.tau_cp = lat.tau_cp;
  out.f_learn = f_learn(mask, s.devices);
  out.objective = scalarized_objective(s, mask, TimeAllocation{a.tau_cm, a.tau_cp}, lambda);

  out.shared_positions = ch.shared;
  for (const auto& [k, pos] : ch.per_user)
    if (mask[static_cast<std::size_t>(k)] > 0.0) out.per_user_positions.emplace(k, pos);
  return out;
}

std::vector<double> initial_energies(const Scenario& s, std::span<const double> gains) {
  std::vector<double> e(s.devices.size(), 0.0);
  for (std::size_t k = 0; k < e.size(); ++k) {
    const auto& dev = s.devices[k];
    const double r = rate(gains[k], dev.p_max_w, s);
    const double full_power = r > 0.0 ? dev.p_max_w * s.upload_bits / r : 0.0;
    e[k] = std::min(full_power, 0.5 * dev.e_max_j);
  }
  return e;
}

std::vector<double> snapped(std::span<const double> x, const PlacementGrid& grid) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = grid.at(grid.nearest(x[i]));
  return out;
}

RoundOutcome outer_loop(const Scenario& s, double lambda, Pipeline pipeline,
                        const OptimizerSettings& opt) {
  const std::size_t K = s.devices.size();
  const bool movable = pipeline == Pipeline::kFedPass;

  std::optional<PlacementOptimizer> placer;
  Channels ch;
  if (pipeline == Pipeline::kConventional) {
    ch.kind = ArrayKind::kConventional;
    ch.shared = conventional_positions(s);
  } else {
    placer.emplace(s, opt.grid_points);
    if (opt.initial_positions) {
      if (static_cast<int>(opt.initial_positions->size()) != s.num_pas)
        throw ConfigError("initial positions: expected one coordinate per antenna");
      ch.shared = Placement(snapped(*opt.initial_positions, placer->grid()), s).positions();
    } else {
      ch.shared = placer->uniform().positions();
    }
  }

  std::vector<double> gains = ch.gains(s);
  std::vector<double> mask(K, 1.0);
  std::vector<double> e_cm = initial_energies(s, gains);
  prune(s, mask, e_cm, gains);

  RoundOutcome best = snapshot(s, lambda, mask, e_cm, ch);
  std::vector<IterationRecord> trace;
  trace.push_back({0, best.objective, best.objective, best.objective, best.scheduled_count()});
  int best_iteration = 0;
  int violations = 0;
  double previous = best.objective;

  std::optional<TimeAllocation> prev_times;
  for (int it = 1; it <= opt.max_outer; ++it) {
    IterationRecord rec;
    rec.iteration = it;

    prune(s, mask, e_cm, gains);
    TimeAllocation times = solve_times(s, mask, e_cm, gains);
    rec.after_times = scalarized_objective(s, mask, times, lambda);
    if (prev_times && times_feasible(s, mask, *prev_times, e_cm, gains)) {
      rec.times_checked = true;
      rec.times_monotone =
          not_worse(rec.after_times, scalarized_objective(s, mask, *prev_times, lambda));
    }

    const ScheduleDecision sched = solve_schedule(s, times, e_cm, lambda, gains);
    rec.after_schedule = scalarized_objective(s, sched.relaxed, times, lambda);
    rec.schedule_monotone = not_worse(rec.after_schedule, rec.after_times);

    mask = sched.rounded;
    for (std::size_t k = 0; k < K; ++k)
      if (mask[k] <= 0.0) e_cm[k] = 0.0;
    prune(s, mask, e_cm, gains);
    times = solve_times(s, mask, e_cm, gains);

    const std::vector<double> theta = uniform_theta(mask);
    const EnergyDecision en = solve_energies(s, mask, times, theta, gains);
    e_cm = en.e_cm;
    for (std::size_t k = 0; k < K; ++k)
      if (en.infeasible[k]) mask[k] = 0.0;

    if (movable) {
      if (opt.mode == PlacementMode::kPerUser) {
        for (std::size_t k = 0; k < K; ++k) {
          if (mask[k] <= 0.0) continue;
          const int key = static_cast<int>(k);
          const auto& start = ch.serving(key);
          ch.per_user[key] =
              placer->place_for_user(key, Placement(start, s), opt.max_sweeps).positions();
        }
      } else {
        std::vector<double> w(K, 0.0);
        bool any = false;
        for (std::size_t k = 0; k < K; ++k) {
          if (mask[k] <= 0.0 || !(times.tau_cm[k] > 0.0)) continue;
          w[k] = theta[k] * snr_per_gain(e_cm[k] / times.tau_cm[k], s);
          any = any || w[k] > 0.0;
        }
        if (any)
          ch.shared = placer->gauss_seidel(Placement(ch.shared, s), w, opt.max_sweeps)
                          .placement.positions();
      }
      gains = ch.gains(s);
    }

    RoundOutcome snap = snapshot(s, lambda, mask, e_cm, ch);
    rec.feasible = snap.objective;
    rec.scheduled = snap.scheduled_count();
    if (rec.times_checked && !rec.times_monotone) ++violations;
    if (!rec.schedule_monotone) ++violations;
    trace.push_back(rec);
    if (snap.objective < best.objective) {
      best = std::move(snap);
      best_iteration = it;
    }
    prev_times = times;

    const double change = std::abs(rec.feasible - previous);
    previous = rec.feasible;
    if (it >= 2 && change <= opt.outer_tol * std::max(std::abs(rec.feasible), 1e-12)) break;
  }

  best.pipeline = pipeline;
  best.mode = opt.mode;
  best.trace = std::move(trace);
  best.best_iteration = best_iteration;
  best.monotonicity_violations = violations;
  return best;
}

RoundOutcome perfect_round(const Scenario& s, double lambda) {
  const std::size_t K = s.devices.size();
  RoundOutcome out;
  out.pipeline = Pipeline::kPerfect;
  out.lambda = lambda;
  out.ideal_links = true;
  out.mask.assign(K, 1);
  auto& a = out.allocation;
  a.mask.assign(K, 1.0);
  a.tau_cm.assign(K, 0.0);
  a.e_cm.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    a.tau_cp = std::max(a.tau_cp, min_compute_time(s.devices[k], 1.0, 0.0, s));
  out.gains.assign(K, 0.0);
  out.powers.assign(K, 0.0);
  out.rates.assign(K, 0.0);
  out.frequencies.resize(K);
  for (std::size_t k = 0; k < K; ++k)
    out.frequencies[k] = a.frequency(static_cast<int>(k), s);
  out.tau_cp = a.tau_cp;
  out.tau_t = a.tau_cp;
  out.f_learn = 0.0;
  out.objective = scalarized_objective(s, a.mask, TimeAllocation{a.tau_cm, a.tau_cp}, lambda);
  return out;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda out of (0,1)");
}

}  // namespace

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::kFedPass: return "fedpass";
    case Pipeline::kConventional: return "conventional";
    case Pipeline::kPassUniform: return "pass_uniform";
    case Pipeline::kPerfect: return "perfect";
  }
  return "unknown";
}

Pipeline parse_pipeline(std::string_view name) {
  if (name == "fedpass") return Pipeline::kFedPass;
  if (name == "conventional") return Pipeline::kConventional;
  if (name == "pass_uniform") return Pipeline::kPassUniform;
  if (name == "perfect") return Pipeline::kPerfect;
  throw ConfigError("unknown pipeline '" + std::string(name) + "'");
}

std::string_view to_string(PlacementMode m) {
  return m == PlacementMode::kPerUser ? "per-user" : "shared";
}

PlacementMode parse_placement_mode(std::string_view name) {
  if (name == "per-user") return PlacementMode::kPerUser;
  if (name == "shared") return PlacementMode::kShared;
  throw ConfigError("unknown placement mode '" + std::string(name) + "'");
}

void validate(const OptimizerSettings& o) {
  if (o.grid_points < 2) throw ConfigError("grid_points must be >= 2");
  if (o.max_outer < 1) throw ConfigError("max_outer must be >= 1");
  if (!(o.outer_tol >= 0.0)) throw ConfigError("outer_tol must be >= 0");
  if (o.max_sweeps < 1) throw ConfigError("max_sweeps must be >= 1");
}

int RoundOutcome::scheduled_count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), 1));
}

const std::vector<double>& RoundOutcome::positions_for(int k) const {
  if (ideal_links) return kNoPositions;
  const auto it = per_user_positions.find(k);
  return it == per_user_positions.end() ? shared_positions : it->second;
}

RoundOutcome optimize_round(const Scenario& s, double lambda, const OptimizerSettings& opt) {
  return run_pipeline(s, lambda, Pipeline::kFedPass, opt);
}

RoundOutcome baseline_round(const Scenario& s, double lambda, Pipeline kind,
                            const OptimizerSettings& opt) {
  return run_pipeline(s, lambda, kind, opt);
}

RoundOutcome run_pipeline(const Scenario& s, double lambda, Pipeline kind,
                          const OptimizerSettings& opt) {
  validate(s);
  validate(opt);
  check_lambda(lambda);
  if (kind == Pipeline::kPerfect) return perfect_round(s, lambda);
  return outer_loop(s, lambda, kind, opt);
}

std::vector<std::string> audit(const RoundOutcome& out, const Scenario& s) {
  constexpr double tol = 1e-9;
  std::vector<std::string> issues;
  const auto K = s.devices.size();
  const auto& a = out.allocation;
  if (out.mask.size() != K || a.mask.size() != K || a.tau_cm.size() != K || a.e_cm.size() != K) {
    issues.emplace_back("decision vectors do not match the device count");
    return issues;
  }

  auto check_array = [&](const std::vector<double>& x, const std::string& what) {
    if (static_cast<int>(x.size()) != s.num_pas) issues.push_back(what + ": wrong antenna count");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < -tol || x[i] > s.area_x_m + tol) issues.push_back(what + ": antenna outside waveguide");
      for (std::size_t j = 0; j < i; ++j)
        if (std::abs(x[i] - x[j]) < s.min_spacing_m - tol)
          issues.push_back(what + ": spacing violated");
    }
  };
  if (!out.ideal_links && out.array == ArrayKind::kPinching) {
    check_array(out.shared_positions, "shared array");
    for (const auto& [k, x] : out.per_user_positions)
      check_array(x, "slot " + std::to_string(k));
  }

  double tau_sum = 0.0, tau_cp = 0.0, left_out = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& dev = s.devices[k];
    const std::string who = "device " + std::to_string(k);
    const int m = out.mask[k];
    if (m != 0 && m != 1) issues.push_back(who + ": mask not binary");
    if (a.mask[k] != static_cast<double>(m)) issues.push_back(who + ": allocation mask disagrees");
    const double tau = a.tau_cm[k], e = a.e_cm[k];
    if (m == 0) {
      left_out += static_cast<double>(dev.data_size_samples);
      if (tau != 0.0 || e != 0.0) issues.push_back(who + ": unscheduled device holds resources");
      continue;
    }
    if (tau < 0.0 || e < 0.0) issues.push_back(who + ": negative time or energy");
    tau_sum += tau;

    const double w = dev.cycles_per_sample * static_cast<double>(dev.data_size_samples);
    if (!(a.tau_cp > 0.0)) {
      issues.push_back(who + ": zero computation window");
      continue;
    }
    const double freq = w / a.tau_cp;
    tau_cp = std::max(tau_cp, w / freq);
    if (freq > dev.f_max_hz * (1.0 + tol)) issues.push_back(who + ": CPU frequency above cap");
    const double e_cp = s.kappa_eff * w * freq * freq;
    if (e_cp + e > dev.e_max_j * (1.0 + tol)) issues.push_back(who + ": energy budget exceeded");

    if (out.ideal_links) continue;
    if (!(tau > 0.0)) {
      issues.push_back(who + ": zero upload slot");
      continue;
    }
    const double p = e / tau;
    if (p > dev.p_max_w * (1.0 + tol)) issues.push_back(who + ": power above cap");
    std::complex<double> h{0.0, 0.0};
    for (double x : out.positions_for(static_cast<int>(k))) {
      const double dx = dev.x_m - x;
      const double dist = std::sqrt(dx * dx + dev.y_m * dev.y_m + s.pa_height_m * s.pa_height_m);
      double phase = 2.0 * std::numbers::pi * dist / s.radio.wavelength_m();
      if (out.array == ArrayKind::kPinching)
        phase += 2.0 * std::numbers::pi * x / s.radio.guided_wavelength_m();
      h += std::polar(1.0 / dist, -phase);
    }
    const double snr = p * s.radio.eta_m2() * std::norm(h) / (s.num_pas * s.radio.noise_power_w());
    const double bits = tau * s.radio.bandwidth_hz() * std::log2(1.0 + snr);
    if (bits < s.upload_bits * (1.0 - tol)) issues.push_back(who + ": payload not delivered");
  }

  if (std::abs(out.tau_t - (tau_sum + tau_cp)) > tol * std::max(1.0, out.tau_t))
    issues.emplace_back("reported round latency disagrees with the allocation");
  if (std::abs(out.f_learn - left_out) > tol * std::max(1.0, left_out))
    issues.emplace_back("reported learning penalty disagrees with the mask");
  return issues;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(21);
  for (int i = 0; i < 21; ++i) grid[static_cast<std::size_t>(i)] = 1.0 - 0.5 * std::pow(10.0, -0.3 * i);
  return grid;
}

void mark_dominated(std::vector<ParetoPoint>& points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].dominated = false;
    for (std::size_t j = 0; j < points.size() && !points[i].dominated; ++j) {
      if (i == j) continue;
      const auto& p = points[i];
      const auto& q = points[j];
      const bool weak = q.tau_t <= p.tau_t && q.f_learn <= p.f_learn;
      const bool strict = q.tau_t < p.tau_t || q.f_learn < p.f_learn;
      if (weak && (strict || j < i)) points[i].dominated = true;
    }
  }
}

std::vector<ParetoPoint> pareto_sweep(const Scenario& s, std::span<const double> lambda_grid,
                                      const OptimizerSettings& opt, Pipeline pipeline) {
  for (double l : lambda_grid) check_lambda(l);
  std::vector<ParetoPoint> points(lambda_grid.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const RoundOutcome r = run_pipeline(s, lambda_grid[i], pipeline, opt);
    points[i] = {lambda_grid[i], r.tau_t, r.f_learn, false};
  });
  mark_dominated(points);
  return points;
}

std::vector<ParetoPoint> retained_front(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> kept;
  for (const auto& p : points)
    if (!p.dominated) kept.push_back(p);
  std::sort(kept.begin(), kept.end(),
            [](const ParetoPoint& a, const ParetoPoint& b) { return a.tau_t < b.tau_t; });
  return kept;
}

bool weakly_dominates(std::span<const ParetoPoint> front, std::span<const ParetoPoint> other) {
  return std::all_of(other.begin(), other.end(), [&](const ParetoPoint& p) {
    return std::any_of(front.begin(), front.end(), [&](const ParetoPoint& q) {
      return q.tau_t <= p.tau_t * (1.0 + 1e-9) && q.f_learn <= p.f_learn + 1e-9;
    });
  });
}

}  // namespace passfl
