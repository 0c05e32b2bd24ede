#include "passfl/placement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "passfl/errors.hpp"

namespace passfl {

int PlacementGrid::nearest(double x) const {
  const double l = std::round(x / step());
  return static_cast<int>(std::clamp(l, 0.0, static_cast<double>(points - 1)));
}

std::vector<cplx> other_contributions(int n, std::span<const double> positions, const Scenario& s) {
  std::vector<cplx> c(s.devices.size(), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < s.devices.size(); ++k)
    for (std::size_t m = 0; m < positions.size(); ++m)
      if (static_cast<int>(m) != n) c[k] += contribution(s.devices[k], positions[m], s);
  return c;
}

double phi(double x, std::span<const cplx> others, std::span<const double> weights,
           const Scenario& s) {
  double cross = 0.0, self = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0) continue;
    const cplx p = contribution(s.devices[k], x, s);
    cross += (weights[k] * std::conj(others[k]) * p).real();
    self += weights[k] * std::norm(p);
  }
  return 2.0 * cross + self;
}

double surrogate(std::span<const double> positions, std::span<const double> weights,
                 const Scenario& s) {
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (weights[k] != 0.0) total += weights[k] * gain(s.devices[k], positions, s);
  return total;
}

PlacementOptimizer::PlacementOptimizer(const Scenario& s, int grid_points)
    : scenario_(&s), grid_{s.area_x_m, grid_points} {
  if (grid_points < 2) throw ConfigError("grid_points must be >= 2");
  const std::size_t L = static_cast<std::size_t>(grid_points);
  table_.resize(s.devices.size() * L);
  for (std::size_t k = 0; k < s.devices.size(); ++k)
    for (std::size_t l = 0; l < L; ++l)
      table_[k * L + l] = contribution(s.devices[k], grid_.at(static_cast<int>(l)), s);
}

Placement PlacementOptimizer::uniform() const {
  const auto& s = *scenario_;
  std::vector<double> x(static_cast<std::size_t>(s.num_pas));
  for (int n = 0; n < s.num_pas; ++n)
    x[static_cast<std::size_t>(n)] = grid_.at(grid_.nearest((n + 0.5) * s.area_x_m / s.num_pas));
  return Placement(std::move(x), s);
}

bool PlacementOptimizer::feasible(int l, int n, std::span<const int> idx) const {
  const double x = grid_.at(l);
  const double min_gap = scenario_->min_spacing_m * (1.0 - 1e-12);
  for (std::size_t m = 0; m < idx.size(); ++m) {
    if (static_cast<int>(m) == n) continue;
    if (std::abs(x - grid_.at(idx[m])) < min_gap) return false;
  }
  return true;
}

int PlacementOptimizer::update_index(int n, std::span<const int> idx,
                                     std::span<const double> weights) const {
  const std::size_t K = scenario_->devices.size();
  const std::size_t L = static_cast<std::size_t>(grid_.points);

  // zeta_k = w_k conj(C_{k,n}); only devices with positive weight matter
  std::vector<std::size_t> active;
  std::vector<cplx> zeta;
  for (std::size_t k = 0; k < K; ++k) {
    if (weights[k] == 0.0) continue;
    cplx c{0.0, 0.0};
    for (std::size_t m = 0; m < idx.size(); ++m)
      if (static_cast<int>(m) != n) c += table_[k * L + static_cast<std::size_t>(idx[m])];
    active.push_back(k);
    zeta.push_back(weights[k] * std::conj(c));
  }
  auto profit = [&](std::size_t l) {
    double v = 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const cplx p = table_[active[a] * L + l];
      v += 2.0 * (zeta[a] * p).real() + weights[active[a]] * std::norm(p);
    }
    return v;
  };

  int best = -1;
  double best_val = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    if (!feasible(static_cast<int>(l), n, idx)) continue;
    const double v = profit(l);
    if (best < 0 || v > best_val) {
      best = static_cast<int>(l);
      best_val = v;
    }
  }
  if (best < 0) throw SpacingError("no spacing-feasible grid point for antenna " + std::to_string(n));

  // keep the incumbent unless strictly beaten, so the surrogate never drops
  const int inc = idx[static_cast<std::size_t>(n)];
  if (inc >= 0 && feasible(inc, n, idx) && !(best_val > profit(static_cast<std::size_t>(inc))))
    return inc;
  return best;
}

double PlacementOptimizer::coordinate_update(int n, std::span<const double> positions,
                                             std::span<const double> weights) const {
  std::vector<int> idx(positions.size());
  for (std::size_t m = 0; m < positions.size(); ++m) idx[m] = grid_.nearest(positions[m]);
  // An off-grid incumbent is not a candidate itself.
  if (grid_.at(idx[static_cast<std::size_t>(n)]) != positions[static_cast<std::size_t>(n)])
    idx[static_cast<std::size_t>(n)] = -1;
  return grid_.at(update_index(n, idx, weights));
}

GaussSeidelResult PlacementOptimizer::gauss_seidel(const Placement& start,
                                                   std::span<const double> weights,
                                                   int max_sweeps, double tol) const {
  const auto& s = *scenario_;
  if (weights.size() != s.devices.size()) throw DomainError("weights length differs from device count");
  for (double w : weights)
    if (!(w >= 0.0)) throw DomainError("placement weights must be >= 0");

  std::vector<int> idx(start.size());
  for (std::size_t n = 0; n < start.size(); ++n) idx[n] = grid_.nearest(start[n]);
  std::vector<double> x(idx.size());
  auto sync = [&] {
    for (std::size_t n = 0; n < idx.size(); ++n) x[n] = grid_.at(idx[n]);
  };
  sync();
  for (std::size_t n = 0; n < idx.size(); ++n)
    if (!feasible(idx[n], static_cast<int>(n), idx))
      throw SpacingError("initial placement violates the spacing rule after grid snapping");

  GaussSeidelResult res;
  res.trace.push_back(surrogate(x, weights, s));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (std::size_t n = 0; n < idx.size(); ++n) {
      const int before = idx[n];
      idx[n] = update_index(static_cast<int>(n), idx, weights);
      if (idx[n] != before) {
        moved = std::max(moved, std::abs(grid_.at(idx[n]) - grid_.at(before)));
        sync();
        res.trace.push_back(surrogate(x, weights, s));
      } else {
        res.trace.push_back(res.trace.back());
      }
    }
    res.sweeps = sweep + 1;
    if (moved < tol) {
      res.converged = true;
      break;
    }
  }
  res.placement = Placement(x, s);
  return res;
}

Placement PlacementOptimizer::place_for_user(int k, const Placement& start, int max_sweeps) const {
  std::vector<double> w(scenario_->devices.size(), 0.0);
  w.at(static_cast<std::size_t>(k)) = 1.0;
  return gauss_seidel(start, w, max_sweeps).placement;
}

}  // namespace passfl
