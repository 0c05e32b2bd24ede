#pragma once

#include <span>
#include <vector>

#include "passfl/channel.hpp"
#include "passfl/scenario.hpp"

namespace passfl {

enum class PlacementMode {
  kPerUser,  // one configuration per TDMA slot, tuned to the transmitting device
  kShared,   // one configuration serving all scheduled devices
};

/// Uniform grid of `points` candidate coordinates on [0, length].
struct PlacementGrid {
  double length = 0.0;
  int points = 2001;

  double at(int l) const { return static_cast<double>(l) * length / (points - 1); }
  double step() const { return length / (points - 1); }
  int nearest(double x) const;
};

/// C_{k,n} = sum_{m != n} Pi_k(x_m) for every device k.
std::vector<cplx> other_contributions(int n, std::span<const double> positions, const Scenario& s);

/// Coordinate profit 2 Re{sum_k w_k conj(C_{k,n}) Pi_k(x)} + sum_k w_k |Pi_k(x)|^2.
double phi(double x, std::span<const cplx> others, std::span<const double> weights,
           const Scenario& s);

/// Weighted-sum-of-gains surrogate sum_k w_k G_k(x).
double surrogate(std::span<const double> positions, std::span<const double> weights,
                 const Scenario& s);

struct GaussSeidelResult {
  Placement placement;
  std::vector<double> trace;  // surrogate at start, then after every coordinate update
  int sweeps = 0;
  bool converged = false;
};

/// Grid-restricted Gauss-Seidel for the weighted gain surrogate. Holds a
/// table of every device's contribution at every grid point, so one
/// coordinate update costs O(K L).
class PlacementOptimizer {
 public:
  PlacementOptimizer(const Scenario& s, int grid_points);

  const Scenario& scenario() const { return *scenario_; }
  const PlacementGrid& grid() const { return grid_; }

  /// Equally spaced antennas (x_n = (n + 1/2) D_x / N) snapped to the grid.
  Placement uniform() const;

  /// Argmax of phi over the spacing-feasible grid for antenna n; ties go to
  /// the smallest coordinate. Throws SpacingError when no grid point is
  /// feasible.
  double coordinate_update(int n, std::span<const double> positions,
                           std::span<const double> weights) const;

  /// Sweeps n = 0..N-1 until no antenna moves by tol or more, or max_sweeps
  /// is reached. The start is snapped to the grid first.
  GaussSeidelResult gauss_seidel(const Placement& start, std::span<const double> weights,
                                 int max_sweeps, double tol) const;

  /// Same, with the default tolerance of half a grid step.
  GaussSeidelResult gauss_seidel(const Placement& start, std::span<const double> weights,
                                 int max_sweeps = 20) const {
    return gauss_seidel(start, weights, max_sweeps, grid_.step() / 2.0);
  }

  /// Configuration for device k's own slot (indicator weights).
  Placement place_for_user(int k, const Placement& start, int max_sweeps = 20) const;

 private:
  int update_index(int n, std::span<const int> idx, std::span<const double> weights) const;
  bool feasible(int l, int n, std::span<const int> idx) const;

  const Scenario* scenario_;
  PlacementGrid grid_;
  std::vector<cplx> table_;  // table_[k * L + l] = Pi_k(grid.at(l))
};

}  // namespace passfl
