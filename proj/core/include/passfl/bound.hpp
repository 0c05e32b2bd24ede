#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "passfl/scenario.hpp"

namespace passfl {

/// Data volume of the scheduled devices, D(s) = sum_k s_k |D_k|.
double scheduled_data(std::span<const double> mask, std::span<const DeviceProfile> devices);

/// Learning penalty |D| - D(s): the data left out of aggregation.
double f_learn(std::span<const double> mask, std::span<const DeviceProfile> devices);

/// Per-round bound increment
///   A = 2 theta eps^2 (|D| - D(s))^2 / (L |D|^2) + theta^3 eps^2 / (2 L |D|^2)
/// with |D| = params.total_data. Throws ContractionError when the
/// parameters violate the contraction condition.
double a_t(double scheduled, const LearnParams& params);

double a_t(std::span<const double> mask, const LearnParams& params,
           std::span<const DeviceProfile> devices);

struct BoundTrace {
  double contraction = 0.0;               // rho = 1 - delta theta / L
  std::vector<double> scheduled;          // D(s^t), t = 1..T
  std::vector<double> increments;         // A_t, t = 1..T
  std::vector<double> envelope;           // O_t^ub, t = 0..T (envelope[0] = O_0)
};

/// Optimality-gap envelope O_t^ub = rho O_{t-1}^ub + A_t, one entry of
/// `scheduled_per_round` per round.
BoundTrace gap_envelope(double initial_gap, std::span<const double> scheduled_per_round,
                        const LearnParams& params);

/// Closed form rho^T O_0 + sum_t A_t rho^(T-t) for the final round only.
double gap_envelope_closed_form(double initial_gap, std::span<const double> scheduled_per_round,
                                const LearnParams& params);

/// || grad F - (1 / D(s)) sum_k s_k |D_k| grad F_k ||_2. Throws DomainError
/// when no data is scheduled or dimensions disagree.
double aggregation_error(const Eigen::VectorXd& global_grad,
                         std::span<const Eigen::VectorXd> local_grads, std::span<const double> mask,
                         std::span<const double> data_sizes);

}  // namespace passfl
