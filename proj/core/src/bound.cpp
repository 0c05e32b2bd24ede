#include "passfl/bound.hpp"

#include <cmath>

#include "passfl/errors.hpp"

namespace passfl {

double scheduled_data(std::span<const double> mask, std::span<const DeviceProfile> devices) {
  if (mask.size() != devices.size()) throw DomainError("mask length differs from device count");
  double total = 0.0;
  for (std::size_t k = 0; k < mask.size(); ++k)
    total += mask[k] * static_cast<double>(devices[k].data_size_samples);
  return total;
}

double f_learn(std::span<const double> mask, std::span<const DeviceProfile> devices) {
  double all = 0.0;
  for (const auto& d : devices) all += static_cast<double>(d.data_size_samples);
  return all - scheduled_data(mask, devices);
}

double a_t(double scheduled, const LearnParams& p) {
  validate(p);
  const double theta = p.local_steps;
  const double eps2 = p.grad_bound * p.grad_bound;
  const double total2 = p.total_data * p.total_data;
  const double missing = p.total_data - scheduled;
  return 2.0 * theta * eps2 * missing * missing / (p.lipschitz * total2) +
         theta * theta * theta * eps2 / (2.0 * p.lipschitz * total2);
}

double a_t(std::span<const double> mask, const LearnParams& params,
           std::span<const DeviceProfile> devices) {
  return a_t(scheduled_data(mask, devices), params);
}

BoundTrace gap_envelope(double initial_gap, std::span<const double> scheduled_per_round,
                        const LearnParams& params) {
  validate(params);
  if (initial_gap < 0.0) throw DomainError("initial optimality gap must be >= 0");
  BoundTrace tr;
  tr.contraction = params.contraction();
  tr.envelope.reserve(scheduled_per_round.size() + 1);
  tr.envelope.push_back(initial_gap);
  for (double d : scheduled_per_round) {
    const double a = a_t(d, params);
    tr.scheduled.push_back(d);
    tr.increments.push_back(a);
    tr.envelope.push_back(tr.contraction * tr.envelope.back() + a);
  }
  return tr;
}

double gap_envelope_closed_form(double initial_gap, std::span<const double> scheduled_per_round,
                                const LearnParams& params) {
  validate(params);
  const double rho = params.contraction();
  const auto T = static_cast<int>(scheduled_per_round.size());
  double value = std::pow(rho, T) * initial_gap;
  for (int t = 1; t <= T; ++t)
    value += a_t(scheduled_per_round[static_cast<std::size_t>(t - 1)], params) * std::pow(rho, T - t);
  return value;
}

double aggregation_error(const Eigen::VectorXd& global_grad,
                         std::span<const Eigen::VectorXd> local_grads, std::span<const double> mask,
                         std::span<const double> data_sizes) {
  if (local_grads.size() != mask.size() || mask.size() != data_sizes.size())
    throw DomainError("aggregation_error: inconsistent device counts");
  double scheduled = 0.0;
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(global_grad.size());
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] == 0.0) continue;
    if (local_grads[k].size() != global_grad.size())
      throw DomainError("aggregation_error: gradient dimensions differ");
    weighted += mask[k] * data_sizes[k] * local_grads[k];
    scheduled += mask[k] * data_sizes[k];
  }
  if (scheduled <= 0.0) throw DomainError("aggregation_error: undefined for an empty schedule");
  return (global_grad - weighted / scheduled).norm();
}

}  // namespace passfl
