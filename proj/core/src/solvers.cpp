#include "passfl/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "passfl/channel.hpp"
#include "passfl/errors.hpp"

namespace passfl {

namespace {

constexpr double kBracketLo = 1e-9;
constexpr double kBracketHi = 1e3;
constexpr double kBisectTol = 1e-12;
constexpr int kBisectMaxIter = 200;

void check_lengths(const Scenario& s, std::size_t n, const char* what) {
  if (n != s.devices.size())
    throw DomainError(std::string(what) + ": length differs from device count");
}

// bits delivered in tau seconds with energy e spread over the slot
double delivered_bits(double tau, double snr_energy, const Scenario& s) {
  return tau * s.radio.bandwidth_hz() * std::log1p(snr_energy / tau) / std::numbers::ln2;
}

}  // namespace

void validate(const TradeoffConfig& cfg, int num_devices) {
  if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) throw ConfigError("lambda out of (0,1)");
  if (cfg.theta.size() != static_cast<std::size_t>(num_devices))
    throw ConfigError("theta length differs from device count");
  double sum = 0.0;
  for (double t : cfg.theta) {
    if (!(t >= 0.0)) throw ConfigError("theta entries must be >= 0");
    sum += t;
  }
  if (sum != 0.0 && std::abs(sum - 1.0) > 1e-9) throw ConfigError("theta must sum to 1");
}

std::vector<double> uniform_theta(std::span<const double> mask) {
  const auto active = std::count_if(mask.begin(), mask.end(), [](double m) { return m > 0.0; });
  std::vector<double> theta(mask.size(), 0.0);
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (mask[k] > 0.0) theta[k] = 1.0 / static_cast<double>(active);
  return theta;
}

double upload_time(double mask, double e_cm, double gain, const Scenario& s) {
  if (mask <= 0.0) return 0.0;
  if (!(gain > 0.0)) throw RateInfeasibleError("upload_time: zero channel gain");
  if (!(e_cm > 0.0)) throw RateInfeasibleError("upload_time: no communication energy");
  // E eta G / (sigma^2 N): the SNR-time product
  const double snr_energy = e_cm * s.radio.eta_m2() * gain /
                            (s.radio.noise_power_w() * s.num_pas);
  const double target = s.upload_bits * mask;
  double lo = kBracketLo, hi = kBracketHi;
  if (delivered_bits(lo, snr_energy, s) >= target) return lo;
  if (delivered_bits(hi, snr_energy, s) < target)
    throw RateInfeasibleError("upload_time: payload cannot be delivered within the bracket");
  for (int it = 0; it < kBisectMaxIter && hi - lo > kBisectTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (delivered_bits(mid, snr_energy, s) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double min_compute_time(const DeviceProfile& dev, double mask, double e_cm, const Scenario& s) {
  if (mask <= 0.0) return 0.0;
  const double headroom = dev.e_max_j - e_cm;
  if (!(headroom > 0.0))
    throw EnergyInfeasibleError("communication energy exhausts the device budget");
  const double w = dev.workload_cycles();
  const double energy_bound = std::sqrt(s.kappa_eff * mask * w * w * w / headroom);
  const double freq_bound = mask * w / dev.f_max_hz;
  return std::max(energy_bound, freq_bound);
}

TimeAllocation solve_times(const Scenario& s, std::span<const double> mask,
                           std::span<const double> e_cm, std::span<const double> gains) {
  check_lengths(s, mask.size(), "solve_times mask");
  check_lengths(s, e_cm.size(), "solve_times e_cm");
  check_lengths(s, gains.size(), "solve_times gains");
  TimeAllocation out;
  out.tau_cm.assign(mask.size(), 0.0);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] <= 0.0) continue;
    out.tau_cm[k] = upload_time(mask[k], e_cm[k], gains[k], s);
    out.tau_cp = std::max(out.tau_cp, min_compute_time(s.devices[k], mask[k], e_cm[k], s));
  }
  return out;
}

double scalarized_objective(const Scenario& s, std::span<const double> mask,
                            const TimeAllocation& times, double lambda) {
  double bracket = times.tau_cp, data = 0.0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] == 0.0) continue;
    const double size = static_cast<double>(s.devices[k].data_size_samples);
    bracket += mask[k] * (times.tau_cm[k] + size);
    data += mask[k] * size;
  }
  return lambda * bracket - data;
}

ScheduleDecision solve_schedule(const Scenario& s, const TimeAllocation& times,
                                std::span<const double> e_cm, double lambda,
                                std::span<const double> gains) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda out of (0,1)");
  check_lengths(s, times.tau_cm.size(), "solve_schedule tau_cm");
  check_lengths(s, e_cm.size(), "solve_schedule e_cm");
  check_lengths(s, gains.size(), "solve_schedule gains");
  const std::size_t K = s.devices.size();
  ScheduleDecision out;
  out.coefficients.resize(K);
  out.upper_bounds.resize(K);
  out.relaxed.assign(K, 0.0);
  out.rounded.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& dev = s.devices[k];
    const double size = static_cast<double>(dev.data_size_samples);
    const double tau = times.tau_cm[k];
    out.coefficients[k] = lambda * (tau + size) - size;

    double ub = 1.0;
    if (tau > 0.0) {
      ub = std::min(ub, tau * rate(gains[k], e_cm[k] / tau, s) / s.upload_bits);
    } else {
      ub = 0.0;
    }
    const double w = dev.workload_cycles();
    ub = std::min(ub, (dev.e_max_j - e_cm[k]) * times.tau_cp * times.tau_cp /
                          (s.kappa_eff * w * w * w));
    ub = std::min(ub, dev.f_max_hz * times.tau_cp / w);
    ub = std::max(ub, 0.0);
    out.upper_bounds[k] = ub;

    if (out.coefficients[k] < 0.0) out.relaxed[k] = ub;
    out.rounded[k] = out.relaxed[k] >= 0.5 ? 1.0 : 0.0;
  }
  return out;
}

EnergyDecision solve_energies(const Scenario& s, std::span<const double> mask,
                              const TimeAllocation& times, std::span<const double> theta,
                              std::span<const double> gains) {
  check_lengths(s, mask.size(), "solve_energies mask");
  check_lengths(s, theta.size(), "solve_energies theta");
  check_lengths(s, gains.size(), "solve_energies gains");
  check_lengths(s, times.tau_cm.size(), "solve_energies tau_cm");
  for (double t : theta)
    if (!(t >= 0.0)) throw DomainError("solve_energies: theta must be >= 0");

  EnergyDecision out;
  out.e_cm.assign(mask.size(), 0.0);
  out.infeasible.assign(mask.size(), false);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const auto& dev = s.devices[k];
    double corner = dev.p_max_w * times.tau_cm[k];
    if (mask[k] > 0.0) {
      if (!(times.tau_cp > 0.0)) throw DomainError("solve_energies: tau_cp must be > 0");
      const double w = dev.workload_cycles();
      corner = std::min(corner, dev.e_max_j - s.kappa_eff * mask[k] * w * w * w /
                                                  (times.tau_cp * times.tau_cp));
    }
    if (corner < 0.0) {
      out.infeasible[k] = true;
      corner = 0.0;
    }
    out.e_cm[k] = corner;
  }
  return out;
}

}  // namespace passfl
