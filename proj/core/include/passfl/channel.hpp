#pragma once

#include <complex>
#include <span>
#include <vector>

#include "passfl/scenario.hpp"

namespace passfl {

using cplx = std::complex<double>;

/// Antenna x-coordinates on the waveguide: ascending, inside [0, D_x], and
/// at least the scenario's minimum spacing apart.
class Placement {
 public:
  Placement() = default;

  /// Sorts the positions and throws ConfigError if they leave [0, D_x] or
  /// violate the minimum spacing.
  Placement(std::vector<double> positions, const Scenario& s);

  const std::vector<double>& positions() const { return x_; }
  std::size_t size() const { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }

  bool operator==(const Placement&) const = default;

 private:
  std::vector<double> x_;
};

/// Which propagation model the array follows.
enum class ArrayKind {
  kPinching,      // free space plus guided phase from the feed at the origin
  kConventional,  // fixed array, no waveguide phase term
};

/// Free-space distance from device k to the point (x, 0, d).
double distance_to(const DeviceProfile& dev, double x, const Scenario& s);

/// Per-antenna contribution exp(-j(kappa D + kappa_g x)) / D.
cplx contribution(const DeviceProfile& dev, double x, const Scenario& s,
                  ArrayKind kind = ArrayKind::kPinching);

/// |sum_n contribution(x_n)|^2, i.e. |H_k|^2 with eta factored out.
double gain(const DeviceProfile& dev, std::span<const double> positions, const Scenario& s,
            ArrayKind kind = ArrayKind::kPinching);

inline double gain(const DeviceProfile& dev, const Placement& p, const Scenario& s,
                   ArrayKind kind = ArrayKind::kPinching) {
  return gain(dev, p.positions(), s, kind);
}

/// SNR per unit of gain: P eta / (N sigma^2), for transmit power P.
double snr_per_gain(double power_w, const Scenario& s);

/// Achievable rate B log2(1 + P eta G / (N sigma^2)) in bit/s. Throws
/// DomainError for negative power.
double rate(double gain, double power_w, const Scenario& s);

/// Fixed array of N elements centred at D_x / 2, half-wavelength spacing.
std::vector<double> conventional_positions(const Scenario& s);

}  // namespace passfl
