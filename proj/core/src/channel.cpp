#include "passfl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "passfl/errors.hpp"

namespace passfl {

Placement::Placement(std::vector<double> positions, const Scenario& s) : x_(std::move(positions)) {
  std::sort(x_.begin(), x_.end());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!(x_[i] >= 0.0 && x_[i] <= s.area_x_m))
      throw ConfigError("placement: antenna " + std::to_string(i) + " outside [0, D_x]");
    if (i > 0 && x_[i] - x_[i - 1] < s.min_spacing_m * (1.0 - 1e-12))
      throw ConfigError("placement: antennas " + std::to_string(i - 1) + " and " +
                        std::to_string(i) + " closer than the minimum spacing");
  }
}

double distance_to(const DeviceProfile& dev, double x, const Scenario& s) {
  const double dx = dev.x_m - x;
  return std::sqrt(dx * dx + dev.y_m * dev.y_m + s.pa_height_m * s.pa_height_m);
}

cplx contribution(const DeviceProfile& dev, double x, const Scenario& s, ArrayKind kind) {
  using ld = long double;
  const ld dx = static_cast<ld>(dev.x_m) - static_cast<ld>(x);
  const ld dy = dev.y_m, dz = s.pa_height_m;
  const ld dist = std::sqrt(dx * dx + dy * dy + dz * dz);
  const ld per_m = static_cast<ld>(s.radio.carrier_freq_hz()) / static_cast<ld>(kSpeedOfLight);
  ld cycles = dist * per_m;
  if (kind == ArrayKind::kPinching) cycles += static_cast<ld>(x) * per_m * s.radio.n_eff();
  cycles -= std::floor(cycles);
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(cycles);
  return std::polar(static_cast<double>(1.0L / dist), -phase);
}

double gain(const DeviceProfile& dev, std::span<const double> positions, const Scenario& s,
            ArrayKind kind) {
  cplx sum{0.0, 0.0};
  for (double x : positions) sum += contribution(dev, x, s, kind);
  return std::norm(sum);
}

double snr_per_gain(double power_w, const Scenario& s) {
  return power_w * s.radio.eta_m2() / (s.num_pas * s.radio.noise_power_w());
}

double rate(double gain, double power_w, const Scenario& s) {
  if (power_w < 0.0) throw DomainError("rate: negative transmit power");
  if (gain < 0.0) throw DomainError("rate: negative channel gain");
  return s.radio.bandwidth_hz() * std::log1p(snr_per_gain(power_w, s) * gain) / std::numbers::ln2;
}

std::vector<double> conventional_positions(const Scenario& s) {
  const double spacing = s.radio.wavelength_m() / 2.0;
  const double centre = s.area_x_m / 2.0;
  std::vector<double> x(static_cast<std::size_t>(s.num_pas));
  for (int n = 0; n < s.num_pas; ++n)
    x[static_cast<std::size_t>(n)] = centre + (n - (s.num_pas - 1) / 2.0) * spacing;
  return x;
}

}  // namespace passfl
