#include "passfl/scenario.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "passfl/errors.hpp"
#include "passfl/random.hpp"

namespace passfl {

RadioConfig derive_radio(const RadioInputs& raw) {
  if (!(raw.carrier_freq_hz > 0.0)) throw ConfigError("radio.carrier_freq_hz must be > 0");
  if (!(raw.bandwidth_hz > 0.0)) throw ConfigError("radio.bandwidth_hz must be > 0");
  if (!(raw.n_eff >= 1.0)) throw ConfigError("radio.n_eff must be >= 1");
  if (!std::isfinite(raw.noise_psd_dbm_per_hz))
    throw ConfigError("radio.noise_psd_dbm_per_hz must be finite");

  constexpr double pi = std::numbers::pi;
  RadioConfig r;
  r.in_ = raw;
  const double fc = raw.carrier_freq_hz;
  r.wavelength_ = kSpeedOfLight / fc;
  r.guided_wavelength_ = r.wavelength_ / raw.n_eff;
  r.eta_ = kSpeedOfLight * kSpeedOfLight / (16.0 * pi * pi * fc * fc);
  r.kappa_ = 2.0 * pi / r.wavelength_;
  r.kappa_g_ = 2.0 * pi / r.guided_wavelength_;
  r.noise_power_ = std::pow(10.0, (raw.noise_psd_dbm_per_hz - 30.0) / 10.0) * raw.bandwidth_hz;
  return r;
}

std::int64_t Scenario::total_data() const {
  std::int64_t total = 0;
  for (const auto& d : devices) total += d.data_size_samples;
  return total;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void validate(const Scenario& s) {
  require(s.area_x_m > 0 && s.area_y_m > 0, "area dimensions must be > 0");
  require(s.pa_height_m > 0, "pa_height_m must be > 0");
  require(s.num_pas >= 1, "num_pas must be >= 1");
  require(!s.devices.empty(), "at least one device is required");
  require(s.min_spacing_m > 0, "min_spacing_m must be > 0");
  require(s.num_pas * s.min_spacing_m < s.area_x_m,
          "num_pas * min_spacing_m must be smaller than area x");
  require(s.upload_bits > 0, "upload_bits must be > 0");
  require(s.kappa_eff > 0, "kappa_eff must be > 0");
  require(s.radio.carrier_freq_hz() > 0, "radio is not derived");
  for (std::size_t k = 0; k < s.devices.size(); ++k) {
    const auto& d = s.devices[k];
    const std::string tag = "device " + std::to_string(k) + ": ";
    require(d.x_m >= 0 && d.x_m <= s.area_x_m, tag + "x outside [0, area_x]");
    require(std::abs(d.y_m) <= s.area_y_m / 2, tag + "y outside [-area_y/2, area_y/2]");
    require(d.data_size_samples >= 1, tag + "data_size_samples must be >= 1");
    require(d.cycles_per_sample > 0, tag + "cycles_per_sample must be > 0");
    require(d.e_max_j > 0, tag + "e_max_j must be > 0");
    require(d.p_max_w > 0, tag + "p_max_w must be > 0");
    require(d.f_max_hz > 0, tag + "f_max_hz must be > 0");
  }
}

Scenario make_scenario(const ScenarioTemplate& tmpl, std::vector<DeviceProfile> devices) {
  Scenario s;
  s.area_x_m = tmpl.area_x_m;
  s.area_y_m = tmpl.area_y_m;
  s.pa_height_m = tmpl.pa_height_m;
  s.num_pas = tmpl.num_pas;
  s.radio = derive_radio(tmpl.radio);
  s.upload_bits = tmpl.upload_bits;
  s.kappa_eff = tmpl.kappa_eff;
  s.min_spacing_m = tmpl.min_spacing_m.value_or(s.radio.wavelength_m() / 2.0);
  s.devices = std::move(devices);
  validate(s);
  return s;
}

Scenario generate_scenario(std::uint64_t seed, int num_devices, const ScenarioTemplate& tmpl) {
  if (num_devices <= 0) throw ConfigError("number of devices must be > 0");
  if (tmpl.data_size_min < 1 || tmpl.data_size_max < tmpl.data_size_min)
    throw ConfigError("data size range must satisfy 1 <= min <= max");

  Rng rng = Rng::derive(seed, 1);
  const auto span = static_cast<std::uint64_t>(tmpl.data_size_max - tmpl.data_size_min + 1);
  std::vector<DeviceProfile> devices(static_cast<std::size_t>(num_devices));
  for (auto& d : devices) {
    d.x_m = rng.uniform(0.0, tmpl.area_x_m);
    d.y_m = rng.uniform(-tmpl.area_y_m / 2.0, tmpl.area_y_m / 2.0);
    d.data_size_samples = tmpl.data_size_min + static_cast<std::int64_t>(rng.below(span));
    d.cycles_per_sample = tmpl.cycles_per_sample;
    d.e_max_j = tmpl.e_max_j;
    d.p_max_w = tmpl.p_max_w;
    d.f_max_hz = tmpl.f_max_hz;
  }
  return make_scenario(tmpl, std::move(devices));
}

void validate(const LearnParams& p) {
  require(p.lipschitz > 0, "learn.lipschitz must be > 0");
  require(p.pl_delta > 0 && p.pl_delta <= p.lipschitz, "learn.pl_delta must lie in (0, L]");
  require(p.local_steps >= 1, "learn.local_steps must be >= 1");
  require(p.grad_bound > 0, "learn.grad_bound must be > 0");
  require(p.total_data > 0, "learn.total_data must be > 0");
  const double ratio = p.pl_delta * p.local_steps / p.lipschitz;
  if (!(ratio < 1.0))
    throw ContractionError("delta * local_steps / L = " + std::to_string(ratio) +
                           " violates the contraction condition (< 1)");
}

}  // namespace passfl
