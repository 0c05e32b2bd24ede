#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace passfl {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact SI value

/// Raw radio parameters as they appear in a configuration file.
struct RadioInputs {
  double carrier_freq_hz = 28e9;
  double bandwidth_hz = 1e6;
  double noise_psd_dbm_per_hz = -174.0;
  double n_eff = 1.44;
};

/// Radio parameters together with the constants derived from them.
/// Construct through derive_radio(); instances are immutable.
class RadioConfig {
 public:
  const RadioInputs& inputs() const { return in_; }
  double carrier_freq_hz() const { return in_.carrier_freq_hz; }
  double bandwidth_hz() const { return in_.bandwidth_hz; }
  double noise_psd_dbm_per_hz() const { return in_.noise_psd_dbm_per_hz; }
  double n_eff() const { return in_.n_eff; }

  double wavelength_m() const { return wavelength_; }
  double guided_wavelength_m() const { return guided_wavelength_; }
  /// Free-space path-gain constant c^2 / (16 pi^2 f_c^2).
  double eta_m2() const { return eta_; }
  double kappa() const { return kappa_; }
  double kappa_g() const { return kappa_g_; }
  double noise_power_w() const { return noise_power_; }

 private:
  friend RadioConfig derive_radio(const RadioInputs& raw);
  RadioInputs in_;
  double wavelength_ = 0, guided_wavelength_ = 0, eta_ = 0;
  double kappa_ = 0, kappa_g_ = 0, noise_power_ = 0;
};

/// Throws ConfigError when a frequency is not positive or n_eff < 1.
RadioConfig derive_radio(const RadioInputs& raw);

struct DeviceProfile {
  double x_m = 0.0;
  double y_m = 0.0;
  std::int64_t data_size_samples = 1;
  double cycles_per_sample = 1e6;
  double e_max_j = 0.1;
  double p_max_w = 0.2;
  double f_max_hz = 1.8e9;

  /// Cycles for one pass over the local data, C_k |D_k|.
  double workload_cycles() const {
    return cycles_per_sample * static_cast<double>(data_size_samples);
  }
};

struct Scenario {
  double area_x_m = 30.0;
  double area_y_m = 20.0;
  double pa_height_m = 3.0;
  int num_pas = 4;
  std::vector<DeviceProfile> devices;
  RadioConfig radio;
  double upload_bits = 1e6;
  double kappa_eff = 1e-28;  // xi, J s^2 / cycle^3
  double min_spacing_m = 0.0;

  int num_devices() const { return static_cast<int>(devices.size()); }
  std::int64_t total_data() const;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const Scenario& s);

/// Defaults for generated scenarios; values follow the reference
/// deployment (30 m x 20 m hall, 28 GHz, d = 3 m).
struct ScenarioTemplate {
  double area_x_m = 30.0;
  double area_y_m = 20.0;
  double pa_height_m = 3.0;
  int num_pas = 4;
  RadioInputs radio;
  double upload_bits = 1e6;
  double kappa_eff = 1e-28;
  /// Defaults to half a free-space wavelength.
  std::optional<double> min_spacing_m;

  std::int64_t data_size_min = 100;
  std::int64_t data_size_max = 300;
  double cycles_per_sample = 1e6;
  double e_max_j = 0.1;
  double p_max_w = 0.2;
  double f_max_hz = 1.8e9;
};

/// Places `num_devices` users uniformly in the rectangle and draws their
/// data sizes uniformly from the template range. Bit-identical for equal
/// (seed, num_devices, template).
Scenario generate_scenario(std::uint64_t seed, int num_devices, const ScenarioTemplate& tmpl);

/// Scenario with fixed device list, using the template for everything else.
Scenario make_scenario(const ScenarioTemplate& tmpl, std::vector<DeviceProfile> devices);

struct LearnParams {
  double lipschitz = 10.0;
  double pl_delta = 1.0;
  int local_steps = 5;
  double grad_bound = 1.0;
  double total_data = 1.0;

  double learn_rate() const { return 1.0 / lipschitz; }
  /// 1 - delta * local_steps / L
  double contraction() const {
    return 1.0 - pl_delta * static_cast<double>(local_steps) / lipschitz;
  }
};

/// Throws ConfigError for invalid constants and ContractionError when
/// delta * local_steps / L >= 1.
void validate(const LearnParams& p);

}  // namespace passfl
