#include "passfl/cost.hpp"

#include <algorithm>

#include "passfl/errors.hpp"

namespace passfl {

double ScheduleAllocation::frequency(int k, const Scenario& s) const {
  const auto i = static_cast<std::size_t>(k);
  if (mask[i] <= 0.0 || tau_cp <= 0.0) return 0.0;
  return mask[i] * s.devices[i].workload_cycles() / tau_cp;
}

double ScheduleAllocation::power(int k) const {
  const auto i = static_cast<std::size_t>(k);
  return tau_cm[i] > 0.0 ? e_cm[i] / tau_cm[i] : 0.0;
}

double comp_latency(const DeviceProfile& dev, double freq_hz) {
  if (!(freq_hz > 0.0)) throw DomainError("comp_latency: frequency must be > 0");
  return dev.workload_cycles() / freq_hz;
}

RoundLatency round_latency(const ScheduleAllocation& alloc, const Scenario& s) {
  RoundLatency out;
  for (int k = 0; k < s.num_devices(); ++k) {
    const double sk = alloc.mask[static_cast<std::size_t>(k)];
    if (sk <= 0.0) continue;
    out.tau_cm_total += sk * alloc.tau_cm[static_cast<std::size_t>(k)];
    const double f = alloc.frequency(k, s);
    if (f > 0.0) out.tau_cp = std::max(out.tau_cp, sk * comp_latency(s.devices[static_cast<std::size_t>(k)], f));
  }
  out.tau_t = out.tau_cm_total + out.tau_cp;
  return out;
}

DeviceEnergy energies(const ScheduleAllocation& alloc, int k, const Scenario& s) {
  const auto i = static_cast<std::size_t>(k);
  const double f = alloc.frequency(k, s);
  DeviceEnergy e;
  e.computation = s.kappa_eff * s.devices[i].workload_cycles() * f * f;
  e.communication = alloc.power(k) * alloc.tau_cm[i];
  return e;
}

}  // namespace passfl
