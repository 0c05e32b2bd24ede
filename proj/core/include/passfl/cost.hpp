#pragma once

#include <vector>

#include "passfl/scenario.hpp"

namespace passfl {

/// One round's decision bundle. The mask may hold relaxed values in [0, 1]
/// before rounding. Unscheduled devices carry zero time, energy and
/// frequency.
struct ScheduleAllocation {
  std::vector<double> mask;
  std::vector<double> tau_cm;  // s
  double tau_cp = 0.0;         // s
  std::vector<double> e_cm;    // J

  /// f_k = s_k C_k |D_k| / tau_cp, or 0 when nothing is computed.
  double frequency(int k, const Scenario& s) const;
  /// P_k = E_k / tau_k, or 0 when tau_k = 0.
  double power(int k) const;
};

/// Computation time C_k |D_k| / f_k. Throws DomainError when f_k <= 0.
double comp_latency(const DeviceProfile& dev, double freq_hz);

struct RoundLatency {
  double tau_t = 0.0;
  double tau_cm_total = 0.0;
  double tau_cp = 0.0;
};

/// tau_t = sum_k s_k tau_k + max_k s_k C_k |D_k| / f_k.
RoundLatency round_latency(const ScheduleAllocation& alloc, const Scenario& s);

struct DeviceEnergy {
  double computation = 0.0;
  double communication = 0.0;
  double total() const { return computation + communication; }
};

/// E_cp = xi C_k |D_k| f_k^2 and E_cm = P_k tau_k for device k.
DeviceEnergy energies(const ScheduleAllocation& alloc, int k, const Scenario& s);

}  // namespace passfl
