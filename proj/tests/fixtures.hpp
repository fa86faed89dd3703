#pragma once

#include "stirap/control.hpp"
#include "stirap/device.hpp"

namespace fixtures {

using namespace stirap;

// Weakly anharmonic ladder with harmonic-oscillator couplings sqrt(j + 1).
inline DeviceModel ladder(int n, double omega01, double alpha) {
  DeviceModel m;
  m.n_levels = n;
  m.energies = RVector::Zero(n);
  for (int j = 1; j < n; ++j) m.energies(j) = m.energies(j - 1) + omega01 + alpha * (j - 1);
  m.coupling = CMatrix::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) m.coupling(j, j + 1) = m.coupling(j + 1, j) = std::sqrt(j + 1.0);
  m.anharmonicity_alpha = alpha;
  m.anharmonicity_beta = alpha;
  return m;
}

// Strongly anharmonic three-level device resembling the flux qudit.
inline DeviceModel flux_like() {
  DeviceModel m;
  m.n_levels = 3;
  m.energies = RVector(3);
  m.energies << 0.0, units::from_ghz(5.59), units::from_ghz(36.08);
  m.coupling = CMatrix::Zero(3, 3);
  m.coupling(0, 1) = cplx(0.0, -1.0);
  m.coupling(1, 0) = cplx(0.0, 1.0);
  m.coupling(1, 2) = m.coupling(2, 1) = 0.8;
  m.anharmonicity_alpha = m.omega(1, 2) - m.omega(0, 1);
  return m;
}

inline PulseParams flux_pulses(double r = 1.0) {
  const double omega_r = units::from_mhz(200.0);
  PulseParams p = PulseParams::with_default_delay(units::from_mhz(20.0), omega_r, -5.0 * omega_r, 0.12);
  p.r_ratio = r;
  return p;
}

// Transmon-like ladder (omega_01 = 3.973 GHz, alpha = -243.8 MHz).
inline DeviceModel transmon_like() { return ladder(6, units::from_ghz(3.97292), units::from_mhz(-243.77)); }

inline PulseParams transmon_pulses(const DeviceModel& d, double r = 1.0) {
  const double omega0 = units::from_mhz(3.9);
  const double omega_r = solve_pump_amplitude_transmon(omega0, -5.0, d.anharmonicity_alpha);
  PulseParams p = PulseParams::with_default_delay(omega0, omega_r, -5.0 * omega_r, 0.6);
  p.r_ratio = r;
  return p;
}

}  // namespace fixtures
