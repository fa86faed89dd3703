#pragma once

// Assembly of runnable experiments from validated configurations, and the
// parameter sweeps built on top of them.

#include <optional>
#include <string>
#include <vector>

#include "stirap/config.hpp"

namespace stirap {

/// Everything needed to propagate one configuration.
struct Experiment {
  RunConfig config;
  const DeviceModel* device = nullptr;  // owned by the device cache
  DriveSpec drive;
  HamiltonianFn model;  // includes the static detunings of the configuration
  TimeGrid grid;
  PropagationOptions options;
  CVector psi0;
  double correlation_a = 0.0;  // resolved noise correlation (when noise is configured)
};

/// Hamiltonian of the selected model without static detunings.
HamiltonianFn model_hamiltonian(const RunConfig& c, const DeviceModel& device, const DriveSpec& drive);

/// Noise correlation delta_p_tilde / delta_tilde implied by a fluctuating
/// junction energy, from the device spectrum.
double device_noise_correlation(const DeviceConfig& d);

Experiment build_experiment(const RunConfig& c);

struct RunResult {
  EvolutionResult evolution;
  std::string method;
  double efficiency = 0.0;
  double efficiency_stderr = 0.0;
  std::vector<double> samples;  // per-draw efficiencies when noise is averaged
};

RunResult run_experiment(const Experiment& e);
inline RunResult run_config(const RunConfig& c) { return run_experiment(build_experiment(c)); }

// ---------------------------------------------------------------- detuning map

struct DetuningSweepSpec {
  json base;                              // raw run configuration
  std::vector<double> delta_tilde_mhz;    // map axes
  std::vector<double> delta_p_tilde_mhz;
  std::vector<double> r_values{1.0};
  double line_slope = 2.0;                // delta_p_tilde = slope * delta_tilde
  std::vector<double> line_delta_tilde_mhz;
  double threshold = 0.95;
};

DetuningSweepSpec parse_detuning_sweep(const json& j);

struct LineInterval {
  double lower_mhz = 0.0;  // threshold crossings along the line, in delta_tilde
  double upper_mhz = 0.0;
  bool lower_clipped = false;  // region reaches the end of the scanned line
  bool upper_clipped = false;
  bool contains_origin = false;
};

/// Contiguous interval around zero where `efficiency >= threshold`, with
/// linearly interpolated edges. `x` must be increasing.
LineInterval threshold_interval(const std::vector<double>& x, const std::vector<double>& efficiency,
                                double threshold);

struct ContourPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Points where the bilinear interpolant of `z` (rows along x, columns along y)
/// crosses `level` on the grid edges.
std::vector<ContourPoint> contour_points(const std::vector<double>& x, const std::vector<double>& y,
                                         const RMatrix& z, double level);

struct DetuningMap {
  double r_ratio = 1.0;
  RMatrix efficiency;  // rows: delta_tilde, columns: delta_p_tilde
  std::vector<double> line_efficiency;
  LineInterval line;
  std::vector<ContourPoint> contour;
  double origin_efficiency = 0.0;
  double region_fraction = 0.0;  // share of map points above threshold
};

struct DetuningSweepResult {
  std::vector<DetuningMap> maps;  // one per r value
  std::string config_hash;
  /// Each line interval strictly inside the next (r values in the given order).
  bool strictly_nested = false;
};

DetuningSweepResult sweep_detuning(const DetuningSweepSpec& spec, int threads = 0);

// ------------------------------------------------------------ duration scaling

struct DurationSweepSpec {
  DeviceConfig transmon;
  std::vector<double> omega_r_mhz;
  double delta2_over_omega_r = -5.0;
  double duration_factor = 15.0;  // T = factor / Omega0
  PumpPrefactor prefactor = PumpPrefactor::half;
};

DurationSweepSpec parse_duration_sweep(const json& j);

struct DurationPoint {
  double omega_r_mhz = 0.0;
  double omega0_flux_mhz = 0.0;
  double T_flux_us = 0.0;
  double omega0_transmon_mhz = 0.0;
  double T_transmon_us = 0.0;
};

struct DurationSweepResult {
  std::vector<DurationPoint> points;
  double alpha_mhz = 0.0;
  double T_transmon_saturation_us = 0.0;  // limit of T_transmon for large Omega_r
  std::string config_hash;
};

DurationSweepResult sweep_duration(const DurationSweepSpec& spec);

/// Protocol duration factor / Omega0 at r = 1 for both pump laws.
double duration_flux(double omega_r, double delta2_over_omega_r, double factor);
double duration_transmon(double omega_r, double delta2_over_omega_r, double alpha, double factor,
                         PumpPrefactor prefactor);

// ----------------------------------------------------------- coherence scaling

struct T2SweepSpec {
  json base;  // raw run configuration with open_system and noise sections
  std::vector<double> T2_star_us;
  std::vector<double> r_values{1.0, 2.0};
  double threshold = 0.95;
};

T2SweepSpec parse_t2_sweep(const json& j);

struct T2Point {
  double r_ratio = 1.0;
  double T2_star_us = 0.0;
  double T2_prime_us = 0.0;
  double sigma_delta_mhz = 0.0;
  double efficiency = 0.0;
  double efficiency_stderr = 0.0;
};

struct T2SweepResult {
  std::vector<T2Point> points;  // r-major, T2 ascending within each r
  /// T2' where each curve crosses the threshold (NaN if it does not).
  std::vector<double> threshold_T2_prime_us;
  bool upper_dominates = false;  // each later r curve >= the earlier one pointwise (within 2 standard errors)
  std::string config_hash;
};

T2SweepResult sweep_t2(const T2SweepSpec& spec, int threads = 0);

}  // namespace stirap
