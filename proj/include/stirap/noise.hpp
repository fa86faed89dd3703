#pragma once

// Quasistatic low-frequency noise: correlated Gaussian detuning draws,
// injection into models and ensemble-averaged transfer efficiency.

#include <cstdint>
#include <vector>

#include "stirap/device.hpp"
#include "stirap/dynamics.hpp"
#include "stirap/effective.hpp"

namespace stirap {

struct CoherenceTimes {
  double T1 = 0.0;       // us
  double T2_star = 0.0;  // us

  void validate() const;
  /// 1/T2' = 1/T2* - 1/(2 T1); infinite when T2* = 2 T1.
  double T2_prime() const;
};

/// sigma_delta = sqrt(2) / T2' in rad/us.
double sigma_from_coherence(const CoherenceTimes& ct);

struct QuasistaticNoise {
  double sigma_delta = 0.0;    // rad/us
  double correlation_a = 0.0;  // delta_p_tilde = a delta_tilde
  int n_samples = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DetuningSample {
  double delta_tilde = 0.0;
  double delta_p_tilde = 0.0;
};

/// n_samples draws delta_tilde ~ N(0, sigma^2), delta_p_tilde = a delta_tilde,
/// from the dedicated noise stream of `seed`.
std::vector<DetuningSample> sample_detunings(const QuasistaticNoise& n);

/// Shifts E1 by delta_tilde and E2 by delta_p_tilde (E0 fixed).
DeviceModel inject_detunings(const DeviceModel& device, double delta_tilde, double delta_p_tilde);
/// Adds delta_tilde |1><1| + delta_p_tilde |2><2|. The shift commutes with H0,
/// so this is exact in the lab, interaction and rotating frames alike.
HamiltonianFn inject_detunings(const HamiltonianFn& h, double delta_tilde, double delta_p_tilde);

enum class NoiseEstimator { lindblad_over_draws, paired_mcwf };
std::string to_string(NoiseEstimator e);
NoiseEstimator parse_noise_estimator(const std::string& s);

struct AveragedEfficiency {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> samples;  // per-draw efficiencies (Lindblad-over-draws only)
  std::vector<DetuningSample> draws;
  EvolutionResult averaged;     // populations averaged over draws
};

/// Ensemble average over quasistatic draws. Lindblad-over-draws solves the
/// density-matrix (or closed, when the dissipator is trivial) dynamics for each
/// draw; paired MCWF runs one quantum-jump trajectory per draw.
AveragedEfficiency averaged_efficiency(const HamiltonianFn& h, const CVector& psi0, const TimeGrid& grid,
                                       const QuasistaticNoise& noise, const DissipatorSpec& dissipator,
                                       NoiseEstimator estimator, std::uint64_t jump_seed,
                                       const PropagationOptions& opts = {});

}  // namespace stirap
