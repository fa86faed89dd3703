#pragma once

// Closed and open-system propagation of HamiltonianFn models:
// state vectors, Lindblad density matrices and quantum-jump trajectories.

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "stirap/common.hpp"
#include "stirap/effective.hpp"

namespace stirap {

/// Uniform propagation grid over [t0, t1] with populations recorded every
/// `decimation` steps (and always at t1).
struct TimeGrid {
  double t0 = 0.0;
  double t1 = 0.0;
  long n_steps = 1;
  long decimation = 1;

  double step() const { return (t1 - t0) / static_cast<double>(n_steps); }
  double time(long k) const { return t0 + step() * static_cast<double>(k); }

  /// Smallest uniform grid with step <= max_step and about `output_points` samples.
  static TimeGrid with_max_step(double t0, double t1, double max_step, long output_points);
};

/// Window [-(tau + start_over_T T), tau + end_over_T T].
void pulse_window(const PulseParams& p, double start_over_T, double end_over_T, double& t0, double& t1);

/// Largest step giving `points_per_period` samples per period of the fastest
/// scale in h: its explicit oscillation frequency or its sampled spectral spread.
double auto_step(const HamiltonianFn& h, double t0, double t1, double points_per_period = 20.0);

enum class Integrator { midpoint, magnus4 };
std::string to_string(Integrator i);
Integrator parse_integrator(const std::string& s);

struct PropagationOptions {
  Integrator integrator = Integrator::midpoint;
  /// Efficiency is read at the first grid time >= readout_time (final time when NaN).
  double readout_time = std::numeric_limits<double>::quiet_NaN();
  /// Reject grids coarser than 1/points_per_period of the fastest period.
  bool enforce_step = true;
  double points_per_period = 20.0;
  int threads = 0;  // 0: hardware concurrency
};

struct EvolutionResult {
  std::vector<double> times;      // output grid
  RMatrix populations;            // rows: output times, columns: levels
  RMatrix population_stderr;      // trajectory paths only
  std::vector<double> leakage;    // sum_{j >= 3} rho_jj on the output grid
  double readout_time = 0.0;
  RVector readout_populations;    // populations at readout_time
  RVector readout_stderr;         // trajectory paths only
  double efficiency = 0.0;        // rho_11 at readout_time
  double efficiency_stderr = 0.0;
  double max_leakage = 0.0;       // over every step
  double max_rho22 = 0.0;
  long jump_count = 0;
  int n_trajectories = 0;
  double max_norm_drift = 0.0;    // unitary path
  double max_trace_error = 0.0;   // Lindblad path
  double min_eigenvalue = 0.0;    // Lindblad path
  double max_jump_probability = 0.0;
  CVector final_state;
  CMatrix final_rho;
};

/// Spontaneous decay 1 -> 0 at rate 1/T1 and 2 -> 1 at rate k/T1.
struct DissipatorSpec {
  double T1 = std::numeric_limits<double>::infinity();  // us
  double k = 0.0;

  void validate() const;
  bool trivial() const { return !(T1 < std::numeric_limits<double>::infinity()); }
  std::vector<CMatrix> jump_operators(int dimension) const;
};

/// exp(-i H h) for Hermitian H (scaled Pade approximant, unitary to rounding).
CMatrix unitary_step(const CMatrix& H, double h);

EvolutionResult propagate_unitary(const HamiltonianFn& h, const CVector& psi0, const TimeGrid& grid,
                                  const PropagationOptions& opts = {});

/// Density-matrix integration of d rho/dt = -i[H, rho] + L_D rho. Each step is
/// the symmetric splitting exp(L_D h/2) U exp(L_D h/2) with U the unitary step.
EvolutionResult propagate_lindblad(const HamiltonianFn& h, const DissipatorSpec& d, const CMatrix& rho0,
                                   const TimeGrid& grid, const PropagationOptions& opts = {});

/// Quantum-jump unravelling averaged over n_traj trajectories. Trajectory i
/// uses its own RNG stream derived from (seed, i) and the Hamiltonian
/// `h_for(i)`, so the result is independent of scheduling.
EvolutionResult propagate_mcwf(const std::function<HamiltonianFn(int)>& h_for, const DissipatorSpec& d,
                               const CVector& psi0, int n_traj, std::uint64_t seed, const TimeGrid& grid,
                               const PropagationOptions& opts = {});
EvolutionResult propagate_mcwf(const HamiltonianFn& h, const DissipatorSpec& d, const CVector& psi0, int n_traj,
                               std::uint64_t seed, const TimeGrid& grid, const PropagationOptions& opts = {});

struct TransferFigures {
  double efficiency = 0.0;
  double max_leakage = 0.0;
  double max_rho22 = 0.0;
};
TransferFigures efficiency_and_leakage(const EvolutionResult& r);

/// Boxcar average of the recorded populations over a window of width `width`
/// centred on each output time (trapezoidal in the output samples; the window is
/// clipped at the grid ends).
RMatrix coarse_grain(const EvolutionResult& r, double width);

/// Basis state |j> of dimension n.
CVector basis_state(int n, int j);

}  // namespace stirap
