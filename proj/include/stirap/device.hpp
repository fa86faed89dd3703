#pragma once

// Undriven Hamiltonians of the four-junction flux qudit and the transmon,
// their truncated eigenbasis models, and spectral bias sensitivity.

#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "stirap/common.hpp"

namespace stirap {

using CSparse = Eigen::SparseMatrix<cplx>;

struct FluxQubitSpec {
  double E_C = units::from_ghz(4.0);   // rad/us
  double E_J_over_E_C = 50.0;
  double junction_asymmetry = 0.54;    // small-junction ratio, not an anharmonicity
  double flux_bias_f = 0.5;            // Phi_b / Phi_0
  int charge_cutoff = 13;              // charge states per island

  void validate() const;
};

struct TransmonSpec {
  double E_C = units::from_ghz(0.212);
  double E_J_over_E_C = 49.0;
  double charge_bias_qg = 0.5;
  int charge_cutoff = 100;  // total basis size

  void validate() const;
};

/// Bare Hamiltonian and drive-coupling operator in a charge basis.
struct ChargeBasisHamiltonian {
  CSparse H0;
  CSparse Q;
  /// Index permutation implementing the device parity (phi -> -phi or n -> 1-n);
  /// empty when the bias is off the symmetry point.
  std::vector<int> parity_map;
};

/// Truncated eigenbasis description of a device. Immutable once built.
struct DeviceModel {
  RVector energies;   // ascending, rad/us
  CMatrix coupling;   // Q_ij in the eigenbasis
  int n_levels = 0;
  double anharmonicity_alpha = 0.0;  // omega_12 - omega_01
  double anharmonicity_beta = 0.0;   // omega_23 - omega_12
  std::vector<std::string> warnings;

  /// Bohr frequency omega_ij = E_j - E_i.
  double omega(int i, int j) const { return energies(j) - energies(i); }
  cplx Q(int i, int j) const { return coupling(i, j); }
};

/// Flux qudit with three identical junctions and one smaller by
/// `junction_asymmetry`; Q = dH/dA at A = 0 with the control flux A in units of Phi_0.
ChargeBasisHamiltonian build_flux_hamiltonian(const FluxQubitSpec& spec);

/// Cooper-pair box H = -E_J cos(phi) + 4 E_C (n - q_g)^2, Q = -8 E_C (n - q_g).
ChargeBasisHamiltonian build_transmon_hamiltonian(const TransmonSpec& spec);

/// Lowest `n_levels` eigenpairs of H0 with Q rotated into that basis.
///
/// Eigenvector phases are fixed so that the largest-magnitude component of each
/// eigenvector is real and positive. Degenerate levels (where that convention
/// does not pin down the basis) are reported in `DeviceModel::warnings`.
DeviceModel diagonalize(const CSparse& H0, const CSparse& Q, int n_levels);
DeviceModel diagonalize(const CMatrix& H0, const CMatrix& Q, int n_levels);

/// Lowest `n_eigen` eigenpairs of a dense Hermitian matrix (LAPACK ?syevr/?heevr).
/// Uses the real symmetric driver when the imaginary part vanishes.
void lowest_eigenpairs(const CMatrix& H, int n_eigen, RVector& values, CMatrix& vectors);

DeviceModel flux_device(const FluxQubitSpec& spec, int n_levels);
DeviceModel transmon_device(const TransmonSpec& spec, int n_levels);

/// Expectation of the parity operator in each of the lowest `n_levels`
/// eigenstates (+1 even, -1 odd). Requires a symmetry-point bias.
std::vector<double> level_parities(const ChargeBasisHamiltonian& h, int n_levels);

struct ConvergenceReport {
  double max_relative_shift = 0.0;  // max_j |E_j(c+2) - E_j(c)| / |E_j(c)|
  bool converged = false;
};

/// Compares the lowest `n_levels` energies at charge_cutoff and charge_cutoff + 2.
ConvergenceReport check_cutoff_convergence(const FluxQubitSpec& spec, int n_levels,
                                           double tolerance = 1e-8);
ConvergenceReport check_cutoff_convergence(const TransmonSpec& spec, int n_levels,
                                           double tolerance = 1e-8);

enum class BiasParameter { EJ_over_EC, flux_bias, charge_bias };

BiasParameter parse_bias_parameter(const std::string& name);

struct BiasSensitivity {
  double dE1dx = 0.0;  // d(E1 - E0)/dx, rad/us per unit bias
  double dE2dx = 0.0;  // d(E2 - E0)/dx
  double correlation_a = 0.0;
  bool nonlinear = false;  // halved-step estimate differs by more than 1%
  double halving_deviation = 0.0;
};

/// Central-difference derivatives of the two lowest Bohr frequencies,
/// validated against a half-step estimate.
BiasSensitivity bias_sensitivity(const FluxQubitSpec& spec, BiasParameter bias, double step);
BiasSensitivity bias_sensitivity(const TransmonSpec& spec, BiasParameter bias, double step);

}  // namespace stirap
