#pragma once

// Model Hamiltonians at every level of description: the ideal Lambda system,
// the interaction-picture drive (with or without the rotating-wave
// approximation), the transmon stray terms, the closed-form effective
// Hamiltonians and a numerical second-order Magnus average.

#include <functional>
#include <string>
#include <vector>

#include "stirap/common.hpp"
#include "stirap/control.hpp"
#include "stirap/device.hpp"

namespace stirap {

enum class Frame { lab, interaction, rotating };
std::string to_string(Frame f);

/// Operator-valued function of time in a declared frame.
struct HamiltonianFn {
  int dimension = 0;
  Frame frame = Frame::interaction;
  std::function<CMatrix(double)> eval;
  /// Fastest explicit oscillation in the matrix elements (rad/us); zero for
  /// slowly varying Hamiltonians. Used for step-size control.
  double max_frequency = 0.0;

  CMatrix operator()(double t) const { return eval(t); }
};

struct LambdaParams {
  cplx Omega_p = 0.0;
  cplx Omega_s = 0.0;
  double delta = 0.0;
  double delta_p = 0.0;
};

/// (Omega_p/2)|0><2| + (Omega_s/2)|1><2| + h.c. + delta|1><1| + delta_p|2><2|.
CMatrix h_lambda(const LambdaParams& p);

/// Zero-energy eigenvector of h_lambda at delta = 0:
/// (conj(Omega_s), -conj(Omega_p), 0) / norm.
CVector dark_state(cplx Omega_p, cplx Omega_s);

/// One rotating-wave term: tone `tone` acting on the transition i < j.
struct RwaTerm {
  int i = 0;
  int j = 1;
  ToneLabel tone = ToneLabel::p1;
};

/// Sum of RWA terms (Q_ij A_m(t)/2) exp{i[(omega_m - omega_ij) t - phi_m(t)]} |i><j| + h.c.
/// in the interaction picture of H0 = sum_j E_j |j><j|.
HamiltonianFn rwa_hamiltonian(const DeviceModel& device, const DriveSpec& drive, const std::vector<RwaTerm>& terms,
                              int dimension);

/// Three-level interaction-picture Hamiltonian: p1 on 0-1, p2 and Stokes on 1-2.
HamiltonianFn h3_interaction(const DeviceModel& device, const DriveSpec& drive);

/// Stray pump terms of a weakly anharmonic device (4x4): p1 on 1-2 and 2-3,
/// p2 on 0-1 and 2-3. The weak Stokes tone's stray terms are dropped.
HamiltonianFn h_tilde_transmon(const DeviceModel& device, const DriveSpec& drive);

/// Sum of two Hamiltonians of possibly different dimension (the smaller is
/// embedded in the upper-left block). Frames must agree.
HamiltonianFn add(const HamiltonianFn& a, const HamiltonianFn& b);

/// h3 for flux-type devices, h3 + h_tilde for transmons.
HamiltonianFn rwa_model(const DeviceModel& device, const DriveSpec& drive, bool include_stray_terms);

/// Complete N-level driven device H0 + Q A(t) without the RWA.
/// Frame::lab returns it as is; Frame::interaction removes H0 exactly.
HamiltonianFn full_device_hamiltonian(const DeviceModel& device, const DriveSpec& drive, Frame frame);

/// Rotating frame of the effective Lambda system, V = diag(1, e^{i(th2 - ths)}, e^{i th2}, 1, ...)
/// with th2 = phi_p2 + delta_p t and ths = phi_s + delta_s t:
/// H_rot = V^dag H V + diag(0, th2' - ths', th2', 0, ...). Levels above 2 stay in the interaction picture.
HamiltonianFn to_rotating_frame(const HamiltonianFn& interaction, const DriveSpec& drive);
/// The same transformation applied to one interaction-picture matrix taken at time t.
CMatrix to_rotating_frame(const CMatrix& interaction, const DriveSpec& drive, double t);

enum class MagnusWeight { boxcar, smooth };

struct MagnusWindow {
  double delta_t = 0.0;
  MagnusWeight weight = MagnusWeight::boxcar;
  bool fast_ok = false;          // delta_t |delta2| >= 10
  bool rabi_ok = false;          // delta_t Omega_r <= 0.1
  bool envelope_ok = false;      // delta_t / T <= 0.1
  bool chirp_ok = false;         // delta_t max|phi'| <= 0.1
  int shift_samples = 16;        // window-origin average (0 disables)
  double abs_tolerance = 1e-10;  // per element

  /// Fewest whole fast periods 2 pi / |delta2| with delta_t |delta2| >= 10 (two).
  static MagnusWindow for_drive(const DriveSpec& drive);
  static MagnusWindow with_width(const DriveSpec& drive, double delta_t);
  /// Smooth weighting over eight fast periods.
  static MagnusWindow smooth_for_drive(const DriveSpec& drive);

  /// The conditions the coarse-graining cannot do without.
  bool usable() const { return fast_ok && envelope_ok; }
};

/// Second-order Magnus average over [t - dt/2, t + dt/2]:
///   (1/dt) int H + (-i / 2dt) int int_{t'' < t'} [H(t'), H(t'')].
/// Evaluated by composite Gauss-Legendre panels (at least 20 per fastest period),
/// doubled until two successive results agree to the window tolerance. When
/// `shift_samples > 0` the result is further averaged over that many window
/// origins spread across one window width, which cancels the origin-dependent
/// "kick" terms and leaves the secular part.
///
/// With `MagnusWeight::smooth` the boxcar is replaced by a four-term
/// Blackman-Harris low-pass filter of length dt. The slow part S = L[H] is
/// kept to first order and the second-order term is L[-(i/2) [F, G]] with the
/// fast part F = H - S and its zero-mean antiderivative G = I - L[I], I = int F.
/// This is the long-window limit of the boxcar result, reached without whole
/// periods of every fast frequency; it needs dt >= 8 pi / (slowest fast frequency).
CMatrix magnus_average(const HamiltonianFn& h, double t, const MagnusWindow& window);

/// Magnus average of an interaction-picture Hamiltonian, moved to the rotating
/// frame at the window centre and shifted so that level 0 sits at zero energy,
/// i.e. directly comparable with h_eff_flux / h_eff_transmon.
CMatrix magnus_effective(const HamiltonianFn& interaction, const DriveSpec& drive, double t,
                         const MagnusWindow& window);

/// Effective flux-device Hamiltonian in the rotating frame, real positive Rabi frequencies.
HamiltonianFn h_eff_flux(const PulseParams& params, const ChirpLaw& chirp);
/// Same with complex Rabi frequencies Q_ij A_m(t) of an assembled drive.
HamiltonianFn h_eff_flux(const DriveSpec& drive);

/// Effective transmon Hamiltonian: generalised Stark shifts of levels 0..2
/// (referenced to level 0), phase-rate terms and the anharmonic two-photon pump.
HamiltonianFn h_eff_transmon(const DeviceModel& device, const DriveSpec& drive,
                             PumpPrefactor prefactor = PumpPrefactor::half, StarkSum sum = StarkSum::all);

/// Diagonal part of an effective Hamiltonian relative to level 0 (levels 1 and 2).
struct ResidualDetunings {
  double delta = 0.0;
  double delta_p = 0.0;
};
ResidualDetunings residual_detunings(const HamiltonianFn& h_eff, double t);

}  // namespace stirap
