#pragma once

// Three-tone "2+1" drive: Gaussian envelopes, Stark shifts, effective
// two-photon pump, phase-modulation laws and carrier assignment.

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stirap/common.hpp"
#include "stirap/device.hpp"

namespace stirap {

struct PulseParams {
  double Omega0 = 0.0;   // Stokes peak Rabi frequency, rad/us
  double Omega_r = 0.0;  // peak Rabi frequency of each pump tone (at r = 1), rad/us
  double delta2 = 0.0;   // intermediate detuning of the two-photon pump, rad/us
  double T = 0.0;        // pulse width, us
  double tau = 0.0;      // delay, us (Stokes peaks at -tau, pump at +tau)
  double r_ratio = 1.0;  // Max[Omega_p] / Max[Omega_s], applied to the pump tones
  double delta_p = 0.0;  // static one-photon detunings, rad/us
  double delta_s = 0.0;

  /// Default counterintuitive delay tau = 0.6 T.
  static PulseParams with_default_delay(double Omega0, double Omega_r, double delta2, double T);

  void validate() const;
  /// Non-fatal diagnostics (weakly dispersive regime, poor adiabaticity).
  std::vector<std::string> warnings() const;

  /// Peak of each pump tone after the r-ratio rescaling.
  double pump_peak() const;
};

struct Envelopes {
  double s = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

/// Omega_s = Omega0 exp[-((t+tau)/T)^2], Omega_pk = sqrt(r) Omega_r exp[-((t-tau)/T)^2 / 2].
Envelopes gaussian_envelopes(const PulseParams& p, double t);

/// Shape shared by the pump-tone product, every Stark shift and every chirp rate.
inline double pump_profile(const PulseParams& p, double t) {
  const double x = (t - p.tau) / p.T;
  return std::exp(-x * x);
}

struct StarkPair {
  double S1 = 0.0;
  double S2 = 0.0;
};

/// S_k = -Omega_pk^2 / (4 delta2).
StarkPair stark_shifts_flux(const PulseParams& p, double t);

/// Omega_p = -Omega_p1 Omega_p2 / (2 delta2).
double effective_pump_flux(const PulseParams& p, double t);

/// Peak effective pump of the flux scheme, Omega_r^2 r / (2 |delta2|).
double effective_pump_flux_peak(const PulseParams& p);

/// Prefactor of the dispersive two-photon amplitude in the transmon pump law.
/// `quarter` is the -Omega_p1 Omega_p2 / (4 delta2) form; `half` matches the
/// flux-limit amplitude -Omega_p1 Omega_p2 / (2 delta2) and two-path elimination.
enum class PumpPrefactor { half, quarter };

std::string to_string(PumpPrefactor p);
PumpPrefactor parse_pump_prefactor(const std::string& s);

/// Omega_p = -(Omega_p1 Omega_p2 / (c delta2)) alpha / (alpha + delta2), c = 2 or 4.
double effective_pump_transmon(const PulseParams& p, double alpha, double t,
                               PumpPrefactor prefactor = PumpPrefactor::half);
double effective_pump_transmon_peak(const PulseParams& p, double alpha,
                                    PumpPrefactor prefactor = PumpPrefactor::half);

/// Stark shift of level j due to level i under a tone of bare amplitude A:
/// |A Q_ij / 2|^2 [1/(omega_ij - omega_pk) + 1/(omega_ij + omega_pk)].
/// Rejects near-resonant configurations where either denominator is smaller than
/// kResonanceGuard times the peak Rabi frequency |A_peak Q_ij| (the perturbative
/// expansion behind the shift needs a detuning larger than the coupling).
inline constexpr double kResonanceGuard = 1.0;
double stark_shift_general(double A_pk, cplx Q_ij, double omega_ij, double omega_pk,
                           double A_peak = -1.0);

/// Phase modulation phi_p2(t), phi_s(t) with phi(-inf) = 0.
class ChirpLaw {
 public:
  ChirpLaw();

  static ChirpLaw zero();
  /// Rates c_p2 g(t), c_s g(t) with g the pump profile exp[-((t - center)/width)^2];
  /// phases via the error-function primitive.
  static ChirpLaw gaussian(double c_p2, double c_s, double center, double width);
  /// Arbitrary rates, integrated by adaptive quadrature on a table over [t0, t1]
  /// (phases are assumed to start at zero at t0).
  static ChirpLaw tabulated(std::function<double(double)> rate_p2, std::function<double(double)> rate_s,
                            double t0, double t1, int n_nodes = 4001);

  double phi_p2_dot(double t) const;
  double phi_s_dot(double t) const;
  double phi_p2(double t) const;
  double phi_s(double t) const;

  bool is_zero() const { return kind_ == Kind::zero; }
  bool is_gaussian() const { return kind_ == Kind::gaussian; }
  double peak_p2_rate() const { return c_p2_; }
  double peak_s_rate() const { return c_s_; }

 private:
  enum class Kind { zero, gaussian, tabulated };
  struct Table;

  Kind kind_ = Kind::zero;
  double c_p2_ = 0.0, c_s_ = 0.0, center_ = 0.0, width_ = 1.0;
  std::shared_ptr<const Table> table_;
};

/// Flux law: phi_p2' = S1 - S2, phi_s' = -(S1 + 2 S2).
ChirpLaw chirp_flux(const PulseParams& p);

enum class ToneLabel { p1 = 0, p2 = 1, s = 2 };

/// Carrier frequencies omega_p1 = omega_01 - delta2, omega_p2 = omega_12 - delta_p + delta2,
/// omega_s = omega_12 - delta_s.
std::array<double, 3> carrier_frequencies(const DeviceModel& device, const PulseParams& p);

struct TransmonShifts {
  std::array<double, 3> level_shift_peak{};  // sum_k sum_{j != i} S^k_{ji} at the pump peak, levels 0..2
};

/// Which terms enter the transmon Stark sums. `rotating` keeps only the
/// near-resonant denominator of nearest-neighbour transitions, the terms
/// carried by the four-level rotating-wave model.
enum class StarkSum { all, rotating };

/// Peak Stark shifts of levels 0..2 from both pump tones and every level of the device.
TransmonShifts transmon_stark_shifts(const DeviceModel& device, const PulseParams& p,
                                     StarkSum sum = StarkSum::all);

/// Transmon law: phi_p2' = sum_{k,j} (S_j0 - S_j2), phi_s' = sum_{k,j} (S_j1 - S_j2).
ChirpLaw chirp_transmon(const DeviceModel& device, const PulseParams& p);

enum class Scheme { flux_chirp, transmon_chirp, no_chirp };
std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct Tone {
  ToneLabel label;
  double amplitude_peak = 0.0;  // bare field amplitude A at the envelope maximum
  double carrier = 0.0;         // rad/us
  cplx coupling = 0.0;          // Q_ij of the transition it is tuned to
};

/// Control field A(t) = sum_m A_m(t) cos(omega_m t - phi_m(t)).
struct DriveSpec {
  PulseParams params;
  ChirpLaw chirp;
  Scheme scheme = Scheme::flux_chirp;
  std::array<Tone, 3> tones{};  // indexed by ToneLabel

  const Tone& tone(ToneLabel l) const { return tones[static_cast<int>(l)]; }

  double envelope(ToneLabel l, double t) const;  // bare amplitude A_m(t)
  double phase(ToneLabel l, double t) const;     // phi_m(t)
  double phase_rate(ToneLabel l, double t) const;
  /// Rabi frequency Q_ij A_m(t) on the tone's own transition.
  cplx rabi(ToneLabel l, double t) const { return tone(l).coupling * envelope(l, t); }
  /// Total field A(t).
  double field(double t) const;
};

/// Pins carriers and bare amplitudes for a device: A_m = Omega_m / |Q_ij|.
DriveSpec assemble_drive(const DeviceModel& device, const PulseParams& p, const ChirpLaw& chirp, Scheme scheme);

/// Chirp implied by a scheme (zero for no_chirp).
ChirpLaw chirp_for_scheme(Scheme scheme, const DeviceModel& device, const PulseParams& p);

/// max_t |phi_m'(t)| / |delta2| over the pulse window.
double slow_modulation_ratio(const ChirpLaw& chirp, const PulseParams& p);

/// Pump-tone peak needed for a target effective pump peak at fixed delta2 / Omega_r.
double solve_pump_amplitude_flux(double target_peak, double delta2_over_omega_r);
double solve_pump_amplitude_transmon(double target_peak, double delta2_over_omega_r, double alpha,
                                     PumpPrefactor prefactor = PumpPrefactor::half);

}  // namespace stirap
