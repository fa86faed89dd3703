#include "stirap/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stirap/quadrature.hpp"

namespace stirap {

PulseParams PulseParams::with_default_delay(double Omega0, double Omega_r, double delta2, double T) {
  PulseParams p;
  p.Omega0 = Omega0;
  p.Omega_r = Omega_r;
  p.delta2 = delta2;
  p.T = T;
  p.tau = 0.6 * T;
  return p;
}

void PulseParams::validate() const {
  if (!(T > 0.0)) throw ConfigError("pulses.T", "must be positive");
  if (!(Omega0 >= 0.0)) throw ConfigError("pulses.Omega0", "must be non-negative");
  if (!(Omega_r >= 0.0)) throw ConfigError("pulses.Omega_r", "must be non-negative");
  if (!(r_ratio > 0.0)) throw ConfigError("pulses.r_ratio", "must be positive");
  if (delta2 == 0.0) throw ConfigError("pulses.delta2", "two-photon pump needs a nonzero intermediate detuning");
  if (Omega_r > 0.0 && std::abs(delta2) / pump_peak() <= 1.0)
    throw ConfigError("pulses.delta2", "|delta2| / Omega_r must exceed 1 (dispersive pump)");
}

std::vector<std::string> PulseParams::warnings() const {
  std::vector<std::string> w;
  if (Omega_r > 0.0 && std::abs(delta2) / pump_peak() < 3.0)
    w.push_back("weakly dispersive pump: |delta2| / Omega_r < 3");
  const double eff = effective_pump_flux_peak(*this);
  if (Omega0 > 0.0 && std::min(eff, Omega0) * T < 10.0)
    w.push_back("adiabaticity figure Omega0 T below 10");
  return w;
}

double PulseParams::pump_peak() const { return Omega_r * std::sqrt(r_ratio); }

Envelopes gaussian_envelopes(const PulseParams& p, double t) {
  const double xs = (t + p.tau) / p.T;
  const double xp = (t - p.tau) / p.T;
  Envelopes e;
  e.s = p.Omega0 * std::exp(-xs * xs);
  e.p1 = p.pump_peak() * std::exp(-0.5 * xp * xp);
  e.p2 = e.p1;
  return e;
}

StarkPair stark_shifts_flux(const PulseParams& p, double t) {
  if (p.delta2 == 0.0) throw ConfigError("pulses.delta2", "Stark shift undefined at zero detuning");
  const Envelopes e = gaussian_envelopes(p, t);
  return {-e.p1 * e.p1 / (4.0 * p.delta2), -e.p2 * e.p2 / (4.0 * p.delta2)};
}

double effective_pump_flux(const PulseParams& p, double t) {
  const Envelopes e = gaussian_envelopes(p, t);
  return -e.p1 * e.p2 / (2.0 * p.delta2);
}

double effective_pump_flux_peak(const PulseParams& p) {
  const double a = p.pump_peak();
  return a * a / (2.0 * std::abs(p.delta2));
}

std::string to_string(PumpPrefactor p) { return p == PumpPrefactor::half ? "half" : "quarter"; }

PumpPrefactor parse_pump_prefactor(const std::string& s) {
  if (s == "half") return PumpPrefactor::half;
  if (s == "quarter") return PumpPrefactor::quarter;
  throw ConfigError("pulses.pump_prefactor", "expected 'half' or 'quarter', got '" + s + "'");
}

namespace {
double prefactor_value(PumpPrefactor p) { return p == PumpPrefactor::half ? 2.0 : 4.0; }

void check_pole(double alpha, double delta2) {
  if (std::abs(alpha + delta2) < 1e-9 * std::max(std::abs(alpha), std::abs(delta2)))
    throw ConfigError("pulses.delta2", "delta2 = -alpha is a pole of the transmon pump law");
}
}  // namespace

double effective_pump_transmon(const PulseParams& p, double alpha, double t, PumpPrefactor prefactor) {
  check_pole(alpha, p.delta2);
  const Envelopes e = gaussian_envelopes(p, t);
  return -(e.p1 * e.p2 / (prefactor_value(prefactor) * p.delta2)) * alpha / (alpha + p.delta2);
}

double effective_pump_transmon_peak(const PulseParams& p, double alpha, PumpPrefactor prefactor) {
  return std::abs(effective_pump_transmon(p, alpha, p.tau, prefactor));
}

double stark_shift_general(double A_pk, cplx Q_ij, double omega_ij, double omega_pk, double A_peak) {
  const double peak = A_peak < 0.0 ? std::abs(A_pk) : A_peak;
  const double rabi = peak * std::abs(Q_ij);
  const double d_minus = omega_ij - omega_pk;
  const double d_plus = omega_ij + omega_pk;
  if (rabi > 0.0 && (std::abs(d_minus) <= kResonanceGuard * rabi || std::abs(d_plus) <= kResonanceGuard * rabi)) {
    std::ostringstream os;
    os << "Stark shift near resonance: |omega_ij -/+ omega_pk| = " << std::min(std::abs(d_minus), std::abs(d_plus))
       << " rad/us is not above the peak Rabi frequency " << rabi;
    throw NumericalError(os.str());
  }
  if (A_pk == 0.0 || Q_ij == 0.0) return 0.0;
  const double g = std::abs(A_pk * Q_ij) / 2.0;
  return g * g * (1.0 / d_minus + 1.0 / d_plus);
}

// --- ChirpLaw ---------------------------------------------------------------

struct ChirpLaw::Table {
  std::function<double(double)> rate_p2;
  std::function<double(double)> rate_s;
  double t0 = 0.0, t1 = 0.0, h = 0.0;
  std::vector<double> cum_p2, cum_s;

  double eval(const std::vector<double>& cum, const std::function<double(double)>& rate, double t) const {
    if (t <= t0) return 0.0;
    if (t >= t1) return cum.back();
    const double u = (t - t0) / h;
    std::size_t k = std::min(static_cast<std::size_t>(u), cum.size() - 2);
    const double a = t0 + k * h;
    const double s = (t - a) / h;
    // Cubic Hermite on the primitive with the exact rates as end-point slopes.
    const double y0 = cum[k], y1 = cum[k + 1];
    const double m0 = rate(a) * h, m1 = rate(a + h) * h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
  }
};

ChirpLaw::ChirpLaw() = default;

ChirpLaw ChirpLaw::zero() { return ChirpLaw(); }

ChirpLaw ChirpLaw::gaussian(double c_p2, double c_s, double center, double width) {
  if (!(width > 0.0)) throw ConfigError("chirp.width", "must be positive");
  ChirpLaw c;
  c.kind_ = Kind::gaussian;
  c.c_p2_ = c_p2;
  c.c_s_ = c_s;
  c.center_ = center;
  c.width_ = width;
  return c;
}

ChirpLaw ChirpLaw::tabulated(std::function<double(double)> rate_p2, std::function<double(double)> rate_s, double t0,
                             double t1, int n_nodes) {
  if (!(t1 > t0) || n_nodes < 2) throw ConfigError("chirp.table", "needs t1 > t0 and at least two nodes");
  auto tab = std::make_shared<Table>();
  tab->rate_p2 = std::move(rate_p2);
  tab->rate_s = std::move(rate_s);
  tab->t0 = t0;
  tab->t1 = t1;
  tab->h = (t1 - t0) / (n_nodes - 1);
  tab->cum_p2.assign(n_nodes, 0.0);
  tab->cum_s.assign(n_nodes, 0.0);
  for (int k = 1; k < n_nodes; ++k) {
    const double a = t0 + (k - 1) * tab->h;
    const double b = t0 + k * tab->h;
    auto qp = integrate_adaptive(tab->rate_p2, a, b, 1e-14, 1e-13);
    auto qs = integrate_adaptive(tab->rate_s, a, b, 1e-14, 1e-13);
    if (!qp.converged || !qs.converged) throw NumericalError("chirp quadrature did not converge");
    tab->cum_p2[k] = tab->cum_p2[k - 1] + qp.value;
    tab->cum_s[k] = tab->cum_s[k - 1] + qs.value;
  }
  ChirpLaw c;
  c.kind_ = Kind::tabulated;
  c.table_ = std::move(tab);
  return c;
}

double ChirpLaw::phi_p2_dot(double t) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::gaussian: {
      const double x = (t - center_) / width_;
      return c_p2_ * std::exp(-x * x);
    }
    case Kind::tabulated: return table_->rate_p2(t);
  }
  return 0.0;
}

double ChirpLaw::phi_s_dot(double t) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::gaussian: {
      const double x = (t - center_) / width_;
      return c_s_ * std::exp(-x * x);
    }
    case Kind::tabulated: return table_->rate_s(t);
  }
  return 0.0;
}

namespace {
// integral_{-inf}^{t} exp(-((u - c)/w)^2) du
double gaussian_primitive(double t, double c, double w) {
  return 0.5 * std::sqrt(kPi) * w * (1.0 + std::erf((t - c) / w));
}
}  // namespace

double ChirpLaw::phi_p2(double t) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::gaussian: return c_p2_ * gaussian_primitive(t, center_, width_);
    case Kind::tabulated: return table_->eval(table_->cum_p2, table_->rate_p2, t);
  }
  return 0.0;
}

double ChirpLaw::phi_s(double t) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::gaussian: return c_s_ * gaussian_primitive(t, center_, width_);
    case Kind::tabulated: return table_->eval(table_->cum_s, table_->rate_s, t);
  }
  return 0.0;
}

ChirpLaw chirp_flux(const PulseParams& p) {
  p.validate();
  // Both tones share the pump profile, so S_k(t) = s_k g(t).
  const double a1 = p.pump_peak();
  const double a2 = p.pump_peak();
  const double s1 = -a1 * a1 / (4.0 * p.delta2);
  const double s2 = -a2 * a2 / (4.0 * p.delta2);
  return ChirpLaw::gaussian(s1 - s2, -(s1 + 2.0 * s2), p.tau, p.T);
}

std::array<double, 3> carrier_frequencies(const DeviceModel& device, const PulseParams& p) {
  if (device.n_levels < 3) throw ConfigError("device.n_levels", "the drive needs at least three levels");
  return {device.omega(0, 1) - p.delta2, device.omega(1, 2) - p.delta_p + p.delta2, device.omega(1, 2) - p.delta_s};
}

TransmonShifts transmon_stark_shifts(const DeviceModel& device, const PulseParams& p, StarkSum sum) {
  p.validate();
  const auto carriers = carrier_frequencies(device, p);
  const double q01 = std::abs(device.Q(0, 1));
  const double q12 = std::abs(device.Q(1, 2));
  if (q01 == 0.0 || q12 == 0.0) throw ConfigError("device", "vanishing Q_01 or Q_12");
  const std::array<double, 2> amp = {p.pump_peak() / q01, p.pump_peak() / q12};
  const std::array<double, 2> freq = {carriers[0], carriers[1]};

  TransmonShifts out;
  for (int i = 0; i < 3; ++i) {
    double acc = 0.0;
    for (int k = 0; k < 2; ++k) {
      for (int j = 0; j < device.n_levels; ++j) {
        if (j == i) continue;
        // S^k_{ji}: level i shifted by level j, omega_ji = E_i - E_j.
        const double full = stark_shift_general(amp[k], device.Q(j, i), device.omega(j, i), freq[k]);
        if (sum == StarkSum::all) {
          acc += full;
        } else if (std::abs(i - j) == 1) {
          const double g = std::abs(amp[k] * device.Q(j, i)) / 2.0;
          const double d_minus = device.omega(j, i) - freq[k];
          const double d_plus = device.omega(j, i) + freq[k];
          acc += g * g / (std::abs(d_minus) < std::abs(d_plus) ? d_minus : d_plus);
        }
      }
    }
    out.level_shift_peak[i] = acc;
  }
  return out;
}

ChirpLaw chirp_transmon(const DeviceModel& device, const PulseParams& p) {
  if (device.n_levels < 4) throw ConfigError("device.n_levels", "transmon chirp needs at least four levels");
  const auto d = transmon_stark_shifts(device, p).level_shift_peak;
  return ChirpLaw::gaussian(d[0] - d[2], d[1] - d[2], p.tau, p.T);
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::flux_chirp: return "flux-chirp";
    case Scheme::transmon_chirp: return "transmon-chirp";
    case Scheme::no_chirp: return "no-chirp";
  }
  return "?";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "flux-chirp") return Scheme::flux_chirp;
  if (s == "transmon-chirp") return Scheme::transmon_chirp;
  if (s == "no-chirp") return Scheme::no_chirp;
  throw ConfigError("scheme", "expected flux-chirp, transmon-chirp or no-chirp, got '" + s + "'");
}

double DriveSpec::envelope(ToneLabel l, double t) const {
  const double a = tone(l).amplitude_peak;
  if (l == ToneLabel::s) {
    const double x = (t + params.tau) / params.T;
    return a * std::exp(-x * x);
  }
  const double x = (t - params.tau) / params.T;
  return a * std::exp(-0.5 * x * x);
}

double DriveSpec::phase(ToneLabel l, double t) const {
  switch (l) {
    case ToneLabel::p1: return 0.0;
    case ToneLabel::p2: return chirp.phi_p2(t);
    case ToneLabel::s: return chirp.phi_s(t);
  }
  return 0.0;
}

double DriveSpec::phase_rate(ToneLabel l, double t) const {
  switch (l) {
    case ToneLabel::p1: return 0.0;
    case ToneLabel::p2: return chirp.phi_p2_dot(t);
    case ToneLabel::s: return chirp.phi_s_dot(t);
  }
  return 0.0;
}

double DriveSpec::field(double t) const {
  const double g_p = [&] {
    const double x = (t - params.tau) / params.T;
    return std::exp(-0.5 * x * x);
  }();
  const double g_s = [&] {
    const double x = (t + params.tau) / params.T;
    return std::exp(-x * x);
  }();
  const auto& p1 = tones[0];
  const auto& p2 = tones[1];
  const auto& s = tones[2];
  return p1.amplitude_peak * g_p * std::cos(p1.carrier * t) +
         p2.amplitude_peak * g_p * std::cos(p2.carrier * t - chirp.phi_p2(t)) +
         s.amplitude_peak * g_s * std::cos(s.carrier * t - chirp.phi_s(t));
}

DriveSpec assemble_drive(const DeviceModel& device, const PulseParams& p, const ChirpLaw& chirp, Scheme scheme) {
  p.validate();
  const auto carriers = carrier_frequencies(device, p);
  const cplx q01 = device.Q(0, 1);
  const cplx q12 = device.Q(1, 2);
  if (std::abs(q01) == 0.0) throw ConfigError("device", "vanishing matrix element Q_01");
  if (std::abs(q12) == 0.0) throw ConfigError("device", "vanishing matrix element Q_12");

  DriveSpec d;
  d.params = p;
  d.chirp = chirp;
  d.scheme = scheme;
  d.tones[0] = {ToneLabel::p1, p.pump_peak() / std::abs(q01), carriers[0], q01};
  d.tones[1] = {ToneLabel::p2, p.pump_peak() / std::abs(q12), carriers[1], q12};
  d.tones[2] = {ToneLabel::s, p.Omega0 / std::abs(q12), carriers[2], q12};
  return d;
}

ChirpLaw chirp_for_scheme(Scheme scheme, const DeviceModel& device, const PulseParams& p) {
  switch (scheme) {
    case Scheme::flux_chirp: return chirp_flux(p);
    case Scheme::transmon_chirp: return chirp_transmon(device, p);
    case Scheme::no_chirp: return ChirpLaw::zero();
  }
  return ChirpLaw::zero();
}

double slow_modulation_ratio(const ChirpLaw& chirp, const PulseParams& p) {
  if (chirp.is_gaussian())
    return std::max(std::abs(chirp.peak_p2_rate()), std::abs(chirp.peak_s_rate())) / std::abs(p.delta2);
  double m = 0.0;
  const double t0 = -(p.tau + 6.0 * p.T), t1 = p.tau + 6.0 * p.T;
  for (int k = 0; k <= 2000; ++k) {
    const double t = t0 + (t1 - t0) * k / 2000.0;
    m = std::max({m, std::abs(chirp.phi_p2_dot(t)), std::abs(chirp.phi_s_dot(t))});
  }
  return m / std::abs(p.delta2);
}

double solve_pump_amplitude_flux(double target_peak, double delta2_over_omega_r) {
  if (!(target_peak > 0.0)) throw ConfigError("pulses.Omega0", "target pump must be positive");
  if (std::abs(delta2_over_omega_r) <= 1.0) throw ConfigError("pulses.delta2_over_omega_r", "must exceed 1 in magnitude");
  return 2.0 * std::abs(delta2_over_omega_r) * target_peak;
}

double solve_pump_amplitude_transmon(double target_peak, double delta2_over_omega_r, double alpha,
                                     PumpPrefactor prefactor) {
  if (!(target_peak > 0.0)) throw ConfigError("pulses.Omega0", "target pump must be positive");
  const double rho = delta2_over_omega_r;
  const double c = prefactor_value(prefactor);
  // t = -(x / (c rho)) alpha / (alpha + rho x) is linear in x once cleared of denominators.
  for (double t : {target_peak, -target_peak}) {
    const double denom = t * c * rho * rho + alpha;
    if (denom == 0.0) continue;
    const double x = -t * c * rho * alpha / denom;
    if (x > 0.0 && std::isfinite(x)) return x;
  }
  throw ConfigError("pulses.Omega0", "target effective pump exceeds the saturation value of the transmon law");
}

}  // namespace stirap
