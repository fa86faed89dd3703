#include "stirap/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace stirap {

std::string to_string(Frame f) {
  switch (f) {
    case Frame::lab: return "lab";
    case Frame::interaction: return "interaction";
    case Frame::rotating: return "rotating";
  }
  return "?";
}

CMatrix h_lambda(const LambdaParams& p) {
  CMatrix h = CMatrix::Zero(3, 3);
  h(0, 2) = 0.5 * p.Omega_p;
  h(1, 2) = 0.5 * p.Omega_s;
  h(2, 0) = std::conj(h(0, 2));
  h(2, 1) = std::conj(h(1, 2));
  h(1, 1) = p.delta;
  h(2, 2) = p.delta_p;
  return h;
}

CVector dark_state(cplx Omega_p, cplx Omega_s) {
  const double n = std::sqrt(std::norm(Omega_p) + std::norm(Omega_s));
  if (n == 0.0) throw ConfigError("dark_state", "undefined when both couplings vanish");
  CVector d(3);
  d << std::conj(Omega_s) / n, -std::conj(Omega_p) / n, 0.0;
  return d;
}

namespace {

double max_chirp_rate(const DriveSpec& drive) {
  const auto& c = drive.chirp;
  if (c.is_zero()) return 0.0;
  if (c.is_gaussian()) return std::max(std::abs(c.peak_p2_rate()), std::abs(c.peak_s_rate()));
  return slow_modulation_ratio(c, drive.params) * std::abs(drive.params.delta2);
}

double tone_offset(const DriveSpec& drive, ToneLabel l, const DeviceModel& device, int i, int j) {
  return drive.tone(l).carrier - device.omega(i, j);
}

}  // namespace

HamiltonianFn rwa_hamiltonian(const DeviceModel& device, const DriveSpec& drive, const std::vector<RwaTerm>& terms,
                              int dimension) {
  struct Term {
    int i, j;
    ToneLabel tone;
    cplx coupling;
    double nu;
  };
  std::vector<Term> ts;
  double fmax = 0.0;
  for (const auto& r : terms) {
    if (r.i >= r.j || r.j >= dimension || r.j >= device.n_levels)
      throw ConfigError("model", "RWA term references a level outside the model");
    const double nu = tone_offset(drive, r.tone, device, r.i, r.j);
    ts.push_back({r.i, r.j, r.tone, device.Q(r.i, r.j), nu});
    fmax = std::max(fmax, std::abs(nu));
  }
  HamiltonianFn h;
  h.dimension = dimension;
  h.frame = Frame::interaction;
  h.max_frequency = fmax + max_chirp_rate(drive);
  h.eval = [ts = std::move(ts), drive, dimension](double t) {
    CMatrix m = CMatrix::Zero(dimension, dimension);
    for (const auto& term : ts) {
      const double a = drive.envelope(term.tone, t);
      if (a == 0.0) continue;
      const cplx v = 0.5 * term.coupling * a * std::polar(1.0, term.nu * t - drive.phase(term.tone, t));
      m(term.i, term.j) += v;
      m(term.j, term.i) += std::conj(v);
    }
    return m;
  };
  return h;
}

HamiltonianFn h3_interaction(const DeviceModel& device, const DriveSpec& drive) {
  return rwa_hamiltonian(device, drive, {{0, 1, ToneLabel::p1}, {1, 2, ToneLabel::p2}, {1, 2, ToneLabel::s}}, 3);
}

HamiltonianFn h_tilde_transmon(const DeviceModel& device, const DriveSpec& drive) {
  if (device.n_levels < 4) throw ConfigError("device.n_levels", "stray transmon terms need four levels");
  return rwa_hamiltonian(device, drive,
                         {{1, 2, ToneLabel::p1}, {2, 3, ToneLabel::p1}, {0, 1, ToneLabel::p2}, {2, 3, ToneLabel::p2}},
                         4);
}

HamiltonianFn add(const HamiltonianFn& a, const HamiltonianFn& b) {
  if (a.frame != b.frame) throw ConfigError("model", "cannot add Hamiltonians in different frames");
  HamiltonianFn h;
  h.dimension = std::max(a.dimension, b.dimension);
  h.frame = a.frame;
  h.max_frequency = std::max(a.max_frequency, b.max_frequency);
  h.eval = [a, b, n = h.dimension](double t) {
    CMatrix m = CMatrix::Zero(n, n);
    m.topLeftCorner(a.dimension, a.dimension) += a.eval(t);
    m.topLeftCorner(b.dimension, b.dimension) += b.eval(t);
    return m;
  };
  return h;
}

HamiltonianFn rwa_model(const DeviceModel& device, const DriveSpec& drive, bool include_stray_terms) {
  HamiltonianFn h3 = h3_interaction(device, drive);
  if (!include_stray_terms) return h3;
  return add(h3, h_tilde_transmon(device, drive));
}

HamiltonianFn full_device_hamiltonian(const DeviceModel& device, const DriveSpec& drive, Frame frame) {
  const int n = device.n_levels;
  const RVector e = device.energies.array() - device.energies(0);
  const CMatrix q = device.coupling;
  double qmax = q.cwiseAbs().maxCoeff();
  double carrier_max = 0.0;
  for (const auto& tone : drive.tones) carrier_max = std::max(carrier_max, std::abs(tone.carrier));

  HamiltonianFn h;
  h.dimension = n;
  h.frame = frame;
  if (frame == Frame::lab) {
    h.max_frequency = (e.maxCoeff() - e.minCoeff()) + carrier_max;
    h.eval = [e, q, drive](double t) {
      CMatrix m = q * drive.field(t);
      m.diagonal() += e.cast<cplx>();
      return m;
    };
  } else if (frame == Frame::interaction) {
    double wmax = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::abs(q(i, j)) > 1e-12 * qmax) wmax = std::max(wmax, std::abs(e(j) - e(i)));
    h.max_frequency = wmax + carrier_max + max_chirp_rate(drive);
    h.eval = [e, q, drive, n](double t) {
      CVector p(n);
      for (int i = 0; i < n; ++i) p(i) = std::polar(1.0, e(i) * t);
      CMatrix m = (p.asDiagonal() * q * p.conjugate().asDiagonal()) * drive.field(t);
      return m;
    };
  } else {
    throw ConfigError("model.frame", "the full device Hamiltonian is defined in the lab or interaction frame");
  }
  return h;
}

CMatrix to_rotating_frame(const CMatrix& m, const DriveSpec& drive, double t) {
  const auto& p = drive.params;
  const double th2 = drive.chirp.phi_p2(t) + p.delta_p * t;
  const double ths = drive.chirp.phi_s(t) + p.delta_s * t;
  const double th2_dot = drive.chirp.phi_p2_dot(t) + p.delta_p;
  const double ths_dot = drive.chirp.phi_s_dot(t) + p.delta_s;
  CVector v = CVector::Ones(m.rows());
  v(1) = std::polar(1.0, th2 - ths);
  v(2) = std::polar(1.0, th2);
  CMatrix r = v.conjugate().asDiagonal() * m * v.asDiagonal();
  r(1, 1) += th2_dot - ths_dot;
  r(2, 2) += th2_dot;
  return r;
}

HamiltonianFn to_rotating_frame(const HamiltonianFn& interaction, const DriveSpec& drive) {
  if (interaction.frame != Frame::interaction)
    throw ConfigError("model.frame", "rotating-frame transform expects an interaction-picture Hamiltonian");
  if (interaction.dimension < 3) throw ConfigError("model", "rotating frame needs at least three levels");
  HamiltonianFn h;
  h.dimension = interaction.dimension;
  h.frame = Frame::rotating;
  h.max_frequency = interaction.max_frequency;
  h.eval = [interaction, drive](double t) { return to_rotating_frame(interaction.eval(t), drive, t); };
  return h;
}

// --- Magnus ------------------------------------------------------------------

MagnusWindow MagnusWindow::with_width(const DriveSpec& drive, double delta_t) {
  if (!(delta_t > 0.0)) throw ConfigError("magnus.delta_t", "must be positive");
  const auto& p = drive.params;
  MagnusWindow w;
  w.delta_t = delta_t;
  w.fast_ok = delta_t * std::abs(p.delta2) >= 10.0;
  w.rabi_ok = delta_t * p.pump_peak() <= 0.1;
  w.envelope_ok = delta_t / p.T <= 0.1;
  w.chirp_ok = delta_t * max_chirp_rate(drive) <= 0.1;
  return w;
}

MagnusWindow MagnusWindow::for_drive(const DriveSpec& drive) {
  return with_width(drive, kTwoPi * 2.0 / std::abs(drive.params.delta2));
}

MagnusWindow MagnusWindow::smooth_for_drive(const DriveSpec& drive) {
  MagnusWindow w = with_width(drive, kTwoPi * 8.0 / std::abs(drive.params.delta2));
  w.weight = MagnusWeight::smooth;
  return w;
}

namespace {

constexpr int kGaussOrder = 8;

struct PanelRule {
  RVector x;  // nodes on [-1, 1]
  RVector w;
  RMatrix S;  // S(k, l) = int_{-1}^{x_k} l_l(x) dx
};

const PanelRule& panel_rule() {
  static const PanelRule rule = [] {
    const int n = kGaussOrder;
    RMatrix J = RMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double b = k / std::sqrt(4.0 * k * k - 1.0);
      J(k, k - 1) = b;
      J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(J);
    PanelRule r;
    r.x = es.eigenvalues();
    r.w = 2.0 * es.eigenvectors().row(0).array().square().transpose();
    RMatrix V(n, n), P(n, n);
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) {
        V(k, m) = std::pow(r.x(k), m);
        P(k, m) = (std::pow(r.x(k), m + 1) - std::pow(-1.0, m + 1)) / (m + 1);
      }
    r.S = P * V.inverse();
    return r;
  }();
  return rule;
}

CMatrix magnus_window(const HamiltonianFn& h, double a, double b, int panels) {
  const auto& rule = panel_rule();
  const int n = h.dimension;
  const double width = (b - a) / panels;
  const double half = 0.5 * width;
  CMatrix m1 = CMatrix::Zero(n, n);
  CMatrix m2 = CMatrix::Zero(n, n);
  CMatrix k_start = CMatrix::Zero(n, n);
  std::vector<CMatrix> hk(kGaussOrder);
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * width;
    for (int k = 0; k < kGaussOrder; ++k) hk[k] = h.eval(c + half * rule.x(k));
    for (int k = 0; k < kGaussOrder; ++k) {
      CMatrix kk = k_start;
      for (int l = 0; l < kGaussOrder; ++l) kk += (half * rule.S(k, l)) * hk[l];
      m2 += (half * rule.w(k)) * (hk[k] * kk - kk * hk[k]);
    }
    for (int k = 0; k < kGaussOrder; ++k) {
      m1 += (half * rule.w(k)) * hk[k];
      k_start += (half * rule.w(k)) * hk[k];
    }
  }
  const double dt = b - a;
  return m1 / dt + (cplx(0.0, -0.5) / dt) * m2;
}

CMatrix magnus_converged(const HamiltonianFn& h, double a, double b, double tol) {
  const double dt = b - a;
  const double periods = h.max_frequency * dt / kTwoPi;
  // Three panels of eight nodes per fastest period.
  int panels = std::max(4, static_cast<int>(std::ceil(3.0 * periods)));
  CMatrix prev = magnus_window(h, a, b, panels);
  for (int it = 0; it < 8; ++it) {
    panels *= 2;
    CMatrix next = magnus_window(h, a, b, panels);
    const double diff = (next - prev).cwiseAbs().maxCoeff();
    if (diff <= tol) return next;
    prev = std::move(next);
  }
  std::ostringstream os;
  os << "Magnus quadrature did not converge on [" << a << ", " << b << "]";
  throw NumericalError(os.str());
}

// Samples per fastest period for the filtered average.
constexpr double kSmoothSamples = 32.0;

CMatrix smooth_average(const HamiltonianFn& h, double t, double width) {
  const double fastest = std::max(h.max_frequency, kTwoPi / width);
  const int m = static_cast<int>(std::ceil(0.5 * width * fastest * kSmoothSamples / kTwoPi));
  const double step = 0.5 * width / m;
  const int taps = 2 * m + 1;
  std::vector<double> w(taps);
  for (int k = 0; k < taps; ++k) {
    const double x = kTwoPi * k / (taps - 1);
    w[k] = 0.35875 - 0.48829 * std::cos(x) + 0.14128 * std::cos(2.0 * x) - 0.01168 * std::cos(3.0 * x);
  }
  const double norm = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= norm;

  // Nodes on [t - 3 width / 2, t + 3 width / 2]; index 3m is t.
  const int n_nodes = 6 * m + 1;
  const int n = h.dimension;
  const CMatrix zero = CMatrix::Zero(n, n);
  auto filter = [&](const std::vector<CMatrix>& f, int i) {
    CMatrix acc = zero;
    for (int k = 0; k < taps; ++k) acc += w[k] * f[i - m + k];
    return acc;
  };

  std::vector<CMatrix> H(n_nodes), fast(n_nodes, zero), integral(n_nodes, zero);
  for (int i = 0; i < n_nodes; ++i) H[i] = h.eval(t + (i - 3 * m) * step);
  const int lo = m, hi = n_nodes - 1 - m;
  for (int i = lo; i <= hi; ++i) fast[i] = H[i] - filter(H, i);
  for (int i = lo + 1; i <= hi; ++i) {
    if (i - 2 >= lo && i + 1 <= hi)
      integral[i] = integral[i - 1] + (step / 24.0) * (13.0 * (fast[i - 1] + fast[i]) - fast[i - 2] - fast[i + 1]);
    else
      integral[i] = integral[i - 1] + (0.5 * step) * (fast[i - 1] + fast[i]);
  }
  std::vector<CMatrix> second(n_nodes, zero);
  for (int i = 2 * m; i <= 4 * m; ++i) {
    const CMatrix g = integral[i] - filter(integral, i);
    second[i] = cplx(0.0, -0.5) * (fast[i] * g - g * fast[i]);
  }
  const CMatrix r = (H[3 * m] - fast[3 * m]) + filter(second, 3 * m);
  return 0.5 * (r + r.adjoint());
}

}  // namespace

CMatrix magnus_average(const HamiltonianFn& h, double t, const MagnusWindow& window) {
  if (!window.usable())
    throw ConfigError("magnus.delta_t", "window violates delta_t |delta2| >= 10 or delta_t / T <= 0.1");
  const double dt = window.delta_t;
  if (window.weight == MagnusWeight::smooth) return smooth_average(h, t, dt);
  if (window.shift_samples <= 0) return magnus_converged(h, t - 0.5 * dt, t + 0.5 * dt, window.abs_tolerance);
  CMatrix acc = CMatrix::Zero(h.dimension, h.dimension);
  const int ns = window.shift_samples;
  for (int k = 0; k < ns; ++k) {
    const double c = t + dt * ((k + 0.5) / ns - 0.5);
    acc += magnus_converged(h, c - 0.5 * dt, c + 0.5 * dt, window.abs_tolerance);
  }
  acc /= static_cast<double>(ns);
  return 0.5 * (acc + acc.adjoint());
}

CMatrix magnus_effective(const HamiltonianFn& interaction, const DriveSpec& drive, double t,
                         const MagnusWindow& window) {
  if (interaction.frame != Frame::interaction)
    throw ConfigError("model.frame", "Magnus comparison expects an interaction-picture Hamiltonian");
  CMatrix m = to_rotating_frame(magnus_average(interaction, t, window), drive, t);
  m -= m(0, 0) * CMatrix::Identity(m.rows(), m.cols());
  return m;
}

// --- closed-form effective Hamiltonians --------------------------------------

namespace {

CMatrix effective_lambda(cplx omega_p, cplx omega_s, double diag1, double diag2) {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 2) = 0.5 * omega_p;
  m(1, 2) = 0.5 * omega_s;
  m(2, 0) = std::conj(m(0, 2));
  m(2, 1) = std::conj(m(1, 2));
  m(1, 1) = diag1;
  m(2, 2) = diag2;
  return m;
}

HamiltonianFn rotating3(std::function<CMatrix(double)> f) {
  HamiltonianFn h;
  h.dimension = 3;
  h.frame = Frame::rotating;
  h.max_frequency = 0.0;
  h.eval = std::move(f);
  return h;
}

}  // namespace

HamiltonianFn h_eff_flux(const PulseParams& params, const ChirpLaw& chirp) {
  params.validate();
  return rotating3([params, chirp](double t) {
    const Envelopes e = gaussian_envelopes(params, t);
    const auto s = stark_shifts_flux(params, t);
    const double omega_p = -e.p1 * e.p2 / (2.0 * params.delta2);
    const double delta = params.delta_p - params.delta_s;
    const double d1 = chirp.phi_p2_dot(t) - chirp.phi_s_dot(t) - (s.S2 + 2.0 * s.S1) + delta;
    const double d2 = chirp.phi_p2_dot(t) + s.S2 - s.S1 + params.delta_p;
    return effective_lambda(omega_p, e.s, d1, d2);
  });
}

HamiltonianFn h_eff_flux(const DriveSpec& drive) {
  return rotating3([drive](double t) {
    const auto& p = drive.params;
    const cplx w1 = drive.rabi(ToneLabel::p1, t);
    const cplx w2 = drive.rabi(ToneLabel::p2, t);
    const cplx ws = drive.rabi(ToneLabel::s, t);
    const double s1 = -std::norm(w1) / (4.0 * p.delta2);
    const double s2 = -std::norm(w2) / (4.0 * p.delta2);
    const cplx omega_p = -w1 * w2 / (2.0 * p.delta2);
    const double delta = p.delta_p - p.delta_s;
    const double d1 = drive.chirp.phi_p2_dot(t) - drive.chirp.phi_s_dot(t) - (s2 + 2.0 * s1) + delta;
    const double d2 = drive.chirp.phi_p2_dot(t) + s2 - s1 + p.delta_p;
    return effective_lambda(omega_p, ws, d1, d2);
  });
}

HamiltonianFn h_eff_transmon(const DeviceModel& device, const DriveSpec& drive, PumpPrefactor prefactor,
                             StarkSum sum) {
  const auto& p = drive.params;
  const double alpha = device.anharmonicity_alpha;
  if (std::abs(alpha + p.delta2) < 1e-9 * std::abs(p.delta2))
    throw ConfigError("pulses.delta2", "delta2 = -alpha is a pole of the transmon pump law");
  const auto shifts = transmon_stark_shifts(device, p, sum).level_shift_peak;
  const double c = prefactor == PumpPrefactor::half ? 2.0 : 4.0;
  return rotating3([drive, shifts, alpha, c](double t) {
    const auto& p = drive.params;
    const double g = pump_profile(p, t);
    const cplx w1 = drive.rabi(ToneLabel::p1, t);
    const cplx w2 = drive.rabi(ToneLabel::p2, t);
    const cplx ws = drive.rabi(ToneLabel::s, t);
    const cplx omega_p = -(w1 * w2 / (c * p.delta2)) * (alpha / (alpha + p.delta2));
    const double delta = p.delta_p - p.delta_s;
    const double d1 =
        (shifts[1] - shifts[0]) * g + drive.chirp.phi_p2_dot(t) - drive.chirp.phi_s_dot(t) + delta;
    const double d2 = (shifts[2] - shifts[0]) * g + drive.chirp.phi_p2_dot(t) + p.delta_p;
    return effective_lambda(omega_p, ws, d1, d2);
  });
}

ResidualDetunings residual_detunings(const HamiltonianFn& h_eff, double t) {
  const CMatrix m = h_eff.eval(t);
  return {std::real(m(1, 1) - m(0, 0)), std::real(m(2, 2) - m(0, 0))};
}

}  // namespace stirap
