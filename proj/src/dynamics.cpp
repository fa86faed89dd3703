#include "stirap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "stirap/parallel.hpp"
#include "stirap/rng.hpp"

namespace stirap {

TimeGrid TimeGrid::with_max_step(double t0, double t1, double max_step, long output_points) {
  if (!(t1 > t0)) throw ConfigError("grid", "window end must exceed its start");
  if (!(max_step > 0.0)) throw ConfigError("grid.step_us", "must be positive");
  if (output_points < 1) throw ConfigError("grid.output_points", "must be >= 1");
  TimeGrid g;
  g.t0 = t0;
  g.t1 = t1;
  g.n_steps = std::max<long>(1, static_cast<long>(std::ceil((t1 - t0) / max_step - 1e-9)));
  g.decimation = std::max<long>(1, g.n_steps / output_points);
  return g;
}

void pulse_window(const PulseParams& p, double start_over_T, double end_over_T, double& t0, double& t1) {
  t0 = -(p.tau + start_over_T * p.T);
  t1 = p.tau + end_over_T * p.T;
}

double auto_step(const HamiltonianFn& h, double t0, double t1, double points_per_period) {
  double spread = 0.0;
  const int samples = 401;
  for (int k = 0; k < samples; ++k) {
    const double t = t0 + (t1 - t0) * k / (samples - 1.0);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.eval(t), Eigen::EigenvaluesOnly);
    const RVector& ev = es.eigenvalues();
    spread = std::max(spread, ev.maxCoeff() - ev.minCoeff());
  }
  const double w = std::max(h.max_frequency, spread);
  if (w == 0.0) return t1 - t0;
  return kTwoPi / (points_per_period * w);
}

std::string to_string(Integrator i) { return i == Integrator::midpoint ? "midpoint" : "magnus4"; }

Integrator parse_integrator(const std::string& s) {
  if (s == "midpoint") return Integrator::midpoint;
  if (s == "magnus4") return Integrator::magnus4;
  throw ConfigError("grid.integrator", "expected 'midpoint' or 'magnus4', got '" + s + "'");
}

void DissipatorSpec::validate() const {
  if (!(T1 > 0.0)) throw ConfigError("open_system.T1_us", "must be positive");
  if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("open_system.k", "must be finite and non-negative");
}

std::vector<CMatrix> DissipatorSpec::jump_operators(int dimension) const {
  std::vector<CMatrix> ops;
  if (trivial()) return ops;
  if (dimension < 3) throw ConfigError("open_system", "dissipator needs at least three levels");
  CMatrix l1 = CMatrix::Zero(dimension, dimension);
  l1(0, 1) = std::sqrt(1.0 / T1);
  ops.push_back(l1);
  if (k > 0.0) {
    CMatrix l2 = CMatrix::Zero(dimension, dimension);
    l2(1, 2) = std::sqrt(k / T1);
    ops.push_back(l2);
  }
  return ops;
}

CVector basis_state(int n, int j) {
  if (j < 0 || j >= n) throw ConfigError("initial_state", "level outside the model");
  CVector v = CVector::Zero(n);
  v(j) = 1.0;
  return v;
}

CMatrix unitary_step(const CMatrix& H, double h) {
  const int n = static_cast<int>(H.rows());
  const double theta = H.cwiseAbs().colwise().sum().maxCoeff() * std::abs(h);
  int squarings = 0;
  if (theta > 0.05) squarings = static_cast<int>(std::ceil(std::log2(theta / 0.05)));
  const double scale = std::ldexp(h, -squarings);
  const CMatrix z = cplx(0.0, -scale) * H;
  const CMatrix z2 = z * z;
  const CMatrix I = CMatrix::Identity(n, n);
  // Diagonal (3,3) Pade approximant of exp(z); unimodular for skew-Hermitian z.
  const CMatrix even = I + z2 / 10.0;
  const CMatrix odd = z * (0.5 * I + z2 / 120.0);
  CMatrix u = (even - odd).partialPivLu().solve(even + odd);
  for (int s = 0; s < squarings; ++s) u = u * u;
  return u;
}

namespace {

constexpr double kGaussOffset = 0.28867513459481288225;  // sqrt(3) / 6

CMatrix step_propagator(const HamiltonianFn& h, double t, double dt, Integrator integ) {
  if (integ == Integrator::midpoint) return unitary_step(h.eval(t + 0.5 * dt), dt);
  const CMatrix h1 = h.eval(t + (0.5 - kGaussOffset) * dt);
  const CMatrix h2 = h.eval(t + (0.5 + kGaussOffset) * dt);
  const CMatrix comm = h2 * h1 - h1 * h2;
  const CMatrix heff = 0.5 * (h1 + h2) + cplx(0.0, -std::sqrt(3.0) / 12.0 * dt) * comm;
  return unitary_step(heff, dt);
}

void check_grid(const HamiltonianFn& h, const TimeGrid& grid, const PropagationOptions& opts) {
  if (!opts.enforce_step) return;
  const double limit = auto_step(h, grid.t0, grid.t1, opts.points_per_period);
  if (grid.step() > limit * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << "step " << grid.step() << " us exceeds 1/" << opts.points_per_period << " of the fastest period (max "
       << limit << " us)";
    throw ConfigError("grid.step_us", os.str());
  }
}

long readout_index(const TimeGrid& grid, const PropagationOptions& opts) {
  if (std::isnan(opts.readout_time)) return grid.n_steps;
  if (opts.readout_time < grid.t0 || opts.readout_time > grid.t1 + 1e-12)
    throw ConfigError("grid.readout", "readout time outside the propagation window");
  const double u = (opts.readout_time - grid.t0) / grid.step();
  return std::min(grid.n_steps, static_cast<long>(std::ceil(u - 1e-9)));
}

bool is_output(const TimeGrid& grid, long k) { return k % grid.decimation == 0 || k == grid.n_steps; }

void fill_times(const TimeGrid& grid, EvolutionResult& r) {
  r.times.clear();
  for (long k = 0; k <= grid.n_steps; ++k)
    if (is_output(grid, k)) r.times.push_back(grid.time(k));
}

double leakage_of(const RVector& pops) {
  double s = 0.0;
  for (int j = 3; j < pops.size(); ++j) s += pops(j);
  return s;
}

void finish_figures(EvolutionResult& r) {
  r.leakage.resize(r.times.size());
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const RVector p = r.populations.row(static_cast<Eigen::Index>(i)).transpose();
    r.leakage[i] = leakage_of(p);
    r.max_leakage = std::max(r.max_leakage, r.leakage[i]);
    if (p.size() > 2) r.max_rho22 = std::max(r.max_rho22, p(2));
  }
  r.efficiency = r.readout_populations.size() > 1 ? r.readout_populations(1) : 0.0;
}

void check_hermitian(const CMatrix& H, double t) {
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    std::ostringstream os;
    os << "non-Hermitian Hamiltonian sample at t = " << t;
    throw NumericalError(os.str());
  }
}

}  // namespace

EvolutionResult propagate_unitary(const HamiltonianFn& h, const CVector& psi0, const TimeGrid& grid,
                                  const PropagationOptions& opts) {
  if (psi0.size() != h.dimension) throw ConfigError("initial_state", "dimension does not match the model");
  check_grid(h, grid, opts);
  check_hermitian(h.eval(grid.t0), grid.t0);
  check_hermitian(h.eval(0.5 * (grid.t0 + grid.t1)), 0.5 * (grid.t0 + grid.t1));

  EvolutionResult r;
  fill_times(grid, r);
  const int n = h.dimension;
  r.populations.resize(static_cast<Eigen::Index>(r.times.size()), n);
  const long k_read = readout_index(grid, opts);
  r.readout_time = grid.time(k_read);

  CVector psi = psi0 / psi0.norm();
  const double dt = grid.step();
  long row = 0;
  auto record = [&](long k) {
    const RVector p = psi.cwiseAbs2();
    r.max_norm_drift = std::max(r.max_norm_drift, std::abs(p.sum() - 1.0));
    r.max_leakage = std::max(r.max_leakage, leakage_of(p));
    if (n > 2) r.max_rho22 = std::max(r.max_rho22, p(2));
    if (k == k_read) r.readout_populations = p;
    if (is_output(grid, k)) r.populations.row(row++) = p.transpose();
  };
  record(0);
  for (long k = 0; k < grid.n_steps; ++k) {
    psi = step_propagator(h, grid.time(k), dt, opts.integrator) * psi;
    record(k + 1);
  }
  if (r.max_norm_drift > 1e-8) {
    std::ostringstream os;
    os << "norm drift " << r.max_norm_drift << " exceeds 1e-8";
    throw NumericalError(os.str());
  }
  r.final_state = psi;
  finish_figures(r);
  return r;
}

namespace {

// vec(A rho B) = (B^T kron A) vec(rho), column-major.
CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

CMatrix dissipator_superoperator(const std::vector<CMatrix>& ops, int n) {
  const CMatrix I = CMatrix::Identity(n, n);
  CMatrix L = CMatrix::Zero(n * n, n * n);
  for (const auto& l : ops) {
    const CMatrix ll = l.adjoint() * l;
    L += kron(l.conjugate(), l);
    L -= 0.5 * kron(I, ll);
    L -= 0.5 * kron(ll.transpose(), I);
  }
  return L;
}

}  // namespace

EvolutionResult propagate_lindblad(const HamiltonianFn& h, const DissipatorSpec& d, const CMatrix& rho0,
                                   const TimeGrid& grid, const PropagationOptions& opts) {
  const int n = h.dimension;
  if (n > 8) throw ConfigError("model", "density-matrix path limited to 8 levels");
  if (rho0.rows() != n || rho0.cols() != n) throw ConfigError("initial_state", "dimension does not match the model");
  d.validate();
  check_grid(h, grid, opts);

  const double dt = grid.step();
  const auto ops = d.jump_operators(n);
  CMatrix half;
  const bool dissipative = !ops.empty();
  if (dissipative) half = (dissipator_superoperator(ops, n) * (0.5 * dt)).exp();

  EvolutionResult r;
  fill_times(grid, r);
  r.populations.resize(static_cast<Eigen::Index>(r.times.size()), n);
  const long k_read = readout_index(grid, opts);
  r.readout_time = grid.time(k_read);

  CMatrix rho = rho0;
  CVector vec(n * n);
  auto apply_half = [&] {
    vec = Eigen::Map<const CVector>(rho.data(), n * n);
    CVector out = half * vec;
    rho = Eigen::Map<const CMatrix>(out.data(), n, n);
  };

  long row = 0;
  auto record = [&](long k) {
    const RVector p = rho.diagonal().real();
    r.max_trace_error = std::max(r.max_trace_error, std::abs(rho.trace().real() - 1.0));
    r.max_leakage = std::max(r.max_leakage, leakage_of(p));
    if (n > 2) r.max_rho22 = std::max(r.max_rho22, p(2));
    if (k == k_read) r.readout_populations = p;
    if (is_output(grid, k)) {
      r.populations.row(row++) = p.transpose();
      Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      r.min_eigenvalue = std::min(r.min_eigenvalue, lo);
      if (lo < -1e-9) {
        std::ostringstream os;
        os << "density matrix lost positivity at t = " << grid.time(k) << " (min eigenvalue " << lo << ")";
        throw NumericalError(os.str());
      }
    }
  };
  record(0);
  for (long k = 0; k < grid.n_steps; ++k) {
    if (dissipative) apply_half();
    const CMatrix u = step_propagator(h, grid.time(k), dt, opts.integrator);
    rho = u * rho * u.adjoint();
    if (dissipative) apply_half();
    rho = 0.5 * (rho + rho.adjoint());
    record(k + 1);
  }
  if (r.max_trace_error > 1e-8) {
    std::ostringstream os;
    os << "trace error " << r.max_trace_error << " exceeds 1e-8";
    throw NumericalError(os.str());
  }
  r.final_rho = rho;
  finish_figures(r);
  return r;
}

namespace {

struct Trajectory {
  RMatrix populations;
  RVector readout;
  long jumps = 0;
  double max_dp = 0.0;
};

Trajectory run_trajectory(const HamiltonianFn& h, const std::vector<CMatrix>& ops, const CMatrix& decay_half,
                          const CMatrix& K, const CVector& psi0, const TimeGrid& grid, long k_read, long n_out,
                          Integrator integ, std::mt19937_64& rng) {
  const int n = h.dimension;
  const double dt = grid.step();
  Trajectory tr;
  tr.populations.resize(n_out, n);
  CVector psi = psi0 / psi0.norm();
  double threshold = uniform_open(rng);
  long row = 0;
  auto record = [&](long k) {
    const double nn = psi.squaredNorm();
    const RVector p = psi.cwiseAbs2() / nn;
    if (k == k_read) tr.readout = p;
    if (is_output(grid, k)) tr.populations.row(row++) = p.transpose();
  };
  record(0);
  for (long k = 0; k < grid.n_steps; ++k) {
    const double nn = psi.squaredNorm();
    if (!ops.empty()) tr.max_dp = std::max(tr.max_dp, dt * std::real(psi.dot(K * psi)) / nn);
    if (!ops.empty()) psi = decay_half * psi;
    psi = step_propagator(h, grid.time(k), dt, integ) * psi;
    if (!ops.empty()) psi = decay_half * psi;
    if (!ops.empty() && psi.squaredNorm() < threshold) {
      std::vector<double> w(ops.size());
      double total = 0.0;
      for (std::size_t j = 0; j < ops.size(); ++j) {
        w[j] = (ops[j] * psi).squaredNorm();
        total += w[j];
      }
      if (total > 0.0) {
        double pick = uniform_open(rng) * total;
        std::size_t chosen = ops.size() - 1;
        for (std::size_t j = 0; j < ops.size(); ++j) {
          if (pick < w[j]) {
            chosen = j;
            break;
          }
          pick -= w[j];
        }
        psi = ops[chosen] * psi;
        psi /= psi.norm();
        ++tr.jumps;
      }
      threshold = uniform_open(rng);
    }
    record(k + 1);
  }
  return tr;
}

}  // namespace

EvolutionResult propagate_mcwf(const std::function<HamiltonianFn(int)>& h_for, const DissipatorSpec& d,
                               const CVector& psi0, int n_traj, std::uint64_t seed, const TimeGrid& grid,
                               const PropagationOptions& opts) {
  if (n_traj < 1) throw ConfigError("trajectories", "must be >= 1");
  d.validate();
  const HamiltonianFn h0 = h_for(0);
  const int n = h0.dimension;
  if (psi0.size() != n) throw ConfigError("initial_state", "dimension does not match the model");
  check_grid(h0, grid, opts);

  const auto ops = d.jump_operators(n);
  CMatrix K = CMatrix::Zero(n, n);
  for (const auto& l : ops) K += l.adjoint() * l;
  const double dt = grid.step();
  // Half of the per-step decay exp(-K dt / 2) of the drift -i(H - iK/2), applied on both sides.
  const CMatrix decay = (K * (-0.25 * dt)).exp();

  EvolutionResult r;
  fill_times(grid, r);
  const long n_out = static_cast<long>(r.times.size());
  const long k_read = readout_index(grid, opts);
  r.readout_time = grid.time(k_read);

  std::vector<Trajectory> trajs(n_traj);
  parallel_for(n_traj, opts.threads, [&](long i) {
    auto rng = make_rng(seed, Stream::jumps, static_cast<std::uint64_t>(i));
    const HamiltonianFn hi = i == 0 ? h0 : h_for(static_cast<int>(i));
    trajs[i] = run_trajectory(hi, ops, decay, K, psi0, grid, k_read, n_out, opts.integrator, rng);
  });

  RMatrix sum = RMatrix::Zero(n_out, n), sum2 = RMatrix::Zero(n_out, n);
  RVector rs = RVector::Zero(n), rs2 = RVector::Zero(n);
  for (const auto& tr : trajs) {
    sum += tr.populations;
    sum2 += tr.populations.array().square().matrix();
    rs += tr.readout;
    rs2 += tr.readout.array().square().matrix();
    r.jump_count += tr.jumps;
    r.max_jump_probability = std::max(r.max_jump_probability, tr.max_dp);
  }
  const double m = n_traj;
  r.populations = sum / m;
  r.readout_populations = rs / m;
  auto stderr_of = [m](double s, double s2) {
    if (m < 2) return 0.0;
    const double var = std::max(0.0, (s2 - s * s / m) / (m - 1.0));
    return std::sqrt(var / m);
  };
  r.population_stderr.resize(n_out, n);
  for (long i = 0; i < n_out; ++i)
    for (int j = 0; j < n; ++j) r.population_stderr(i, j) = stderr_of(sum(i, j), sum2(i, j));
  r.readout_stderr.resize(n);
  for (int j = 0; j < n; ++j) r.readout_stderr(j) = stderr_of(rs(j), rs2(j));
  r.n_trajectories = n_traj;
  finish_figures(r);
  r.efficiency_stderr = n > 1 ? r.readout_stderr(1) : 0.0;
  if (r.max_jump_probability > 0.1)
    std::cerr << "warning: per-step jump probability " << r.max_jump_probability << " exceeds 0.1\n";
  return r;
}

EvolutionResult propagate_mcwf(const HamiltonianFn& h, const DissipatorSpec& d, const CVector& psi0, int n_traj,
                               std::uint64_t seed, const TimeGrid& grid, const PropagationOptions& opts) {
  return propagate_mcwf([&h](int) { return h; }, d, psi0, n_traj, seed, grid, opts);
}

TransferFigures efficiency_and_leakage(const EvolutionResult& r) {
  return {r.efficiency, r.max_leakage, r.max_rho22};
}

RMatrix coarse_grain(const EvolutionResult& r, double width) {
  const auto& t = r.times;
  const Eigen::Index n_out = static_cast<Eigen::Index>(t.size());
  const Eigen::Index n = r.populations.cols();
  RMatrix out(n_out, n);
  if (n_out < 2 || !(width > 0.0)) return r.populations;

  auto value_at = [&](double x, Eigen::Index j) {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    Eigen::Index hi = std::clamp<Eigen::Index>(it - t.begin(), 1, n_out - 1);
    const Eigen::Index lo = hi - 1;
    const double s = (x - t[lo]) / (t[hi] - t[lo]);
    return (1.0 - s) * r.populations(lo, j) + s * r.populations(hi, j);
  };

  for (Eigen::Index i = 0; i < n_out; ++i) {
    const double a = std::max(t.front(), t[i] - 0.5 * width);
    const double b = std::min(t.back(), t[i] + 0.5 * width);
    for (Eigen::Index j = 0; j < n; ++j) {
      // Exact integral of the piecewise-linear interpolant over [a, b].
      double acc = 0.0;
      double x0 = a;
      double y0 = value_at(a, j);
      auto it = std::upper_bound(t.begin(), t.end(), a);
      for (; it != t.end() && *it < b; ++it) {
        const Eigen::Index k = it - t.begin();
        acc += 0.5 * (y0 + r.populations(k, j)) * (*it - x0);
        x0 = *it;
        y0 = r.populations(k, j);
      }
      const double yb = value_at(b, j);
      acc += 0.5 * (y0 + yb) * (b - x0);
      out(i, j) = b > a ? acc / (b - a) : r.populations(i, j);
    }
  }
  return out;
}

}  // namespace stirap
