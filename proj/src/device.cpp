#include "stirap/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <lapacke.h>

namespace stirap {

namespace {

using Triplet = Eigen::Triplet<cplx>;

void require(bool ok, const char* path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

}  // namespace

void FluxQubitSpec::validate() const {
  require(E_C > 0.0, "device.E_C", "must be positive");
  require(E_J_over_E_C > 0.0, "device.E_J_over_E_C", "must be positive");
  require(junction_asymmetry > 0.0 && junction_asymmetry < 1.0, "device.junction_asymmetry",
          "must lie in (0, 1)");
  require(flux_bias_f >= 0.0 && flux_bias_f <= 1.0, "device.flux_bias_f", "must lie in [0, 1]");
  require(charge_cutoff % 2 == 1 && charge_cutoff >= 5, "device.charge_cutoff",
          "must be odd and >= 5");
  require(charge_cutoff <= 17, "device.charge_cutoff", "basis cutoff^3 limited to 17^3");
}

void TransmonSpec::validate() const {
  require(E_C > 0.0, "device.E_C", "must be positive");
  require(E_J_over_E_C >= 1.0, "device.E_J_over_E_C", "must be >= 1");
  require(charge_cutoff >= 20, "device.charge_cutoff", "must be >= 20");
}

ChargeBasisHamiltonian build_flux_hamiltonian(const FluxQubitSpec& spec) {
  spec.validate();
  const int n = spec.charge_cutoff;
  const int m = (n - 1) / 2;
  const int dim = n * n * n;
  const double a = spec.junction_asymmetry;
  const double ej = spec.E_J_over_E_C * spec.E_C;
  const double kin = 4.0 * spec.E_C / (1.0 + 3.0 * a);
  // Rounded so that symmetry-point biases give an exactly real Hamiltonian.
  auto snap = [](double x) { return std::abs(x) < 1e-14 ? 0.0 : x; };
  const cplx loop_phase(snap(std::cos(kTwoPi * spec.flux_bias_f)), snap(-std::sin(kTwoPi * spec.flux_bias_f)));

  auto index = [n](int i1, int i2, int i3) { return (i1 * n + i2) * n + i3; };

  std::vector<Triplet> h;
  std::vector<Triplet> q;
  h.reserve(static_cast<std::size_t>(dim) * 9);
  q.reserve(static_cast<std::size_t>(dim) * 2);

  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      for (int i3 = 0; i3 < n; ++i3) {
        const double n1 = i1 - m, n2 = i2 - m, n3 = i3 - m;
        const int row = index(i1, i2, i3);
        const double diag = kin * ((1.0 + 2.0 * a) * (n1 * n1 + n2 * n2 + n3 * n3) -
                                   2.0 * a * (n1 * n2 + n1 * n3 + n2 * n3));
        h.emplace_back(row, row, diag);
        // -E_J cos(phi_j): e^{i phi_j} raises n_j by one.
        if (i1 + 1 < n) {
          h.emplace_back(index(i1 + 1, i2, i3), row, -0.5 * ej);
          h.emplace_back(row, index(i1 + 1, i2, i3), -0.5 * ej);
        }
        if (i2 + 1 < n) {
          h.emplace_back(index(i1, i2 + 1, i3), row, -0.5 * ej);
          h.emplace_back(row, index(i1, i2 + 1, i3), -0.5 * ej);
        }
        if (i3 + 1 < n) {
          h.emplace_back(index(i1, i2, i3 + 1), row, -0.5 * ej);
          h.emplace_back(row, index(i1, i2, i3 + 1), -0.5 * ej);
        }
        // Small junction: -a E_J cos(sum phi - 2 pi f), with e^{i sum phi} raising all three charges.
        if (i1 + 1 < n && i2 + 1 < n && i3 + 1 < n) {
          const int up = index(i1 + 1, i2 + 1, i3 + 1);
          const cplx s = loop_phase;  // coefficient of |n+1><n| in e^{i(sum phi - 2 pi f)}
          h.emplace_back(up, row, -0.5 * a * ej * s);
          h.emplace_back(row, up, -0.5 * a * ej * std::conj(s));
          // Q = -2 pi a E_J sin(sum phi - 2 pi f); sin x = (e^{ix} - e^{-ix}) / 2i.
          const double pref = -kTwoPi * a * ej;
          q.emplace_back(up, row, pref * s / (2.0 * kI));
          q.emplace_back(row, up, -pref * std::conj(s) / (2.0 * kI));
        }
      }
    }
  }

  ChargeBasisHamiltonian out;
  out.H0.resize(dim, dim);
  out.H0.setFromTriplets(h.begin(), h.end());
  out.Q.resize(dim, dim);
  out.Q.setFromTriplets(q.begin(), q.end());

  const double twice_f = 2.0 * spec.flux_bias_f;
  if (std::abs(twice_f - std::round(twice_f)) < 1e-15) {
    out.parity_map.resize(dim);
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int i3 = 0; i3 < n; ++i3)
          out.parity_map[index(i1, i2, i3)] = index(n - 1 - i1, n - 1 - i2, n - 1 - i3);
  }
  return out;
}

ChargeBasisHamiltonian build_transmon_hamiltonian(const TransmonSpec& spec) {
  spec.validate();
  const int dim = spec.charge_cutoff;
  const double qg = spec.charge_bias_qg;
  const int n_min = static_cast<int>(std::ceil(qg - 0.5 * dim));
  const double ej = spec.E_J_over_E_C * spec.E_C;

  std::vector<Triplet> h;
  std::vector<Triplet> q;
  for (int k = 0; k < dim; ++k) {
    const double nq = (n_min + k) - qg;
    h.emplace_back(k, k, 4.0 * spec.E_C * nq * nq);
    q.emplace_back(k, k, -8.0 * spec.E_C * nq);
    if (k + 1 < dim) {
      h.emplace_back(k + 1, k, -0.5 * ej);
      h.emplace_back(k, k + 1, -0.5 * ej);
    }
  }

  ChargeBasisHamiltonian out;
  out.H0.resize(dim, dim);
  out.H0.setFromTriplets(h.begin(), h.end());
  out.Q.resize(dim, dim);
  out.Q.setFromTriplets(q.begin(), q.end());

  // Parity n -> 2 q_g - n, available when the reflection maps the basis onto itself.
  const double twice_qg = 2.0 * qg;
  if (std::abs(twice_qg - std::round(twice_qg)) < 1e-15) {
    const int centre = static_cast<int>(std::round(twice_qg));
    const int n_max = n_min + dim - 1;
    if (centre - n_max == n_min) {
      out.parity_map.resize(dim);
      for (int k = 0; k < dim; ++k) out.parity_map[k] = (centre - (n_min + k)) - n_min;
    }
  }
  return out;
}

namespace {

bool solve_real(const CMatrix& H, lapack_int n, lapack_int m, RVector& values, CMatrix& vectors) {
  Eigen::MatrixXd a = H.real();
  Eigen::MatrixXd z(n, m);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(m));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, a.data(), n, 0.0, 0.0, 1, m, 0.0,
                                         &found, values.data(), z.data(), n, isuppz.data());
  if (info != 0 || found != m) return false;
  vectors = z.cast<cplx>();
  return true;
}

void solve_complex(const CMatrix& H, lapack_int n, lapack_int m, RVector& values, CMatrix& vectors) {
  CMatrix a = H;
  CMatrix z(n, m);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(m));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()), n, 0.0, 0.0, 1, m,
      0.0, &found, values.data(), reinterpret_cast<lapack_complex_double*>(z.data()), n, isuppz.data());
  if (info != 0 || found != m)
    throw NumericalError("eigensolver: zheevr failed with info=" + std::to_string(info));
  vectors = z;
}

/// Largest eigen-equation residual relative to the matrix scale.
double relative_residual(const CMatrix& H, const RVector& values, const CMatrix& vectors) {
  const Eigen::Index m = vectors.cols();
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  const CMatrix r = H * vectors - vectors * values.head(m).asDiagonal();
  return r.colwise().norm().maxCoeff() / scale;
}

}  // namespace

void lowest_eigenpairs(const CMatrix& H, int n_eigen, RVector& values, CMatrix& vectors) {
  const lapack_int n = static_cast<lapack_int>(H.rows());
  if (H.cols() != n) throw NumericalError("eigensolver: matrix is not square");
  if (n_eigen < 1 || n_eigen > n) throw NumericalError("eigensolver: requested level count out of range");
  constexpr double kResidualTolerance = 1e-10;

  values.resize(n);
  // Some optimized BLAS builds return inaccurate real-symmetric eigenvectors,
  // so the fast real path is accepted only after checking the residual.
  const bool real = H.imag().cwiseAbs().maxCoeff() == 0.0;
  if (!(real && solve_real(H, n, n_eigen, values, vectors) &&
        relative_residual(H, values, vectors) < kResidualTolerance)) {
    solve_complex(H, n, n_eigen, values, vectors);
    const double res = relative_residual(H, values, vectors);
    if (!(res < kResidualTolerance))
      throw NumericalError("eigensolver: residual " + std::to_string(res) + " exceeds tolerance");
  }
  values.conservativeResize(n_eigen);
}

namespace {

void fix_phases(CMatrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const double vmax = v.col(c).cwiseAbs().maxCoeff();
    Eigen::Index pick = 0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      if (std::abs(v(r, c)) >= vmax * (1.0 - 1e-8)) {
        pick = r;
        break;
      }
    }
    const cplx z = v(pick, c);
    v.col(c) *= std::conj(z) / std::abs(z);
  }
}

DeviceModel finish_model(const RVector& all_values, const CMatrix& q_eig_full, int n_levels) {
  DeviceModel model;
  model.n_levels = n_levels;
  model.energies = all_values.head(n_levels);
  model.coupling = q_eig_full;

  const double scale = std::max(1.0, all_values.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j + 1 < all_values.size(); ++j) {
    if (std::abs(all_values(j + 1) - all_values(j)) < 1e-9 * scale) {
      std::ostringstream os;
      os << "levels " << j << " and " << j + 1 << " are degenerate; eigenvector phase convention is ill-defined";
      if (j + 1 >= n_levels) os << " (truncation splits the degenerate pair)";
      model.warnings.push_back(os.str());
    }
  }
  if (n_levels >= 3) model.anharmonicity_alpha = model.omega(1, 2) - model.omega(0, 1);
  if (n_levels >= 4) model.anharmonicity_beta = model.omega(2, 3) - model.omega(1, 2);
  return model;
}

}  // namespace

DeviceModel diagonalize(const CSparse& H0, const CSparse& Q, int n_levels) {
  const int dim = static_cast<int>(H0.rows());
  if (n_levels < 1 || n_levels > dim) throw ConfigError("n_levels", "must lie in [1, dim(H0)]");
  const int n_eigen = std::min(dim, n_levels + 1);
  RVector values;
  CMatrix vectors;
  lowest_eigenpairs(CMatrix(H0), n_eigen, values, vectors);
  fix_phases(vectors);
  CMatrix v = vectors.leftCols(n_levels);
  CMatrix qv = Q * v;
  CMatrix q_eig = v.adjoint() * qv;
  q_eig = 0.5 * (q_eig + q_eig.adjoint()).eval();
  return finish_model(values, q_eig, n_levels);
}

DeviceModel diagonalize(const CMatrix& H0, const CMatrix& Q, int n_levels) {
  if ((H0 - H0.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, H0.cwiseAbs().maxCoeff()))
    throw NumericalError("diagonalize: H0 is not Hermitian");
  CSparse hs = H0.sparseView();
  CSparse qs = Q.sparseView();
  return diagonalize(hs, qs, n_levels);
}

DeviceModel flux_device(const FluxQubitSpec& spec, int n_levels) {
  const auto h = build_flux_hamiltonian(spec);
  return diagonalize(h.H0, h.Q, n_levels);
}

DeviceModel transmon_device(const TransmonSpec& spec, int n_levels) {
  const auto h = build_transmon_hamiltonian(spec);
  return diagonalize(h.H0, h.Q, n_levels);
}

std::vector<double> level_parities(const ChargeBasisHamiltonian& h, int n_levels) {
  if (h.parity_map.empty()) throw ConfigError("device", "parity is defined only at the symmetry point");
  RVector values;
  CMatrix v;
  lowest_eigenpairs(CMatrix(h.H0), n_levels, values, v);
  std::vector<double> out(n_levels);
  for (int j = 0; j < n_levels; ++j) {
    cplx acc = 0.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) acc += std::conj(v(r, j)) * v(h.parity_map[r], j);
    out[j] = acc.real();
  }
  return out;
}

namespace {

ConvergenceReport compare_spectra(const RVector& lo, const RVector& hi, double tol) {
  ConvergenceReport r;
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    const double denom = std::max(std::abs(lo(j)), 1e-300);
    r.max_relative_shift = std::max(r.max_relative_shift, std::abs(hi(j) - lo(j)) / denom);
  }
  r.converged = r.max_relative_shift < tol;
  return r;
}

RVector lowest_energies(const ChargeBasisHamiltonian& h, int n) {
  RVector values;
  CMatrix v;
  lowest_eigenpairs(CMatrix(h.H0), n, values, v);
  return values;
}

}  // namespace

ConvergenceReport check_cutoff_convergence(const FluxQubitSpec& spec, int n_levels, double tolerance) {
  FluxQubitSpec bigger = spec;
  bigger.charge_cutoff += 2;
  return compare_spectra(lowest_energies(build_flux_hamiltonian(spec), n_levels),
                         lowest_energies(build_flux_hamiltonian(bigger), n_levels), tolerance);
}

ConvergenceReport check_cutoff_convergence(const TransmonSpec& spec, int n_levels, double tolerance) {
  TransmonSpec bigger = spec;
  bigger.charge_cutoff += 2;
  return compare_spectra(lowest_energies(build_transmon_hamiltonian(spec), n_levels),
                         lowest_energies(build_transmon_hamiltonian(bigger), n_levels), tolerance);
}

BiasParameter parse_bias_parameter(const std::string& name) {
  if (name == "E_J_over_E_C" || name == "EJ/EC" || name == "ej_over_ec") return BiasParameter::EJ_over_EC;
  if (name == "flux_bias_f" || name == "f") return BiasParameter::flux_bias;
  if (name == "charge_bias_qg" || name == "qg") return BiasParameter::charge_bias;
  throw ConfigError("bias", "unknown bias parameter '" + name + "'");
}

namespace {

template <class Spec, class Builder, class Setter>
BiasSensitivity central_difference(const Spec& spec, double step, Builder build, Setter shift) {
  if (!(step > 0.0)) throw ConfigError("step", "must be positive");
  auto bohr = [&](double dx) {
    Spec s = spec;
    shift(s, dx);
    const RVector e = lowest_energies(build(s), 3);
    return std::pair{e(1) - e(0), e(2) - e(0)};
  };
  auto derivs = [&](double h) {
    const auto p = bohr(h);
    const auto m = bohr(-h);
    return std::pair{(p.first - m.first) / (2.0 * h), (p.second - m.second) / (2.0 * h)};
  };
  const auto full = derivs(step);
  const auto half = derivs(0.5 * step);

  BiasSensitivity out;
  out.dE1dx = full.first;
  out.dE2dx = full.second;
  const double dev1 = std::abs(full.first - half.first) / std::max(std::abs(half.first), 1e-300);
  const double dev2 = std::abs(full.second - half.second) / std::max(std::abs(half.second), 1e-300);
  out.halving_deviation = std::max(dev1, dev2);
  out.nonlinear = out.halving_deviation > 0.01;

  const double scale = std::max(std::abs(out.dE2dx), 1e-300);
  if (std::abs(out.dE1dx) < 1e-12 * scale)
    throw NumericalError("bias_sensitivity: E1 - E0 is stationary in this bias; correlation undefined");
  out.correlation_a = out.dE2dx / out.dE1dx;
  if (!std::isfinite(out.correlation_a)) throw NumericalError("bias_sensitivity: correlation not finite");
  return out;
}

}  // namespace

BiasSensitivity bias_sensitivity(const FluxQubitSpec& spec, BiasParameter bias, double step) {
  if (bias == BiasParameter::charge_bias) throw ConfigError("bias", "flux device has no charge bias");
  return central_difference(spec, step, build_flux_hamiltonian, [bias](FluxQubitSpec& s, double dx) {
    if (bias == BiasParameter::EJ_over_EC) s.E_J_over_E_C += dx;
    else s.flux_bias_f += dx;
  });
}

BiasSensitivity bias_sensitivity(const TransmonSpec& spec, BiasParameter bias, double step) {
  if (bias == BiasParameter::flux_bias) throw ConfigError("bias", "transmon has no flux bias");
  return central_difference(spec, step, build_transmon_hamiltonian, [bias](TransmonSpec& s, double dx) {
    if (bias == BiasParameter::EJ_over_EC) s.E_J_over_E_C += dx;
    else s.charge_bias_qg += dx;
  });
}

}  // namespace stirap
