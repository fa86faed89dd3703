#include <doctest.h>

#include <random>

#include "stirap/config.hpp"
#include "stirap/device.hpp"

using namespace stirap;

namespace {

// Cooper-pair box in a symmetric charge window n = -m..m, built from scratch.
RVector independent_transmon_levels(double E_C, double ratio, double qg, int m, int n_levels) {
  const int dim = 2 * m + 1;
  const double E_J = ratio * E_C;
  RMatrix H = RMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double n = k - m;
    H(k, k) = 4.0 * E_C * (n - qg) * (n - qg);
    if (k + 1 < dim) H(k, k + 1) = H(k + 1, k) = -0.5 * E_J;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(H);
  RVector e = es.eigenvalues().head(n_levels);
  return e.array() - e(0);
}

const DeviceModel& flux_reference() {
  DeviceConfig d;
  d.kind = DeviceKind::flux;
  d.n_levels = 6;
  return device_model(d);
}

const DeviceModel& transmon_reference() {
  DeviceConfig d;
  d.kind = DeviceKind::transmon;
  d.n_levels = 6;
  return device_model(d);
}

double max_relative_residual(const CMatrix& H, const RVector& w, const CMatrix& v) {
  const CMatrix r = H * v - v * w.asDiagonal();
  return r.colwise().norm().maxCoeff() / std::max(1.0, H.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("device") {

TEST_CASE("transmon levels agree with an independent charge-basis solve") {
  const DeviceModel& m = transmon_reference();
  const RVector ref = independent_transmon_levels(units::from_ghz(0.212), 49.0, 0.5, 60, 6);
  for (int j = 1; j < 6; ++j) CHECK(m.omega(0, j) == doctest::Approx(ref(j)).epsilon(1e-10));
}

TEST_CASE("transmon transition frequency and anharmonicity") {
  const DeviceModel& m = transmon_reference();
  CHECK(units::to_ghz(m.omega(0, 1)) == doctest::Approx(3.97292).epsilon(1e-5));
  CHECK(units::to_mhz(m.anharmonicity_alpha) == doctest::Approx(-243.77).epsilon(1e-4));
  // Asymptotic large-E_J/E_C expansion, accurate to a fraction of a percent here.
  const double E_C = units::from_ghz(0.212);
  CHECK(m.omega(0, 1) == doctest::Approx(std::sqrt(8.0 * 49.0) * E_C - E_C).epsilon(5e-3));
  CHECK(m.anharmonicity_alpha == doctest::Approx(-E_C).epsilon(0.2));
}

TEST_CASE("transmon coupling obeys parity at the charge symmetry point") {
  const DeviceModel& m = transmon_reference();
  const double q01 = std::abs(m.Q(0, 1));
  CHECK(q01 > 0.0);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if ((i + j) % 2 == 0 && i != j) CHECK(std::abs(m.Q(i, j)) < 1e-8 * q01);
  // Harmonic-limit matrix element ratio |Q12 / Q01| ~ sqrt(2).
  CHECK(std::abs(m.Q(1, 2)) / q01 == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  CHECK((m.coupling - m.coupling.adjoint()).cwiseAbs().maxCoeff() < 1e-9 * q01);
}

TEST_CASE("flux qudit spectrum and selection rules at half flux") {
  const DeviceModel& m = flux_reference();
  const double expected_ghz[] = {5.590, 36.08, 62.07, 71.025};
  for (int j = 1; j <= 4; ++j) CHECK(units::to_ghz(m.omega(0, j)) == doctest::Approx(expected_ghz[j - 1]).epsilon(2e-3));
  const double q01 = std::abs(m.Q(0, 1));
  CHECK(q01 == doctest::Approx(3.347e6).epsilon(2e-3));
  CHECK(std::abs(m.Q(1, 2)) > 0.01 * q01);
  CHECK(std::abs(m.Q(0, 2)) < 1e-8 * q01);
  CHECK(std::abs(m.Q(1, 3)) < 1e-8 * q01);
}

TEST_CASE("flux parities alternate on the lowest levels") {
  FluxQubitSpec s;
  const auto h = build_flux_hamiltonian(s);
  REQUIRE(!h.parity_map.empty());
  const auto p = level_parities(h, 4);
  for (int j = 0; j + 1 < 4; ++j) CHECK(p[j] * p[j + 1] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("degenerate flux levels raise a warning") {
  const DeviceModel& m = flux_reference();
  CHECK(m.omega(4, 5) < 1e-6 * m.omega(0, 5));
  CHECK(!m.warnings.empty());
}

TEST_CASE("cutoff convergence reports") {
  TransmonSpec t;
  const auto rt = check_cutoff_convergence(t, 6);
  CHECK(rt.converged);
  CHECK(rt.max_relative_shift < 1e-8);

  FluxQubitSpec f;
  f.charge_cutoff = 7;
  const auto coarse = check_cutoff_convergence(f, 4, 1e-8);
  CHECK(coarse.converged == (coarse.max_relative_shift < 1e-8));
  CHECK(coarse.max_relative_shift > 0.0);
}

TEST_CASE("eigensolver residuals on dense Hermitian matrices") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int n : {40, 250}) {
    for (bool real : {true, false}) {
      CMatrix A(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(g(rng), real ? 0.0 : g(rng));
      const CMatrix H = 0.5 * (A + A.adjoint());
      RVector w;
      CMatrix v;
      lowest_eigenpairs(H, 12, w, v);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
      CHECK((w - es.eigenvalues().head(12)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(max_relative_residual(H, w, v) < 1e-10);
      CHECK((v.adjoint() * v - CMatrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("transmon correlation follows the asymptotic ratio of two") {
  TransmonSpec t;
  const auto b = bias_sensitivity(t, BiasParameter::EJ_over_EC, 1e-3);
  CHECK(!b.nonlinear);
  // omega_0j ~ j E_C sqrt(8 x) - const, so d omega_02 / d omega_01 -> 2.
  CHECK(b.correlation_a == doctest::Approx(2.0).epsilon(0.05));
  const double E_C = units::from_ghz(0.212);
  CHECK(b.dE1dx == doctest::Approx(E_C * std::sqrt(2.0 / 49.0)).epsilon(0.02));
}

TEST_CASE("transmon correlation from an independent finite difference") {
  TransmonSpec t;
  const double h = 1e-3;
  const RVector up = independent_transmon_levels(t.E_C, t.E_J_over_E_C + h, 0.5, 60, 3);
  const RVector dn = independent_transmon_levels(t.E_C, t.E_J_over_E_C - h, 0.5, 60, 3);
  const double a_ref = (up(2) - dn(2)) / (up(1) - dn(1));
  CHECK(bias_sensitivity(t, BiasParameter::EJ_over_EC, h).correlation_a == doctest::Approx(a_ref).epsilon(1e-5));
}

TEST_CASE("invalid device parameters are rejected with a path") {
  TransmonSpec t;
  t.E_C = -1.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  FluxQubitSpec f;
  f.charge_cutoff = 0;
  CHECK_THROWS_AS(f.validate(), ConfigError);
  CHECK_THROWS_AS(parse_bias_parameter("voltage"), ConfigError);
}

}  // TEST_SUITE
