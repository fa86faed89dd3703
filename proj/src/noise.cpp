#include "stirap/noise.hpp"

#include <cmath>
#include <limits>

#include "stirap/parallel.hpp"
#include "stirap/rng.hpp"

namespace stirap {

void CoherenceTimes::validate() const {
  if (!(T1 > 0.0)) throw ConfigError("noise.T1_us", "must be positive");
  if (!(T2_star > 0.0)) throw ConfigError("noise.T2_star_us", "must be positive");
  if (T2_star > 2.0 * T1 * (1.0 + 1e-12)) throw ConfigError("noise.T2_star_us", "unphysical: T2* exceeds 2 T1");
}

double CoherenceTimes::T2_prime() const {
  validate();
  const double rate = 1.0 / T2_star - 1.0 / (2.0 * T1);
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / rate;
}

double sigma_from_coherence(const CoherenceTimes& ct) {
  const double t2p = ct.T2_prime();
  if (std::isinf(t2p)) return 0.0;
  return std::sqrt(2.0) / t2p;
}

void QuasistaticNoise::validate() const {
  if (!(sigma_delta >= 0.0) || !std::isfinite(sigma_delta)) throw ConfigError("noise.sigma_delta", "must be >= 0");
  if (!std::isfinite(correlation_a)) throw ConfigError("noise.correlation_a", "must be finite");
  if (n_samples < 1) throw ConfigError("noise.n_samples", "must be >= 1");
}

std::vector<DetuningSample> sample_detunings(const QuasistaticNoise& n) {
  n.validate();
  std::vector<DetuningSample> out(n.n_samples);
  auto rng = make_rng(n.seed, Stream::noise, 0);
  for (auto& s : out) {
    const double z = standard_normal(rng);
    s.delta_tilde = n.sigma_delta * z;
    s.delta_p_tilde = n.correlation_a * s.delta_tilde;
  }
  return out;
}

DeviceModel inject_detunings(const DeviceModel& device, double delta_tilde, double delta_p_tilde) {
  if (device.n_levels < 3) throw ConfigError("device.n_levels", "detuning injection needs three levels");
  DeviceModel d = device;
  d.energies(1) += delta_tilde;
  d.energies(2) += delta_p_tilde;
  return d;
}

HamiltonianFn inject_detunings(const HamiltonianFn& h, double delta_tilde, double delta_p_tilde) {
  if (h.dimension < 3) throw ConfigError("model", "detuning injection needs three levels");
  if (delta_tilde == 0.0 && delta_p_tilde == 0.0) return h;
  HamiltonianFn out = h;
  out.eval = [base = h.eval, delta_tilde, delta_p_tilde](double t) {
    CMatrix m = base(t);
    m(1, 1) += delta_tilde;
    m(2, 2) += delta_p_tilde;
    return m;
  };
  return out;
}

std::string to_string(NoiseEstimator e) {
  return e == NoiseEstimator::lindblad_over_draws ? "lindblad-over-draws" : "paired-mcwf";
}

NoiseEstimator parse_noise_estimator(const std::string& s) {
  if (s == "lindblad-over-draws") return NoiseEstimator::lindblad_over_draws;
  if (s == "paired-mcwf") return NoiseEstimator::paired_mcwf;
  throw ConfigError("noise.estimator", "expected 'lindblad-over-draws' or 'paired-mcwf', got '" + s + "'");
}

namespace {

EvolutionResult solve_one(const HamiltonianFn& h, const CVector& psi0, const TimeGrid& grid,
                          const DissipatorSpec& d, const PropagationOptions& opts) {
  if (d.trivial()) return propagate_unitary(h, psi0, grid, opts);
  return propagate_lindblad(h, d, psi0 * psi0.adjoint(), grid, opts);
}

}  // namespace

AveragedEfficiency averaged_efficiency(const HamiltonianFn& h, const CVector& psi0, const TimeGrid& grid,
                                       const QuasistaticNoise& noise, const DissipatorSpec& dissipator,
                                       NoiseEstimator estimator, std::uint64_t jump_seed,
                                       const PropagationOptions& opts) {
  noise.validate();
  AveragedEfficiency out;
  out.draws = sample_detunings(noise);

  if (estimator == NoiseEstimator::paired_mcwf) {
    const auto& draws = out.draws;
    auto h_for = [&h, &draws](int i) { return inject_detunings(h, draws[i].delta_tilde, draws[i].delta_p_tilde); };
    out.averaged = propagate_mcwf(h_for, dissipator, psi0, noise.n_samples, jump_seed, grid, opts);
    out.mean = out.averaged.efficiency;
    out.standard_error = out.averaged.efficiency_stderr;
    return out;
  }

  if (noise.sigma_delta == 0.0) {
    // Every draw is the unperturbed model.
    out.averaged = solve_one(h, psi0, grid, dissipator, opts);
    out.mean = out.averaged.efficiency;
    out.samples.assign(noise.n_samples, out.mean);
    return out;
  }

  std::vector<EvolutionResult> runs(out.draws.size());
  PropagationOptions inner = opts;
  inner.threads = 1;
  parallel_for(static_cast<long>(runs.size()), opts.threads, [&](long i) {
    const auto& s = out.draws[i];
    runs[i] = solve_one(inject_detunings(h, s.delta_tilde, s.delta_p_tilde), psi0, grid, dissipator, inner);
  });

  const double m = static_cast<double>(runs.size());
  EvolutionResult avg = runs.front();
  avg.populations.setZero();
  avg.readout_populations.setZero();
  avg.max_leakage = avg.max_rho22 = 0.0;
  double s1 = 0.0, s2 = 0.0;
  for (const auto& r : runs) {
    avg.populations += r.populations;
    avg.readout_populations += r.readout_populations;
    avg.max_trace_error = std::max(avg.max_trace_error, r.max_trace_error);
    avg.max_norm_drift = std::max(avg.max_norm_drift, r.max_norm_drift);
    avg.min_eigenvalue = std::min(avg.min_eigenvalue, r.min_eigenvalue);
    out.samples.push_back(r.efficiency);
    s1 += r.efficiency;
    s2 += r.efficiency * r.efficiency;
  }
  avg.populations /= m;
  avg.readout_populations /= m;
  avg.leakage.assign(avg.times.size(), 0.0);
  for (std::size_t i = 0; i < avg.times.size(); ++i) {
    const auto row = avg.populations.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 3; j < row.size(); ++j) avg.leakage[i] += row(j);
    avg.max_leakage = std::max(avg.max_leakage, avg.leakage[i]);
    if (row.size() > 2) avg.max_rho22 = std::max(avg.max_rho22, row(2));
  }
  avg.efficiency = avg.readout_populations(1);
  out.mean = s1 / m;
  out.standard_error = m > 1 ? std::sqrt(std::max(0.0, (s2 - s1 * s1 / m) / (m - 1.0)) / m) : 0.0;
  avg.efficiency_stderr = out.standard_error;
  out.averaged = std::move(avg);
  return out;
}

}  // namespace stirap
