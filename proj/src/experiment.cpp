#include "stirap/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stirap/parallel.hpp"

namespace stirap {

HamiltonianFn model_hamiltonian(const RunConfig& c, const DeviceModel& device, const DriveSpec& drive) {
  const bool transmon = c.device.kind == DeviceKind::transmon;
  switch (c.model) {
    case ModelKind::full_lab: return full_device_hamiltonian(device, drive, c.grid.full_frame);
    case ModelKind::rwa_interaction: return rwa_model(device, drive, transmon);
    case ModelKind::effective:
      return transmon ? h_eff_transmon(device, drive, c.prefactor) : h_eff_flux(drive);
  }
  throw ConfigError("model", "unknown model");
}

double device_noise_correlation(const DeviceConfig& d) {
  constexpr double kStep = 1e-3;
  const auto s = d.kind == DeviceKind::flux ? bias_sensitivity(d.flux, BiasParameter::EJ_over_EC, kStep)
                                            : bias_sensitivity(d.transmon, BiasParameter::EJ_over_EC, kStep);
  return s.correlation_a;
}

Experiment build_experiment(const RunConfig& c) {
  Experiment e;
  e.config = c;
  e.device = &device_model(c.device);
  const ChirpLaw chirp = chirp_for_scheme(c.scheme, *e.device, c.pulses);
  e.drive = assemble_drive(*e.device, c.pulses, chirp, c.scheme);
  e.model = inject_detunings(model_hamiltonian(c, *e.device, e.drive), c.static_delta_tilde, c.static_delta_p_tilde);

  double t0 = 0.0, t1 = 0.0;
  pulse_window(c.pulses, c.grid.start_over_T, c.grid.end_over_T, t0, t1);
  double step = c.grid.step > 0.0 ? c.grid.step : auto_step(e.model, t0, t1, c.grid.points_per_period);
  step = std::min(step, (t1 - t0) / static_cast<double>(c.grid.min_steps));
  e.grid = TimeGrid::with_max_step(t0, t1, step, c.grid.output_points);

  e.options.integrator = c.grid.integrator;
  e.options.points_per_period = c.grid.points_per_period;
  e.options.threads = c.threads;
  if (c.grid.readout_over_T) e.options.readout_time = c.pulses.tau + *c.grid.readout_over_T * c.pulses.T;

  e.psi0 = basis_state(e.model.dimension, 0);
  if (c.noise) e.correlation_a = c.noise->auto_correlation ? device_noise_correlation(c.device) : c.noise->q.correlation_a;
  return e;
}

RunResult run_experiment(const Experiment& e) {
  const RunConfig& c = e.config;
  RunResult out;
  const DissipatorSpec dissipator = c.open_system.value_or(DissipatorSpec{});

  if (c.noise) {
    QuasistaticNoise q = c.noise->q;
    q.seed = c.seed;
    q.correlation_a = e.correlation_a;
    if (c.noise->estimator == NoiseEstimator::paired_mcwf && c.trajectories > 0) q.n_samples = c.trajectories;
    AveragedEfficiency avg =
        averaged_efficiency(e.model, e.psi0, e.grid, q, dissipator, c.noise->estimator, c.seed, e.options);
    out.method = to_string(c.noise->estimator);
    out.efficiency = avg.mean;
    out.efficiency_stderr = avg.standard_error;
    out.samples = std::move(avg.samples);
    out.evolution = std::move(avg.averaged);
    return out;
  }

  if (!dissipator.trivial()) {
    if (c.trajectories > 0) {
      out.method = "mcwf";
      out.evolution = propagate_mcwf(e.model, dissipator, e.psi0, c.trajectories, c.seed, e.grid, e.options);
    } else {
      out.method = "lindblad";
      out.evolution = propagate_lindblad(e.model, dissipator, e.psi0 * e.psi0.adjoint(), e.grid, e.options);
    }
  } else {
    out.method = "unitary";
    out.evolution = propagate_unitary(e.model, e.psi0, e.grid, e.options);
  }
  out.efficiency = out.evolution.efficiency;
  out.efficiency_stderr = out.evolution.efficiency_stderr;
  return out;
}

namespace {

void require_version(const json& j) {
  if (!j.is_object()) throw ConfigError("", "sweep configuration must be a JSON object");
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != kConfigVersion)
    throw ConfigError("version", "unsupported configuration version (expected 1)");
}

const json& require_object(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_object()) throw ConfigError(path, "is required and must be an object");
  return j.at(key);
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
      throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

double number_or(const json& j, const std::string& key, const std::string& path, double def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number()) throw ConfigError(path + "." + key, "must be a number");
  return j.at(key).get<double>();
}

std::vector<double> r_values_of(const json& s, const std::string& path, std::vector<double> def) {
  if (!s.contains("r_values")) return def;
  const json& a = s.at("r_values");
  if (!a.is_array() || a.empty()) throw ConfigError(path + ".r_values", "must be a non-empty array of numbers");
  std::vector<double> r;
  for (const auto& x : a) {
    if (!x.is_number() || !(x.get<double>() > 0.0))
      throw ConfigError(path + ".r_values", "entries must be positive numbers");
    r.push_back(x.get<double>());
  }
  return r;
}

double check_threshold(double t, const std::string& path) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError(path, "must lie in (0, 1)");
  return t;
}

RunConfig parse_base(const json& b) {
  try {
    return parse_run_config(b);
  } catch (const ConfigError& e) {
    const std::string what = std::string(e.what()).substr(e.path().empty() ? 0 : e.path().size() + 2);
    throw ConfigError(e.path().empty() ? "base" : "base." + e.path(), what);
  }
}

RunConfig parse_with_r(const json& base, double r) {
  json b = base;
  set_path(b, "pulses.r_ratio", r);
  return parse_base(b);
}

std::vector<double> range_of(const json& s, const std::string& key, const std::string& path, int min_points) {
  if (!s.contains(key)) throw ConfigError(path + "." + key, "is required");
  return parse_range(s.at(key), path + "." + key, min_points);
}

void require_increasing(const std::vector<double>& v, const std::string& path) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw ConfigError(path, "values must be strictly increasing");
}

}  // namespace

// ---------------------------------------------------------------- detuning map

DetuningSweepSpec parse_detuning_sweep(const json& j) {
  require_version(j);
  reject_unknown(j, "", {"version", "base", "sweep"});
  DetuningSweepSpec spec;
  spec.base = require_object(j, "base", "base");
  const json& s = require_object(j, "sweep", "sweep");
  reject_unknown(s, "sweep", {"delta_tilde_mhz", "delta_p_tilde_mhz", "r_values", "line", "threshold"});
  spec.delta_tilde_mhz = range_of(s, "delta_tilde_mhz", "sweep", 2);
  spec.delta_p_tilde_mhz = range_of(s, "delta_p_tilde_mhz", "sweep", 2);
  require_increasing(spec.delta_tilde_mhz, "sweep.delta_tilde_mhz");
  require_increasing(spec.delta_p_tilde_mhz, "sweep.delta_p_tilde_mhz");
  spec.r_values = r_values_of(s, "sweep", spec.r_values);
  spec.threshold = check_threshold(number_or(s, "threshold", "sweep", spec.threshold), "sweep.threshold");
  spec.line_delta_tilde_mhz = spec.delta_tilde_mhz;
  if (s.contains("line")) {
    const json& l = s.at("line");
    if (!l.is_object()) throw ConfigError("sweep.line", "must be an object");
    reject_unknown(l, "sweep.line", {"slope", "delta_tilde_mhz"});
    spec.line_slope = number_or(l, "slope", "sweep.line", spec.line_slope);
    if (l.contains("delta_tilde_mhz")) spec.line_delta_tilde_mhz = range_of(l, "delta_tilde_mhz", "sweep.line", 3);
    require_increasing(spec.line_delta_tilde_mhz, "sweep.line.delta_tilde_mhz");
  }
  for (double r : spec.r_values) parse_with_r(spec.base, r);
  return spec;
}

LineInterval threshold_interval(const std::vector<double>& x, const std::vector<double>& e, double threshold) {
  if (x.size() != e.size() || x.empty()) throw ConfigError("line", "abscissae and efficiencies must match");
  LineInterval out;
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (std::abs(x[i]) < std::abs(x[i0])) i0 = i;
  if (e[i0] < threshold) return out;
  out.contains_origin = true;
  auto crossing = [&](std::size_t below, std::size_t above) {
    return x[below] + (threshold - e[below]) * (x[above] - x[below]) / (e[above] - e[below]);
  };
  std::size_t lo = i0;
  while (lo > 0 && e[lo - 1] >= threshold) --lo;
  if (lo == 0) {
    out.lower_mhz = x.front();
    out.lower_clipped = true;
  } else {
    out.lower_mhz = crossing(lo - 1, lo);
  }
  std::size_t hi = i0;
  while (hi + 1 < x.size() && e[hi + 1] >= threshold) ++hi;
  if (hi + 1 == x.size()) {
    out.upper_mhz = x.back();
    out.upper_clipped = true;
  } else {
    out.upper_mhz = crossing(hi + 1, hi);
  }
  return out;
}

std::vector<ContourPoint> contour_points(const std::vector<double>& x, const std::vector<double>& y, const RMatrix& z,
                                         double level) {
  std::vector<ContourPoint> pts;
  const auto nx = static_cast<Eigen::Index>(x.size()), ny = static_cast<Eigen::Index>(y.size());
  auto cross = [&](double a, double b) { return (a - level) * (b - level) < 0.0 || (a == level && b != level); };
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index k = 0; k < ny; ++k) {
      if (i + 1 < nx && cross(z(i, k), z(i + 1, k))) {
        const double f = (level - z(i, k)) / (z(i + 1, k) - z(i, k));
        pts.push_back({x[i] + f * (x[i + 1] - x[i]), y[k]});
      }
      if (k + 1 < ny && cross(z(i, k), z(i, k + 1))) {
        const double f = (level - z(i, k)) / (z(i, k + 1) - z(i, k));
        pts.push_back({x[i], y[k] + f * (y[k + 1] - y[k])});
      }
    }
  }
  return pts;
}

DetuningSweepResult sweep_detuning(const DetuningSweepSpec& spec, int threads) {
  const std::size_t nx = spec.delta_tilde_mhz.size(), ny = spec.delta_p_tilde_mhz.size();
  const std::size_t nl = spec.line_delta_tilde_mhz.size(), per_r = nx * ny + nl;

  std::vector<RunConfig> bases;
  for (double r : spec.r_values) {
    bases.push_back(parse_with_r(spec.base, r));
    bases.back().threads = 1;
  }

  std::vector<double> eff(per_r * bases.size());
  parallel_for(static_cast<long>(eff.size()), threads, [&](long idx) {
    const std::size_t b = idx / per_r, k = idx % per_r;
    RunConfig c = bases[b];
    double dt = 0.0, dp = 0.0;
    if (k < nx * ny) {
      dt = spec.delta_tilde_mhz[k / ny];
      dp = spec.delta_p_tilde_mhz[k % ny];
    } else {
      dt = spec.line_delta_tilde_mhz[k - nx * ny];
      dp = spec.line_slope * dt;
    }
    c.static_delta_tilde += units::from_mhz(dt);
    c.static_delta_p_tilde += units::from_mhz(dp);
    eff[idx] = run_config(c).efficiency;
  });

  DetuningSweepResult out;
  for (std::size_t b = 0; b < bases.size(); ++b) {
    DetuningMap m;
    m.r_ratio = spec.r_values[b];
    m.efficiency.resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
    long above = 0;
    for (std::size_t k = 0; k < nx * ny; ++k) {
      const double v = eff[b * per_r + k];
      m.efficiency(static_cast<Eigen::Index>(k / ny), static_cast<Eigen::Index>(k % ny)) = v;
      above += v >= spec.threshold;
    }
    m.region_fraction = static_cast<double>(above) / static_cast<double>(nx * ny);
    m.line_efficiency.assign(eff.begin() + static_cast<long>(b * per_r + nx * ny),
                             eff.begin() + static_cast<long>((b + 1) * per_r));
    m.line = threshold_interval(spec.line_delta_tilde_mhz, m.line_efficiency, spec.threshold);
    m.contour = contour_points(spec.delta_tilde_mhz, spec.delta_p_tilde_mhz, m.efficiency, spec.threshold);
    RunConfig origin = bases[b];
    origin.threads = threads;
    m.origin_efficiency = run_config(origin).efficiency;
    out.maps.push_back(std::move(m));
  }

  out.strictly_nested = out.maps.size() > 1;
  for (std::size_t b = 0; b + 1 < out.maps.size(); ++b) {
    const auto& inner = out.maps[b].line;
    const auto& outer = out.maps[b + 1].line;
    const bool nested = inner.contains_origin && outer.contains_origin && !outer.lower_clipped &&
                        !outer.upper_clipped && outer.lower_mhz < inner.lower_mhz && outer.upper_mhz > inner.upper_mhz;
    out.strictly_nested = out.strictly_nested && nested;
  }

  json h = {{"kind", "sweep-detuning"},
            {"delta_tilde_mhz", spec.delta_tilde_mhz},
            {"delta_p_tilde_mhz", spec.delta_p_tilde_mhz},
            {"r_values", spec.r_values},
            {"line_slope", spec.line_slope},
            {"line_delta_tilde_mhz", spec.line_delta_tilde_mhz},
            {"threshold", spec.threshold}};
  for (const auto& c : bases) h["base"].push_back(resolved_json(c));
  out.config_hash = config_hash(h);
  return out;
}

// ------------------------------------------------------------ duration scaling

double duration_flux(double omega_r, double delta2_over_omega_r, double factor) {
  PulseParams p;
  p.T = 1.0;
  p.Omega_r = omega_r;
  p.delta2 = delta2_over_omega_r * omega_r;
  return factor / effective_pump_flux_peak(p);
}

double duration_transmon(double omega_r, double delta2_over_omega_r, double alpha, double factor,
                         PumpPrefactor prefactor) {
  PulseParams p;
  p.T = 1.0;
  p.Omega_r = omega_r;
  p.delta2 = delta2_over_omega_r * omega_r;
  return factor / effective_pump_transmon_peak(p, alpha, prefactor);
}

DurationSweepSpec parse_duration_sweep(const json& j) {
  require_version(j);
  reject_unknown(j, "", {"version", "device", "sweep"});
  DurationSweepSpec spec;
  spec.transmon = parse_device_config(require_object(j, "device", "device"));
  if (spec.transmon.kind != DeviceKind::transmon) throw ConfigError("device.type", "duration sweep needs a transmon");
  const json& s = require_object(j, "sweep", "sweep");
  reject_unknown(s, "sweep", {"omega_r_mhz", "delta2_over_omega_r", "duration_factor", "pump_prefactor"});
  spec.omega_r_mhz = range_of(s, "omega_r_mhz", "sweep", 2);
  for (double w : spec.omega_r_mhz)
    if (!(w > 0.0)) throw ConfigError("sweep.omega_r_mhz", "values must be positive");
  spec.delta2_over_omega_r = number_or(s, "delta2_over_omega_r", "sweep", spec.delta2_over_omega_r);
  if (!(std::abs(spec.delta2_over_omega_r) > 1.0))
    throw ConfigError("sweep.delta2_over_omega_r", "must exceed 1 in magnitude");
  spec.duration_factor = number_or(s, "duration_factor", "sweep", spec.duration_factor);
  if (!(spec.duration_factor > 0.0)) throw ConfigError("sweep.duration_factor", "must be positive");
  if (s.contains("pump_prefactor")) {
    if (!s.at("pump_prefactor").is_string()) throw ConfigError("sweep.pump_prefactor", "must be a string");
    spec.prefactor = parse_pump_prefactor(s.at("pump_prefactor").get<std::string>());
  }
  return spec;
}

DurationSweepResult sweep_duration(const DurationSweepSpec& spec) {
  DurationSweepResult out;
  const double alpha = device_model(spec.transmon).anharmonicity_alpha;
  out.alpha_mhz = units::to_mhz(alpha);
  const double c = spec.prefactor == PumpPrefactor::half ? 2.0 : 4.0;
  const double ratio = spec.delta2_over_omega_r;
  out.T_transmon_saturation_us = spec.duration_factor * c * ratio * ratio / std::abs(alpha);
  for (double w_mhz : spec.omega_r_mhz) {
    const double w = units::from_mhz(w_mhz);
    DurationPoint p;
    p.omega_r_mhz = w_mhz;
    p.T_flux_us = duration_flux(w, ratio, spec.duration_factor);
    p.T_transmon_us = duration_transmon(w, ratio, alpha, spec.duration_factor, spec.prefactor);
    p.omega0_flux_mhz = units::to_mhz(spec.duration_factor / p.T_flux_us);
    p.omega0_transmon_mhz = units::to_mhz(spec.duration_factor / p.T_transmon_us);
    out.points.push_back(p);
  }
  json d = resolved_json([&] {
    RunConfig rc;
    rc.device = spec.transmon;
    return rc;
  }())["device"];
  json h = {{"kind", "sweep-duration"},
            {"device", d},
            {"omega_r_mhz", spec.omega_r_mhz},
            {"delta2_over_omega_r", ratio},
            {"duration_factor", spec.duration_factor},
            {"pump_prefactor", to_string(spec.prefactor)}};
  out.config_hash = config_hash(h);
  return out;
}

// ----------------------------------------------------------- coherence scaling

namespace {

json with_t2(const json& base, double r, double t2_star) {
  json b = base;
  set_path(b, "pulses.r_ratio", r);
  json& n = b["noise"];
  n.erase("sigma_delta_mhz");
  n.erase("sigma_over_omega0");
  n["T2_star_us"] = t2_star;
  return b;
}

}  // namespace

T2SweepSpec parse_t2_sweep(const json& j) {
  require_version(j);
  reject_unknown(j, "", {"version", "base", "sweep"});
  T2SweepSpec spec;
  spec.base = require_object(j, "base", "base");
  if (!spec.base.contains("open_system")) throw ConfigError("base.open_system", "is required for a coherence sweep");
  if (!spec.base.contains("noise") || !spec.base.at("noise").is_object())
    throw ConfigError("base.noise", "is required for a coherence sweep");
  const json& s = require_object(j, "sweep", "sweep");
  reject_unknown(s, "sweep", {"T2_star_us", "r_values", "threshold"});
  spec.T2_star_us = range_of(s, "T2_star_us", "sweep", 2);
  require_increasing(spec.T2_star_us, "sweep.T2_star_us");
  spec.r_values = r_values_of(s, "sweep", spec.r_values);
  spec.threshold = check_threshold(number_or(s, "threshold", "sweep", spec.threshold), "sweep.threshold");
  for (double r : spec.r_values) {
    const RunConfig c = parse_base(with_t2(spec.base, r, spec.T2_star_us.front()));
    if (c.device.kind != DeviceKind::transmon) throw ConfigError("base.device.type", "coherence sweep needs a transmon");
    parse_base(with_t2(spec.base, r, spec.T2_star_us.back()));
  }
  return spec;
}

T2SweepResult sweep_t2(const T2SweepSpec& spec, int threads) {
  const std::size_t nt = spec.T2_star_us.size(), nr = spec.r_values.size();
  std::vector<RunConfig> configs;
  for (double r : spec.r_values)
    for (double t2 : spec.T2_star_us) {
      configs.push_back(parse_base(with_t2(spec.base, r, t2)));
      configs.back().threads = 1;
    }

  T2SweepResult out;
  out.points.resize(configs.size());
  parallel_for(static_cast<long>(configs.size()), threads, [&](long i) {
    const RunConfig& c = configs[i];
    const RunResult res = run_config(c);
    T2Point& p = out.points[i];
    p.r_ratio = c.pulses.r_ratio;
    p.T2_star_us = spec.T2_star_us[i % nt];
    p.T2_prime_us = CoherenceTimes{c.open_system->T1, p.T2_star_us}.T2_prime();
    p.sigma_delta_mhz = units::to_mhz(c.noise->q.sigma_delta);
    p.efficiency = res.efficiency;
    p.efficiency_stderr = res.efficiency_stderr;
  });

  for (std::size_t b = 0; b < nr; ++b) {
    double crossing = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k + 1 < nt; ++k) {
      const T2Point& a = out.points[b * nt + k];
      const T2Point& z = out.points[b * nt + k + 1];
      if (a.efficiency < spec.threshold && z.efficiency >= spec.threshold) {
        if (std::isinf(z.T2_prime_us)) crossing = a.T2_prime_us;
        else
          crossing = a.T2_prime_us + (spec.threshold - a.efficiency) * (z.T2_prime_us - a.T2_prime_us) /
                                         (z.efficiency - a.efficiency);
        break;
      }
    }
    out.threshold_T2_prime_us.push_back(crossing);
  }

  out.upper_dominates = nr > 1;
  for (std::size_t b = 0; b + 1 < nr; ++b)
    for (std::size_t k = 0; k < nt; ++k) {
      const T2Point& lo = out.points[b * nt + k];
      const T2Point& hi = out.points[(b + 1) * nt + k];
      const double tol = 2.0 * std::hypot(lo.efficiency_stderr, hi.efficiency_stderr);
      if (hi.efficiency < lo.efficiency - tol) out.upper_dominates = false;
    }

  json h = {{"kind", "sweep-t2"}, {"T2_star_us", spec.T2_star_us}, {"r_values", spec.r_values},
            {"threshold", spec.threshold}};
  for (const auto& c : configs) h["points"].push_back(resolved_json(c));
  out.config_hash = config_hash(h);
  return out;
}

}  // namespace stirap
