#include "stirap/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace stirap {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw std::logic_error("CSV row width does not match the header");
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  out += '\n';
  for (const auto& r : rows_) {
    out += r;
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& file) const {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << str();
}

CsvTable timeseries_table(const EvolutionResult& r) {
  const bool traj = r.population_stderr.rows() == static_cast<Eigen::Index>(r.times.size()) &&
                    r.population_stderr.size() > 0;
  std::vector<std::string> h{"time_us", "rho00", "rho11", "rho22", "leakage"};
  if (traj) h.insert(h.end(), {"rho00_stderr", "rho11_stderr", "rho22_stderr"});
  CsvTable t(h);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    std::vector<double> row{r.times[i], r.populations(k, 0), r.populations(k, 1), r.populations(k, 2), r.leakage[i]};
    if (traj)
      for (int j = 0; j < 3; ++j) row.push_back(r.population_stderr(k, j));
    t.add_row(row);
  }
  return t;
}

json run_summary(const RunConfig& c, const Experiment& e, const RunResult& r, bool dump_samples) {
  const json resolved = resolved_json(c);
  json s;
  s["efficiency"] = r.efficiency;
  s["efficiency_stderr"] = r.efficiency_stderr;
  s["max_leakage"] = r.evolution.max_leakage;
  s["max_rho22"] = r.evolution.max_rho22;
  s["config_hash"] = config_hash(resolved);
  s["seed"] = c.seed;
  s["method"] = r.method;
  s["model"] = to_string(c.model);
  s["scheme"] = to_string(c.scheme);
  s["readout_time_us"] = r.evolution.readout_time;
  s["final_populations"] = std::vector<double>(r.evolution.readout_populations.data(),
                                               r.evolution.readout_populations.data() +
                                                   r.evolution.readout_populations.size());
  s["n_steps"] = e.grid.n_steps;
  s["step_us"] = e.grid.step();
  if (r.method == "unitary") s["max_norm_drift"] = r.evolution.max_norm_drift;
  if (r.method == "lindblad" || r.method == "lindblad-over-draws") {
    s["max_trace_error"] = r.evolution.max_trace_error;
    s["min_eigenvalue"] = r.evolution.min_eigenvalue;
  }
  if (r.method == "mcwf" || r.method == "paired-mcwf") {
    s["trajectories"] = r.evolution.n_trajectories;
    s["jump_count"] = r.evolution.jump_count;
    s["max_jump_probability"] = r.evolution.max_jump_probability;
  }
  if (c.noise) {
    s["noise"] = {{"sigma_delta_mhz", units::to_mhz(c.noise->q.sigma_delta)},
                  {"correlation_a", e.correlation_a},
                  {"draws", static_cast<long>(r.samples.size())}};
    if (dump_samples) s["samples"] = r.samples;
  }
  s["config"] = resolved;
  return s;
}

void write_json(const std::filesystem::path& file, const json& j) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << j.dump(2) << '\n';
}

std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

CsvTable spectrum_table(const DeviceModel& m) {
  CsvTable t({"level", "energy_ghz", "transition_ghz", "anharmonicity_mhz"});
  for (int j = 0; j < m.n_levels; ++j) {
    const double e = units::to_ghz(m.energies(j) - m.energies(0));
    const double tr = j > 0 ? units::to_ghz(m.omega(j - 1, j)) : 0.0;
    const double an = j > 1 ? units::to_mhz(m.omega(j - 1, j) - m.omega(j - 2, j - 1)) : 0.0;
    t.add_row({static_cast<double>(j), e, tr, an});
  }
  return t;
}

CsvTable coupling_table(const DeviceModel& m) {
  CsvTable t({"i", "j", "re", "im", "abs"});
  for (int i = 0; i < m.n_levels; ++i)
    for (int j = 0; j < m.n_levels; ++j) {
      const cplx q = m.Q(i, j);
      t.add_row({static_cast<double>(i), static_cast<double>(j), q.real(), q.imag(), std::abs(q)});
    }
  return t;
}

CsvTable waveform_table(const DriveSpec& drive, const TimeGrid& grid) {
  CsvTable t({"time_us", "p1_re", "p1_im", "p2_re", "p2_im", "s_re", "s_im", "omega_p1_mhz", "omega_p2_mhz",
              "omega_s_mhz", "phi_p2_rate_mhz", "phi_s_rate_mhz", "field"});
  const ToneLabel tones[] = {ToneLabel::p1, ToneLabel::p2, ToneLabel::s};
  for (long k = 0; k <= grid.n_steps; k += grid.decimation) {
    const double tt = grid.time(k);
    std::vector<double> row{tt};
    for (ToneLabel l : tones) {
      const cplx env = drive.envelope(l, tt) * std::exp(-kI * drive.phase(l, tt));
      row.push_back(env.real());
      row.push_back(env.imag());
    }
    for (ToneLabel l : tones) row.push_back(units::to_mhz(std::abs(drive.rabi(l, tt))));
    row.push_back(units::to_mhz(drive.phase_rate(ToneLabel::p2, tt)));
    row.push_back(units::to_mhz(drive.phase_rate(ToneLabel::s, tt)));
    row.push_back(drive.field(tt));
    t.add_row(row);
    if (k + grid.decimation > grid.n_steps && k != grid.n_steps) k = grid.n_steps - grid.decimation;
  }
  return t;
}

CsvTable hamiltonian_table(const HamiltonianFn& h, const TimeGrid& grid, const std::string& prefix) {
  std::vector<std::string> header{"time_us"};
  const int n = h.dimension;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const std::string e = prefix + std::to_string(i) + std::to_string(j);
      header.push_back(e + "_re_mhz");
      header.push_back(e + "_im_mhz");
    }
  CsvTable t(header);
  for (long k = 0; k <= grid.n_steps; k += grid.decimation) {
    const double tt = grid.time(k);
    const CMatrix m = h(tt);
    std::vector<double> row{tt};
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        row.push_back(units::to_mhz(m(i, j).real()));
        row.push_back(units::to_mhz(m(i, j).imag()));
      }
    t.add_row(row);
    if (k + grid.decimation > grid.n_steps && k != grid.n_steps) k = grid.n_steps - grid.decimation;
  }
  return t;
}

CsvTable detuning_map_table(const DetuningSweepSpec& spec, const DetuningSweepResult& r) {
  CsvTable t({"r_ratio", "delta_tilde_mhz", "delta_p_tilde_mhz", "efficiency"});
  for (const auto& m : r.maps)
    for (std::size_t i = 0; i < spec.delta_tilde_mhz.size(); ++i)
      for (std::size_t k = 0; k < spec.delta_p_tilde_mhz.size(); ++k)
        t.add_row({m.r_ratio, spec.delta_tilde_mhz[i], spec.delta_p_tilde_mhz[k],
                   m.efficiency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))});
  return t;
}

CsvTable detuning_line_table(const DetuningSweepSpec& spec, const DetuningSweepResult& r) {
  CsvTable t({"r_ratio", "delta_tilde_mhz", "delta_p_tilde_mhz", "efficiency"});
  for (const auto& m : r.maps)
    for (std::size_t i = 0; i < spec.line_delta_tilde_mhz.size(); ++i) {
      const double x = spec.line_delta_tilde_mhz[i];
      t.add_row({m.r_ratio, x, spec.line_slope * x, m.line_efficiency[i]});
    }
  return t;
}

CsvTable detuning_contour_table(const DetuningSweepResult& r) {
  CsvTable t({"r_ratio", "delta_tilde_mhz", "delta_p_tilde_mhz"});
  for (const auto& m : r.maps)
    for (const auto& p : m.contour) t.add_row({m.r_ratio, p.x, p.y});
  return t;
}

json detuning_summary(const DetuningSweepSpec& spec, const DetuningSweepResult& r) {
  json s;
  s["config_hash"] = r.config_hash;
  s["threshold"] = spec.threshold;
  s["line_slope"] = spec.line_slope;
  s["strictly_nested"] = r.strictly_nested;
  for (const auto& m : r.maps) {
    s["maps"].push_back({{"r_ratio", m.r_ratio},
                         {"origin_efficiency", m.origin_efficiency},
                         {"region_fraction", m.region_fraction},
                         {"line_lower_mhz", m.line.lower_mhz},
                         {"line_upper_mhz", m.line.upper_mhz},
                         {"line_lower_clipped", m.line.lower_clipped},
                         {"line_upper_clipped", m.line.upper_clipped},
                         {"line_contains_origin", m.line.contains_origin},
                         {"contour_points", static_cast<long>(m.contour.size())}});
  }
  return s;
}

CsvTable duration_table(const DurationSweepResult& r) {
  CsvTable t({"omega_r_mhz", "omega0_flux_mhz", "T_flux_us", "omega0_transmon_mhz", "T_transmon_us"});
  for (const auto& p : r.points)
    t.add_row({p.omega_r_mhz, p.omega0_flux_mhz, p.T_flux_us, p.omega0_transmon_mhz, p.T_transmon_us});
  return t;
}

json duration_summary(const DurationSweepSpec& spec, const DurationSweepResult& r) {
  bool above = true, decreasing = true;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    above = above && r.points[i].T_transmon_us > r.points[i].T_flux_us;
    if (i) decreasing = decreasing && r.points[i].T_transmon_us < r.points[i - 1].T_transmon_us;
  }
  json s;
  s["config_hash"] = r.config_hash;
  s["alpha_mhz"] = r.alpha_mhz;
  s["delta2_over_omega_r"] = spec.delta2_over_omega_r;
  s["T_transmon_saturation_us"] = r.T_transmon_saturation_us;
  s["T_flux_at_200_mhz_us"] = duration_flux(units::from_mhz(200.0), spec.delta2_over_omega_r, spec.duration_factor);
  s["transmon_above_flux"] = above;
  s["transmon_decreasing"] = decreasing;
  if (!r.points.empty())
    s["transmon_last_over_saturation"] = r.points.back().T_transmon_us / r.T_transmon_saturation_us;
  return s;
}

CsvTable t2_table(const T2SweepResult& r) {
  CsvTable t({"r_ratio", "T2_star_us", "T2_prime_us", "sigma_delta_mhz", "efficiency", "efficiency_stderr"});
  for (const auto& p : r.points)
    t.add_row({p.r_ratio, p.T2_star_us, p.T2_prime_us, p.sigma_delta_mhz, p.efficiency, p.efficiency_stderr});
  return t;
}

json t2_summary(const T2SweepSpec& spec, const T2SweepResult& r) {
  json s;
  s["config_hash"] = r.config_hash;
  s["threshold"] = spec.threshold;
  s["r_values"] = spec.r_values;
  json crossings = json::array();
  for (double x : r.threshold_T2_prime_us) crossings.push_back(std::isfinite(x) ? json(x) : json(nullptr));
  s["threshold_T2_prime_us"] = crossings;
  s["upper_dominates"] = r.upper_dominates;
  return s;
}

}  // namespace stirap
