#include "stirap/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace stirap {

std::string to_string(DeviceKind k) { return k == DeviceKind::flux ? "flux" : "transmon"; }

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::full_lab: return "full-lab";
    case ModelKind::rwa_interaction: return "rwa-interaction";
    case ModelKind::effective: return "effective";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  if (s == "full-lab") return ModelKind::full_lab;
  if (s == "rwa-interaction") return ModelKind::rwa_interaction;
  if (s == "effective") return ModelKind::effective;
  throw ConfigError("model", "expected full-lab, rwa-interaction or effective, got '" + s + "'");
}

namespace {

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

/// Typed, path-aware access to one JSON object; rejects keys it was not asked about.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "must be an object");
  }

  bool has(const std::string& key) const {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  double number(const std::string& key) const {
    if (!has(key)) throw ConfigError(join(path_, key), "is required");
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(join(path_, key), "must be finite");
    return x;
  }
  double number(const std::string& key, double def) const { return has(key) ? number(key) : def; }

  long integer(const std::string& key, long def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path_, key), "must be an integer");
    return v.get<long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(join(path_, key), "must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "must be a string");
    return v.get<std::string>();
  }

  const json& raw(const std::string& key) const {
    used_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

const std::map<std::string, std::string>& key_names() {
  static const std::map<std::string, std::string> names = {
      {"device.E_C", "device.E_C_ghz"},         {"pulses.T", "pulses.T_us"},
      {"pulses.Omega0", "pulses.Omega0_mhz"},   {"pulses.Omega_r", "pulses.Omega_r_mhz"},
      {"pulses.delta2", "pulses.delta2_mhz"},
  };
  return names;
}

/// Runs f, reporting library errors under configuration key names. Errors whose
/// path lies outside the section of `fallback` are reported at `fallback`.
template <class F>
auto with_path(const std::string& fallback, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    const std::string& p = e.path();
    const std::string what = std::string(e.what()).substr(p.empty() ? 0 : p.size() + 2);
    const auto it = key_names().find(p);
    if (it != key_names().end()) throw ConfigError(it->second, what);
    const std::string section = fallback.substr(0, fallback.find('.'));
    if (p == section || p.rfind(section + ".", 0) == 0) throw;
    throw ConfigError(fallback, what);
  }
}

DeviceConfig parse_device(const json& j) {
  Section s(j, "device");
  DeviceConfig d;
  const std::string type = s.string("type", "");
  if (type == "flux") {
    d.kind = DeviceKind::flux;
    auto& f = d.flux;
    f.E_C = units::from_ghz(s.number("E_C_ghz", units::to_ghz(f.E_C)));
    f.E_J_over_E_C = s.number("E_J_over_E_C", f.E_J_over_E_C);
    f.junction_asymmetry = s.number("junction_asymmetry", f.junction_asymmetry);
    f.flux_bias_f = s.number("flux_bias_f", f.flux_bias_f);
    f.charge_cutoff = static_cast<int>(s.integer("charge_cutoff", f.charge_cutoff));
    with_path("device", [&] { f.validate(); return 0; });
  } else if (type == "transmon") {
    d.kind = DeviceKind::transmon;
    auto& t = d.transmon;
    t.E_C = units::from_ghz(s.number("E_C_ghz", units::to_ghz(t.E_C)));
    t.E_J_over_E_C = s.number("E_J_over_E_C", t.E_J_over_E_C);
    t.charge_bias_qg = s.number("charge_bias_qg", t.charge_bias_qg);
    t.charge_cutoff = static_cast<int>(s.integer("charge_cutoff", t.charge_cutoff));
    with_path("device", [&] { t.validate(); return 0; });
  } else {
    throw ConfigError("device.type", "expected 'flux' or 'transmon'");
  }
  d.n_levels = static_cast<int>(s.integer("n_levels", 6));
  if (d.n_levels < 3 || d.n_levels > 12) throw ConfigError("device.n_levels", "must lie in [3, 12]");
  s.reject_unknown();
  return d;
}

void parse_pulses(const json& j, RunConfig& c) {
  Section s(j, "pulses");
  auto& p = c.pulses;
  c.prefactor = with_path("pulses.pump_prefactor", [&] { return parse_pump_prefactor(s.string("pump_prefactor", "half")); });

  p.T = s.number("T_us");
  if (!(p.T > 0.0)) throw ConfigError("pulses.T_us", "must be positive");
  if (s.has("tau_us") && s.has("tau_over_T")) throw ConfigError("pulses.tau_us", "give tau_us or tau_over_T, not both");
  p.tau = s.has("tau_us") ? s.number("tau_us") : s.number("tau_over_T", 0.6) * p.T;
  p.r_ratio = s.number("r_ratio", 1.0);
  if (!(p.r_ratio > 0.0)) throw ConfigError("pulses.r_ratio", "must be positive");
  p.delta_p = units::from_mhz(s.number("delta_p_mhz", 0.0));
  p.delta_s = units::from_mhz(s.number("delta_s_mhz", 0.0));

  const bool has_d2 = s.has("delta2_mhz"), has_ratio = s.has("delta2_over_omega_r");
  if (has_d2 == has_ratio) throw ConfigError("pulses.delta2_mhz", "give exactly one of delta2_mhz, delta2_over_omega_r");
  const bool has_or = s.has("Omega_r_mhz"), has_o0 = s.has("Omega0_mhz");
  const double ratio = has_ratio ? s.number("delta2_over_omega_r") : 0.0;
  if (has_ratio && std::abs(ratio) <= 1.0) throw ConfigError("pulses.delta2_over_omega_r", "must exceed 1 in magnitude");

  if (has_or) {
    p.Omega_r = units::from_mhz(s.number("Omega_r_mhz"));
    if (!(p.Omega_r > 0.0)) throw ConfigError("pulses.Omega_r_mhz", "must be positive");
    p.delta2 = has_d2 ? units::from_mhz(s.number("delta2_mhz")) : ratio * p.Omega_r;
  } else {
    if (!has_o0 || !has_ratio)
      throw ConfigError("pulses.Omega_r_mhz", "required unless Omega0_mhz and delta2_over_omega_r are both given");
    const double target = units::from_mhz(s.number("Omega0_mhz"));
    p.Omega_r = with_path("pulses.Omega0_mhz", [&] {
      if (c.device.kind == DeviceKind::flux) return solve_pump_amplitude_flux(target, ratio);
      return solve_pump_amplitude_transmon(target, ratio, device_model(c.device).anharmonicity_alpha, c.prefactor);
    });
    p.delta2 = ratio * p.Omega_r;
  }
  if (p.delta2 == 0.0) throw ConfigError("pulses.delta2_mhz", "must be nonzero");

  if (has_o0) {
    p.Omega0 = units::from_mhz(s.number("Omega0_mhz"));
    if (!(p.Omega0 >= 0.0)) throw ConfigError("pulses.Omega0_mhz", "must be non-negative");
  } else {
    PulseParams unit = p;
    unit.r_ratio = 1.0;
    p.Omega0 = c.device.kind == DeviceKind::flux
                   ? effective_pump_flux_peak(unit)
                   : effective_pump_transmon_peak(unit, device_model(c.device).anharmonicity_alpha, c.prefactor);
  }
  with_path("pulses", [&] { p.validate(); return 0; });
  s.reject_unknown();
}

GridConfig parse_grid(const json& j) {
  Section s(j, "grid");
  GridConfig g;
  g.step = s.number("step_us", 0.0);
  if (g.step < 0.0) throw ConfigError("grid.step_us", "must be >= 0 (0 selects the automatic step)");
  g.points_per_period = s.number("points_per_period", g.points_per_period);
  if (!(g.points_per_period >= 20.0)) throw ConfigError("grid.points_per_period", "must be >= 20");
  g.min_steps = s.integer("min_steps", g.min_steps);
  if (g.min_steps < 1) throw ConfigError("grid.min_steps", "must be >= 1");
  g.output_points = s.integer("output_points", g.output_points);
  if (g.output_points < 2) throw ConfigError("grid.output_points", "must be >= 2");
  g.start_over_T = s.number("start_over_T", g.start_over_T);
  g.end_over_T = s.number("end_over_T", g.end_over_T);
  if (!(g.start_over_T > 0.0)) throw ConfigError("grid.start_over_T", "must be positive");
  if (!(g.end_over_T > -1.0)) throw ConfigError("grid.end_over_T", "window must end after the pump peak minus T");
  if (s.has("readout_over_T")) {
    g.readout_over_T = s.number("readout_over_T");
    if (*g.readout_over_T > g.end_over_T) throw ConfigError("grid.readout_over_T", "must not exceed end_over_T");
  }
  g.integrator = with_path("grid.integrator", [&] { return parse_integrator(s.string("integrator", "magnus4")); });
  const std::string frame = s.string("frame", "interaction");
  if (frame == "interaction") g.full_frame = Frame::interaction;
  else if (frame == "lab") g.full_frame = Frame::lab;
  else throw ConfigError("grid.frame", "expected 'interaction' or 'lab'");
  s.reject_unknown();
  return g;
}

DissipatorSpec parse_open_system(const json& j) {
  Section s(j, "open_system");
  DissipatorSpec d;
  d.T1 = s.number("T1_us");
  d.k = s.number("k");
  with_path("open_system", [&] { d.validate(); return 0; });
  s.reject_unknown();
  return d;
}

NoiseConfig parse_noise(const json& j, const RunConfig& c) {
  Section s(j, "noise");
  NoiseConfig n;
  const int sources = s.has("sigma_delta_mhz") + s.has("sigma_over_omega0") + s.has("T2_star_us");
  if (sources != 1)
    throw ConfigError("noise.sigma_delta_mhz", "give exactly one of sigma_delta_mhz, sigma_over_omega0, T2_star_us");
  if (s.has("sigma_delta_mhz")) {
    n.q.sigma_delta = units::from_mhz(s.number("sigma_delta_mhz"));
  } else if (s.has("sigma_over_omega0")) {
    n.q.sigma_delta = s.number("sigma_over_omega0") * c.pulses.Omega0;
  } else {
    CoherenceTimes ct;
    ct.T2_star = s.number("T2_star_us");
    if (s.has("T1_us")) ct.T1 = s.number("T1_us");
    else if (c.open_system) ct.T1 = c.open_system->T1;
    else throw ConfigError("noise.T1_us", "T2_star_us needs T1 from noise.T1_us or open_system.T1_us");
    n.q.sigma_delta = with_path("noise", [&] { return sigma_from_coherence(ct); });
  }
  if (!(n.q.sigma_delta >= 0.0)) throw ConfigError("noise.sigma_delta_mhz", "must be >= 0");
  if (s.has("correlation_a") && s.raw("correlation_a").is_string()) {
    if (s.raw("correlation_a").get<std::string>() != "auto")
      throw ConfigError("noise.correlation_a", "must be a number or \"auto\"");
    n.auto_correlation = true;
  } else {
    n.q.correlation_a = s.number("correlation_a");
  }
  n.q.n_samples = static_cast<int>(s.integer("n_samples", 10000));
  if (n.q.n_samples < 1) throw ConfigError("noise.n_samples", "must be >= 1");
  n.estimator = with_path("noise.estimator",
                          [&] { return parse_noise_estimator(s.string("estimator", "lindblad-over-draws")); });
  s.reject_unknown();
  return n;
}

std::string device_key(const DeviceConfig& d) {
  std::ostringstream os;
  os.precision(17);
  if (d.kind == DeviceKind::flux)
    os << "flux " << d.flux.E_C << ' ' << d.flux.E_J_over_E_C << ' ' << d.flux.junction_asymmetry << ' '
       << d.flux.flux_bias_f << ' ' << d.flux.charge_cutoff;
  else
    os << "transmon " << d.transmon.E_C << ' ' << d.transmon.E_J_over_E_C << ' ' << d.transmon.charge_bias_qg << ' '
       << d.transmon.charge_cutoff;
  os << ' ' << d.n_levels;
  return os.str();
}

}  // namespace

DeviceConfig parse_device_config(const json& j) { return parse_device(j); }

const DeviceModel& device_model(const DeviceConfig& d) {
  static std::mutex mutex;
  static std::map<std::string, DeviceModel> cache;
  const std::string key = device_key(d);
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  DeviceModel m =
      d.kind == DeviceKind::flux ? flux_device(d.flux, d.n_levels) : transmon_device(d.transmon, d.n_levels);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(m)).first->second;
}

void apply_overrides(json& j, const Overrides& o) {
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  if (o.seed) j["seed"] = *o.seed;
  if (o.model) j["model"] = *o.model;
  if (o.scheme) j["scheme"] = *o.scheme;
  if (o.trajectories) j["trajectories"] = *o.trajectories;
}

RunConfig parse_run_config(const json& j) {
  Section s(j, "");
  const long version = s.integer("version", -1);
  if (version != kConfigVersion) throw ConfigError("version", "unsupported configuration version (expected 1)");
  RunConfig c;
  if (!s.has("device")) throw ConfigError("device", "is required");
  c.device = parse_device(s.raw("device"));
  c.scheme = parse_scheme(s.string("scheme", "flux-chirp"));
  c.model = parse_model(s.string("model", "full-lab"));
  if (c.scheme == Scheme::transmon_chirp && c.device.kind != DeviceKind::transmon)
    throw ConfigError("scheme", "transmon-chirp requires a transmon device");
  if (c.device.kind == DeviceKind::transmon && c.device.n_levels < 4 &&
      (c.scheme == Scheme::transmon_chirp || c.model != ModelKind::full_lab))
    throw ConfigError("device.n_levels", "transmon models need at least four levels");

  if (!s.has("pulses")) throw ConfigError("pulses", "is required");
  parse_pulses(s.raw("pulses"), c);
  if (s.has("open_system")) c.open_system = parse_open_system(s.raw("open_system"));
  if (s.has("noise")) c.noise = parse_noise(s.raw("noise"), c);
  if (s.has("detuning")) {
    Section d(s.raw("detuning"), "detuning");
    c.static_delta_tilde = units::from_mhz(d.number("delta_tilde_mhz", 0.0));
    c.static_delta_p_tilde = units::from_mhz(d.number("delta_p_tilde_mhz", 0.0));
    d.reject_unknown();
  }
  c.grid = s.has("grid") ? parse_grid(s.raw("grid")) : GridConfig{};
  c.trajectories = static_cast<int>(s.integer("trajectories", 0));
  if (c.trajectories < 0) throw ConfigError("trajectories", "must be >= 0");
  if (c.trajectories > 0 && c.trajectories < 100) throw ConfigError("trajectories", "must be 0 or >= 100");
  c.seed = s.unsigned_integer("seed", 0);
  c.threads = static_cast<int>(s.integer("threads", 0));
  if (c.threads < 0) throw ConfigError("threads", "must be >= 0");
  s.reject_unknown();
  return c;
}

json resolved_json(const RunConfig& c) {
  json j;
  j["version"] = kConfigVersion;
  json d;
  d["type"] = to_string(c.device.kind);
  if (c.device.kind == DeviceKind::flux) {
    d["E_C_ghz"] = units::to_ghz(c.device.flux.E_C);
    d["E_J_over_E_C"] = c.device.flux.E_J_over_E_C;
    d["junction_asymmetry"] = c.device.flux.junction_asymmetry;
    d["flux_bias_f"] = c.device.flux.flux_bias_f;
    d["charge_cutoff"] = c.device.flux.charge_cutoff;
  } else {
    d["E_C_ghz"] = units::to_ghz(c.device.transmon.E_C);
    d["E_J_over_E_C"] = c.device.transmon.E_J_over_E_C;
    d["charge_bias_qg"] = c.device.transmon.charge_bias_qg;
    d["charge_cutoff"] = c.device.transmon.charge_cutoff;
  }
  d["n_levels"] = c.device.n_levels;
  j["device"] = d;
  j["scheme"] = to_string(c.scheme);
  j["model"] = to_string(c.model);
  const auto& p = c.pulses;
  j["pulses"] = {{"Omega0_mhz", units::to_mhz(p.Omega0)},
                 {"Omega_r_mhz", units::to_mhz(p.Omega_r)},
                 {"delta2_mhz", units::to_mhz(p.delta2)},
                 {"T_us", p.T},
                 {"tau_us", p.tau},
                 {"r_ratio", p.r_ratio},
                 {"delta_p_mhz", units::to_mhz(p.delta_p)},
                 {"delta_s_mhz", units::to_mhz(p.delta_s)},
                 {"pump_prefactor", to_string(c.prefactor)}};
  if (c.open_system) j["open_system"] = {{"T1_us", c.open_system->T1}, {"k", c.open_system->k}};
  if (c.noise) {
    json n = {{"sigma_delta_mhz", units::to_mhz(c.noise->q.sigma_delta)},
              {"n_samples", c.noise->q.n_samples},
              {"estimator", to_string(c.noise->estimator)}};
    if (c.noise->auto_correlation) n["correlation_a"] = "auto";
    else n["correlation_a"] = c.noise->q.correlation_a;
    j["noise"] = n;
  }
  j["detuning"] = {{"delta_tilde_mhz", units::to_mhz(c.static_delta_tilde)},
                   {"delta_p_tilde_mhz", units::to_mhz(c.static_delta_p_tilde)}};
  json g = {{"step_us", c.grid.step},
            {"points_per_period", c.grid.points_per_period},
            {"min_steps", c.grid.min_steps},
            {"output_points", c.grid.output_points},
            {"start_over_T", c.grid.start_over_T},
            {"end_over_T", c.grid.end_over_T},
            {"integrator", to_string(c.grid.integrator)},
            {"frame", to_string(c.grid.full_frame)}};
  if (c.grid.readout_over_T) g["readout_over_T"] = *c.grid.readout_over_T;
  j["grid"] = g;
  j["trajectories"] = c.trajectories;
  j["seed"] = c.seed;
  return j;
}

std::string config_hash(const json& resolved) {
  const std::string s = resolved.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

void set_path(json& j, const std::string& path, const json& value) {
  json* cur = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "malformed parameter path");
    if (!cur->is_object()) throw ConfigError(path, "path crosses a non-object value");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    if (cur->is_null()) *cur = json::object();
    start = dot + 1;
  }
}

std::vector<double> parse_range(const json& j, const std::string& where, int min_points) {
  Section s(j, where);
  std::vector<double> v;
  if (s.has("values")) {
    const json& arr = s.raw("values");
    if (!arr.is_array()) throw ConfigError(s.path("values"), "must be an array of numbers");
    for (const auto& x : arr) {
      if (!x.is_number()) throw ConfigError(s.path("values"), "must be an array of numbers");
      v.push_back(x.get<double>());
    }
  } else {
    const double lo = s.number("min"), hi = s.number("max");
    const long n = s.integer("n", 0);
    const std::string scale = s.string("scale", "linear");
    if (n < 2) throw ConfigError(s.path("n"), "must be >= 2");
    if (!(hi > lo)) throw ConfigError(s.path("max"), "must exceed min");
    if (scale == "linear") {
      for (long k = 0; k < n; ++k) v.push_back(lo + (hi - lo) * k / (n - 1.0));
    } else if (scale == "log") {
      if (!(lo > 0.0)) throw ConfigError(s.path("min"), "log scale needs a positive range");
      for (long k = 0; k < n; ++k) v.push_back(lo * std::pow(hi / lo, k / (n - 1.0)));
      v.back() = hi;
    } else {
      throw ConfigError(s.path("scale"), "expected 'linear' or 'log'");
    }
  }
  if (static_cast<int>(v.size()) < min_points)
    throw ConfigError(where, "needs at least " + std::to_string(min_points) + " points");
  s.has("path");
  s.reject_unknown();
  return v;
}

SweepAxis parse_axis(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("path") || !j.at("path").is_string())
    throw ConfigError(where + ".path", "is required and must be a string");
  SweepAxis a;
  a.path = j.at("path").get<std::string>();
  a.values = parse_range(j, where, 1);
  return a;
}

}  // namespace stirap
