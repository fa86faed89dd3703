#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stirap/config.hpp"
#include "stirap/experiment.hpp"
#include "stirap/output.hpp"

using namespace stirap;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::string> scheme;
  std::optional<int> trajectories;
  std::optional<int> threads;
  bool dump_samples = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "random seed (overrides the configuration)");
  sub->add_option("--model", o.model, "full-lab | rwa-interaction | effective");
  sub->add_option("--scheme", o.scheme, "flux-chirp | transmon-chirp | no-chirp");
  sub->add_option("--trajectories", o.trajectories, "quantum-jump trajectories (0 selects the density matrix)");
  sub->add_option("--threads", o.threads, "worker threads (0 uses every core)");
  sub->add_flag("--dump-samples", o.dump_samples, "include per-draw efficiencies in the summary");
}

Overrides overrides_of(const Options& o) { return Overrides{o.seed, o.model, o.scheme, o.trajectories}; }

RunConfig load_run(const Options& o) {
  json j = load_json_file(o.config);
  apply_overrides(j, overrides_of(o));
  if (o.threads) j["threads"] = *o.threads;
  return parse_run_config(j);
}

/// Loads a sweep file with the run overrides applied to its base configuration.
json load_sweep(const Options& o) {
  json j = load_json_file(o.config);
  if (j.is_object() && j.contains("base")) apply_overrides(j["base"], overrides_of(o));
  return j;
}

int threads_of(const Options& o) { return o.threads.value_or(0); }

void report(const std::filesystem::path& file) { std::cout << "wrote " << file.string() << '\n'; }

int device_spectrum(const Options& o) {
  const json j = load_json_file(o.config);
  if (!j.is_object() || !j.contains("device")) throw ConfigError("device", "is required");
  const DeviceConfig d = parse_device_config(j.at("device"));
  const DeviceModel& m = device_model(d);
  const auto dir = prepare_output_dir(o.out);
  const CsvTable spec = spectrum_table(m);
  std::cout << spec.str();
  spec.write(dir / "spectrum.csv");
  coupling_table(m).write(dir / "coupling.csv");
  json s = {{"type", to_string(d.kind)},
            {"n_levels", m.n_levels},
            {"omega01_ghz", units::to_ghz(m.omega(0, 1))},
            {"alpha_mhz", units::to_mhz(m.anharmonicity_alpha)},
            {"beta_mhz", units::to_mhz(m.anharmonicity_beta)},
            {"warnings", m.warnings}};
  write_json(dir / "summary.json", s);
  report(dir / "spectrum.csv");
  return 0;
}

TimeGrid sample_grid(const RunConfig& c) {
  double t0 = 0.0, t1 = 0.0;
  pulse_window(c.pulses, c.grid.start_over_T, c.grid.end_over_T, t0, t1);
  TimeGrid g;
  g.t0 = t0;
  g.t1 = t1;
  g.n_steps = c.grid.output_points;
  g.decimation = 1;
  return g;
}

int emit_waveform(const Options& o) {
  const RunConfig c = load_run(o);
  const Experiment e = build_experiment(c);
  const auto dir = prepare_output_dir(o.out);
  waveform_table(e.drive, sample_grid(c)).write(dir / "waveform.csv");
  json s = {{"config_hash", config_hash(resolved_json(c))},
            {"slow_modulation_ratio", slow_modulation_ratio(e.drive.chirp, c.pulses)},
            {"warnings", c.pulses.warnings()}};
  for (ToneLabel l : {ToneLabel::p1, ToneLabel::p2, ToneLabel::s}) {
    const Tone& t = e.drive.tone(l);
    const char* name = l == ToneLabel::p1 ? "p1" : l == ToneLabel::p2 ? "p2" : "s";
    s["tones"][name] = {{"carrier_ghz", units::to_ghz(t.carrier)}, {"amplitude_peak", t.amplitude_peak}};
  }
  write_json(dir / "summary.json", s);
  report(dir / "waveform.csv");
  return 0;
}

int effective_hamiltonian(const Options& o) {
  RunConfig c = load_run(o);
  c.model = ModelKind::effective;
  const Experiment e = build_experiment(c);
  const auto dir = prepare_output_dir(o.out);
  hamiltonian_table(e.model, sample_grid(c)).write(dir / "effective_hamiltonian.csv");
  write_json(dir / "summary.json", {{"config_hash", config_hash(resolved_json(c))},
                                    {"frame", to_string(e.model.frame)},
                                    {"dimension", e.model.dimension}});
  report(dir / "effective_hamiltonian.csv");
  return 0;
}

int run(const Options& o) {
  const RunConfig c = load_run(o);
  const Experiment e = build_experiment(c);
  const RunResult r = run_experiment(e);
  const auto dir = prepare_output_dir(o.out);
  timeseries_table(r.evolution).write(dir / "timeseries.csv");
  write_json(dir / "summary.json", run_summary(c, e, r, o.dump_samples));
  std::printf("efficiency %.6f +- %.6f  max_leakage %.3e  max_rho22 %.4f  (%s, %s)\n", r.efficiency,
              r.efficiency_stderr, r.evolution.max_leakage, r.evolution.max_rho22, to_string(c.model).c_str(),
              r.method.c_str());
  report(dir / "summary.json");
  return 0;
}

int sweep_detuning_cmd(const Options& o) {
  const DetuningSweepSpec spec = parse_detuning_sweep(load_sweep(o));
  const DetuningSweepResult r = sweep_detuning(spec, threads_of(o));
  const auto dir = prepare_output_dir(o.out);
  detuning_map_table(spec, r).write(dir / "detuning_map.csv");
  detuning_line_table(spec, r).write(dir / "detuning_line.csv");
  detuning_contour_table(r).write(dir / "detuning_contour.csv");
  write_json(dir / "summary.json", detuning_summary(spec, r));
  for (const auto& m : r.maps)
    std::printf("r=%g  origin %.5f  line interval [%.4f, %.4f] MHz\n", m.r_ratio, m.origin_efficiency,
                m.line.lower_mhz, m.line.upper_mhz);
  report(dir / "summary.json");
  return 0;
}

int sweep_duration_cmd(const Options& o) {
  const DurationSweepSpec spec = parse_duration_sweep(load_json_file(o.config));
  const DurationSweepResult r = sweep_duration(spec);
  const auto dir = prepare_output_dir(o.out);
  duration_table(r).write(dir / "duration.csv");
  write_json(dir / "summary.json", duration_summary(spec, r));
  report(dir / "duration.csv");
  return 0;
}

int sweep_t2_cmd(const Options& o) {
  const T2SweepSpec spec = parse_t2_sweep(load_sweep(o));
  const T2SweepResult r = sweep_t2(spec, threads_of(o));
  const auto dir = prepare_output_dir(o.out);
  t2_table(r).write(dir / "t2.csv");
  write_json(dir / "summary.json", t2_summary(spec, r));
  report(dir / "t2.csv");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-modulated 2+1 STIRAP simulator"};
  app.require_subcommand(1);
  Options o;
  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const Options&);
  };
  const Command commands[] = {
      {"device-spectrum", "energies, anharmonicities and the coupling matrix of a device", device_spectrum},
      {"emit-waveform", "complex envelopes and phase rates of the three tones", emit_waveform},
      {"effective-hamiltonian", "samples of the effective Hamiltonian", effective_hamiltonian},
      {"run", "propagate one configuration", run},
      {"sweep-detuning", "efficiency map over stray detunings", sweep_detuning_cmd},
      {"sweep-duration", "protocol duration versus pump amplitude", sweep_duration_cmd},
      {"sweep-t2", "noise-averaged efficiency versus T2*", sweep_t2_cmd},
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, o);
    subs.emplace_back(sub, c.fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [sub, fn] : subs)
      if (sub->parsed()) return fn(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
