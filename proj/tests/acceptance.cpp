// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   stirap_acceptance [--report FILE] [--expect-fail AC7[,AC..]] [--only AC1[,AC..]]
//
// Exit status is 0 when every criterion has its expected outcome.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stirap/config.hpp"
#include "stirap/experiment.hpp"

using namespace stirap;

namespace {

// Tolerances.
constexpr double kFluxEfficiency = 0.99;
constexpr double kFluxLeakage = 2e-4;
constexpr double kFluxRuntimeS = 300.0;
constexpr double kNoChirpRho11 = 0.2;
constexpr double kSigmaCrossCheck = 0.05;
constexpr double kOpenTarget = 0.97, kOpenWindow = 0.02;
constexpr int kMinDraws = 200;
constexpr double kTransmonEfficiency = 0.99;
constexpr double kMeasurableGap = 0.1;
constexpr double kCoarseAgreement = 0.02;
constexpr double kMagnusAgreement = 0.02;  // fraction of the peak coupling
constexpr double kOriginEfficiency = 0.99;
constexpr double kOffsetMhz = 1.0, kOffsetEfficiency = 0.95;
constexpr double kFluxDurationUs = 0.12, kDurationTolerance = 0.01;
constexpr double kSaturationWindow = 0.05;
constexpr double kDarkResidual = 1e-12;
constexpr double kNormDrift = 1e-8, kTraceError = 1e-8, kMinEigenvalue = -1e-9;
constexpr int kTrajectories = 2000;
constexpr double kStandardErrors = 2.0;
constexpr double kSelectionZero = 1e-8;
constexpr double kStepHalving = 1e-5;

json shipped(const std::string& name) { return load_json_file(std::string(STIRAP_CONFIG_DIR) + "/" + name); }

json with(json j, const std::string& path, const json& v) {
  set_path(j, path, v);
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok " : "NOT ") + what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

// Runs cached between criteria.
struct Cache {
  std::optional<RunResult> flux_closed;
  double flux_closed_seconds = 0.0;
  std::optional<RunResult> flux_open;
  std::optional<RunResult> transmon_open;
};
Cache cache;

const RunResult& flux_closed() {
  if (!cache.flux_closed) {
    const auto t0 = std::chrono::steady_clock::now();
    cache.flux_closed = run_config(parse_run_config(shipped("flux_fig2a.json")));
    cache.flux_closed_seconds = seconds_since(t0);
  }
  return *cache.flux_closed;
}

const RunResult& flux_open() {
  if (!cache.flux_open) cache.flux_open = run_config(parse_run_config(shipped("flux_fig2a_open.json")));
  return *cache.flux_open;
}

const RunResult& transmon_open() {
  if (!cache.transmon_open) cache.transmon_open = run_config(parse_run_config(shipped("transmon_fig2b_open.json")));
  return *cache.transmon_open;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  Outcome o;
  const RunResult& r = flux_closed();
  o.check(r.efficiency > kFluxEfficiency, fmt("efficiency %.6f > %.2f", r.efficiency, kFluxEfficiency));
  o.check(r.evolution.max_leakage < kFluxLeakage,
          fmt("max leakage %.3e < %.0e", r.evolution.max_leakage, kFluxLeakage));
  o.check(cache.flux_closed_seconds < kFluxRuntimeS, fmt("runtime %.1f s", cache.flux_closed_seconds));
  o.note(fmt("max rho22 %.4f", r.evolution.max_rho22));
  return o;
}

Outcome ac2() {
  Outcome o;
  const RunResult r = run_config(parse_run_config(with(shipped("flux_fig2a.json"), "scheme", "no-chirp")));
  o.check(r.efficiency < kNoChirpRho11, fmt("final rho11 %.6f < %.1f without chirp", r.efficiency, kNoChirpRho11));
  return o;
}

Outcome ac3() {
  Outcome o;
  const RunConfig c = parse_run_config(shipped("flux_fig2a_open.json"));
  const double sigma = c.noise->q.sigma_delta;
  const double quoted = 4.1e-3 * c.pulses.Omega0;
  o.check(std::abs(sigma / quoted - 1.0) < kSigmaCrossCheck,
          fmt("sigma %.4f rad/us vs 4.1e-3 Omega0 = %.4f rad/us", sigma, quoted));
  o.check(c.noise->q.n_samples >= kMinDraws, fmt("%d draws", c.noise->q.n_samples));
  const RunResult& r = flux_open();
  o.check(r.method == "lindblad-over-draws", "estimator " + r.method);
  o.check(std::abs(r.efficiency - kOpenTarget) <= kOpenWindow,
          fmt("averaged efficiency %.4f +- %.4f in %.2f +- %.2f", r.efficiency, r.efficiency_stderr, kOpenTarget,
              kOpenWindow));
  return o;
}

Outcome ac4() {
  Outcome o;
  const json base = shipped("transmon_fig2b.json");
  const RunResult good = run_config(parse_run_config(base));
  const RunResult flux_law = run_config(parse_run_config(with(base, "scheme", "flux-chirp")));
  o.check(good.efficiency > kTransmonEfficiency,
          fmt("transmon chirp efficiency %.6f > %.2f", good.efficiency, kTransmonEfficiency));
  const double gap = good.efficiency - flux_law.efficiency;
  o.check(gap > kMeasurableGap, fmt("flux-law chirp %.6f, gap %.4f", flux_law.efficiency, gap));
  o.note(fmt("max leakage %.3e, max rho22 %.4f", good.evolution.max_leakage, good.evolution.max_rho22));
  return o;
}

double coarse_deviation(const json& base, double& width) {
  Experiment rwa = build_experiment(parse_run_config(with(base, "model", "rwa-interaction")));
  const Experiment eff = build_experiment(parse_run_config(with(base, "model", "effective")));
  // Every integration step is kept so that the boxcar resolves the fast oscillations.
  rwa.grid.decimation = 1;
  const EvolutionResult a = propagate_unitary(rwa.model, rwa.psi0, rwa.grid, rwa.options);
  const EvolutionResult b = propagate_unitary(eff.model, eff.psi0, rwa.grid, eff.options);
  width = kTwoPi * 10.0 / std::abs(rwa.drive.params.delta2);
  const RMatrix ca = coarse_grain(a, width), cb = coarse_grain(b, width);
  return (ca.leftCols(3) - cb.leftCols(3)).cwiseAbs().maxCoeff();
}

Outcome ac5() {
  Outcome o;
  for (const char* name : {"flux_fig2a.json", "transmon_fig2b.json"}) {
    double width = 0.0;
    const double dev = coarse_deviation(shipped(name), width);
    o.check(dev < kCoarseAgreement, fmt("%s: max coarse-grained deviation %.4f (window %.4f us)", name, dev, width));
  }
  return o;
}

double magnus_deviation(const json& base, StarkSum sum = StarkSum::rotating) {
  const RunConfig c = parse_run_config(with(base, "model", "rwa-interaction"));
  const Experiment e = build_experiment(c);
  const bool transmon = c.device.kind == DeviceKind::transmon;
  const HamiltonianFn ip = model_hamiltonian(c, *e.device, e.drive);
  const HamiltonianFn eff = transmon ? h_eff_transmon(*e.device, e.drive, c.prefactor, sum) : h_eff_flux(e.drive);
  const MagnusWindow w = MagnusWindow::smooth_for_drive(e.drive);
  if (!w.usable()) throw NumericalError("Magnus window unusable");
  const auto& p = c.pulses;
  double worst = 0.0;
  for (double t : {-p.tau - p.T, -p.tau, -0.5 * p.tau, 0.0, 0.5 * p.tau, p.tau, p.tau + p.T})
    worst = std::max(worst, (magnus_effective(ip, e.drive, t, w).topLeftCorner(3, 3) - eff(t)).cwiseAbs().maxCoeff());
  return worst / p.Omega0;
}

Outcome ac6() {
  Outcome o;
  const double df = magnus_deviation(shipped("flux_fig2a.json"));
  o.check(df < kMagnusAgreement, fmt("flux: max element deviation %.4f Omega0", df));
  const json transmon = shipped("transmon_fig2b.json");
  const double dt = magnus_deviation(transmon);
  o.check(dt < kMagnusAgreement, fmt("transmon: max element deviation %.4f Omega0", dt));
  o.note(fmt("transmon without chirp %.4f Omega0, with counter-rotating shifts in the closed form %.4f Omega0",
             magnus_deviation(with(transmon, "scheme", "no-chirp")), magnus_deviation(transmon, StarkSum::all)));

  // Two-level transition driven with a real field, counter-rotating part included.
  const double w = units::from_ghz(5.0), delta = units::from_mhz(100.0), omega = units::from_mhz(20.0);
  const double wd = w - delta;
  HamiltonianFn h;
  h.dimension = 2;
  h.max_frequency = w + wd;
  h.eval = [=](double t) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 1) = omega * std::cos(wd * t) * std::polar(1.0, -w * t);
    m(1, 0) = std::conj(m(0, 1));
    return m;
  };
  MagnusWindow win;
  win.delta_t = kTwoPi * 10.0 / delta;
  win.fast_ok = win.envelope_ok = win.rabi_ok = win.chirp_ok = true;
  const CMatrix avg = magnus_average(h, 0.0, win);
  const double rwa = omega * omega / (4.0 * delta);
  const double counter = omega * omega / (4.0 * (w + wd));
  const double s1 = avg(1, 1).real(), s0 = avg(0, 0).real();
  o.check(std::abs(s1 - rwa) <= 1.01 * counter && std::abs(s0 + rwa) <= 1.01 * counter,
          fmt("Stark shifts %+.5f / %+.5f rad/us vs +-%.5f (counter-rotating %.2e)", s0, s1, rwa, counter));
  const double general = stark_shift_general(omega, 1.0, w, wd);
  o.check(std::abs(s1 - general) < 1e-3 * rwa, fmt("with counter-rotating term %.6f vs %.6f", s1, general));
  return o;
}

Outcome ac7() {
  Outcome o;
  const json sweep = shipped("transmon_fig3b_detuning.json");
  const DetuningSweepSpec spec = parse_detuning_sweep(sweep);
  const DetuningSweepResult r = sweep_detuning(spec);
  for (const auto& m : r.maps) {
    o.check(m.origin_efficiency > kOriginEfficiency, fmt("r=%g origin efficiency %.5f", m.r_ratio, m.origin_efficiency));
    o.note(fmt("r=%g line interval [%.4f, %.4f] MHz%s, area fraction %.3f", m.r_ratio, m.line.lower_mhz,
               m.line.upper_mhz, m.line.lower_clipped || m.line.upper_clipped ? " (clipped)" : "",
               m.region_fraction));
  }
  o.check(r.strictly_nested, fmt("r=2 region strictly contains r=1 along delta_p_tilde = %g delta_tilde", spec.line_slope));

  // Field offsets on the transmon configuration at r = 1.
  const json base = spec.base;
  double worst_gated = 1.0, worst_opposite = 1.0;
  for (int sp : {-1, 0, 1})
    for (int ss : {-1, 0, 1}) {
      if (sp == 0 && ss == 0) continue;
      json j = with(base, "pulses.delta_p_mhz", sp * kOffsetMhz);
      j = with(j, "pulses.delta_s_mhz", ss * kOffsetMhz);
      const double e = run_config(parse_run_config(j)).efficiency;
      if (sp * ss < 0)
        worst_opposite = std::min(worst_opposite, e);
      else
        worst_gated = std::min(worst_gated, e);
    }
  o.check(worst_gated >= kOffsetEfficiency,
          fmt("single-field and common offsets of %.0f MHz: worst efficiency %.4f", kOffsetMhz, worst_gated));
  o.note(fmt("opposite-sign offsets (two-photon detuning %.0f MHz): %.4f", 2 * kOffsetMhz, worst_opposite));
  return o;
}

Outcome ac8() {
  Outcome o;
  const DurationSweepSpec spec = parse_duration_sweep(shipped("fig3a_duration.json"));
  const DurationSweepResult r = sweep_duration(spec);
  const double tf = duration_flux(units::from_mhz(200.0), spec.delta2_over_omega_r, spec.duration_factor);
  o.check(std::abs(tf / kFluxDurationUs - 1.0) < kDurationTolerance,
          fmt("flux duration at 200 MHz %.5f us vs %.2f us", tf, kFluxDurationUs));
  bool decreasing = true, above = true;
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    above = above && r.points[i].T_transmon_us > r.points[i].T_flux_us;
    if (i > 0) decreasing = decreasing && r.points[i].T_transmon_us < r.points[i - 1].T_transmon_us;
  }
  const double last = r.points.back().T_transmon_us / r.T_transmon_saturation_us;
  const double first = r.points.front().T_transmon_us / r.T_transmon_saturation_us;
  o.check(decreasing && above, "transmon duration decreases and stays above the flux duration");
  o.check(last - 1.0 < kSaturationWindow && last >= 1.0,
          fmt("transmon duration/saturation %.4f at %.0f MHz (%.2f at %.0f MHz), limit %.4f us", last,
              r.points.back().omega_r_mhz, first, r.points.front().omega_r_mhz, r.T_transmon_saturation_us));
  return o;
}

double step_halving(const json& cfg) {
  const RunConfig c = parse_run_config(cfg);
  const Experiment e = build_experiment(c);
  const double h = e.grid.step();
  const RunResult a = run_experiment(e);
  const Experiment f = build_experiment(parse_run_config(with(cfg, "grid.step_us", 0.5 * h)));
  if (f.grid.step() > 0.5 * h * (1 + 1e-9)) throw NumericalError("halved grid not finer");
  const RunResult b = run_experiment(f);
  return std::abs(a.efficiency - b.efficiency);
}

Outcome ac9() {
  Outcome o;
  // Dark state.
  double dark = 0.0;
  for (double phase : {0.0, 0.7, 2.1}) {
    const cplx op = std::polar(0.8, phase), os = std::polar(1.3, -phase);
    const CVector d = dark_state(op, os);
    dark = std::max(dark, (h_lambda({op, os, 0.0, 3.0}) * d).norm());
  }
  o.check(dark < kDarkResidual, fmt("dark-state residual %.1e", dark));

  // Bounds.
  o.check(flux_closed().evolution.max_norm_drift < kNormDrift,
          fmt("flux closed norm drift %.1e", flux_closed().evolution.max_norm_drift));
  for (const char* name : {"flux_fig2a_open.json", "transmon_fig2b_open.json"}) {
    json j = shipped(name);
    j.erase("noise");
    const RunResult l = run_config(parse_run_config(j));
    o.check(l.evolution.max_trace_error < kTraceError && l.evolution.min_eigenvalue >= kMinEigenvalue,
            fmt("%s: trace error %.1e, min eigenvalue %.1e", name, l.evolution.max_trace_error,
                l.evolution.min_eigenvalue));
    const RunResult m = run_config(parse_run_config(with(j, "trajectories", kTrajectories)));
    o.check(std::abs(m.efficiency - l.efficiency) < kStandardErrors * m.efficiency_stderr,
            fmt("%s: %d trajectories %.4f +- %.4f vs Lindblad %.4f", name, kTrajectories, m.efficiency,
                m.efficiency_stderr, l.efficiency));
    json paired = with(with(shipped(name), "noise.estimator", "paired-mcwf"), "trajectories", kTrajectories);
    const RunResult pm = run_config(parse_run_config(paired));
    const RunResult& ld = std::string(name) == "flux_fig2a_open.json" ? flux_open() : transmon_open();
    const double se = std::hypot(pm.efficiency_stderr, ld.efficiency_stderr);
    o.check(std::abs(pm.efficiency - ld.efficiency) < kStandardErrors * se,
            fmt("%s: paired trajectories %.4f vs Lindblad over draws %.4f (combined SE %.4f)", name, pm.efficiency,
                ld.efficiency, se));
  }

  // Determinism under a fixed seed, independent of the thread count.
  {
    json j = shipped("transmon_fig2b_open.json");
    j = with(j, "trajectories", 200);
    const RunResult a = run_config(parse_run_config(with(j, "threads", 1)));
    const RunResult b = run_config(parse_run_config(with(j, "threads", 4)));
    const RunResult c = run_config(parse_run_config(with(j, "seed", 1)));
    o.check(a.evolution.populations == b.evolution.populations && a.samples == b.samples,
            "identical results for 1 and 4 threads");
    o.check(a.evolution.populations != c.evolution.populations, "seed changes the trajectories");
  }

  // Selection rules at the symmetry points.
  for (DeviceKind k : {DeviceKind::flux, DeviceKind::transmon}) {
    DeviceConfig d;
    d.kind = k;
    const DeviceModel& m = device_model(d);
    double worst = 0.0;
    for (int i = 0; i < m.n_levels; ++i)
      for (int j = i + 2; j < m.n_levels; j += 2) worst = std::max(worst, std::abs(m.Q(i, j)));
    const double rel = worst / std::abs(m.Q(0, 1));
    o.check(rel < kSelectionZero, fmt("%s: max same-parity |Q_ij| / |Q_01| = %.1e", to_string(k).c_str(), rel));
  }

  // Step halving on every shipped run configuration.
  for (const char* name : {"flux_fig2a.json", "flux_fig2a_open.json", "transmon_fig2b.json", "transmon_fig2b_open.json"}) {
    const double d = step_halving(shipped(name));
    o.check(d < kStepHalving, fmt("%s: step halving changes efficiency by %.1e", name, d));
  }
  return o;
}

std::set<std::string> split(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.insert(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string report;
  std::set<std::string> expect_fail, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--report" && i + 1 < argc) report = argv[++i];
    else if (a == "--expect-fail" && i + 1 < argc) expect_fail = split(argv[++i]);
    else if (a == "--only" && i + 1 < argc) only = split(argv[++i]);
    else {
      std::cerr << "usage: stirap_acceptance [--report FILE] [--expect-fail AC7] [--only AC1,AC2]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};

  std::ostringstream log;
  bool as_expected = true;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const bool expected = expect_fail.count(id) ? !o.pass : o.pass;
    as_expected = as_expected && expected;
    std::ostringstream line;
    line << id << ' ' << (o.pass ? "PASS" : "FAIL");
    if (!o.pass && expect_fail.count(id)) line << " (known)";
    line << fmt("  [%.1f s]", seconds_since(t0)) << '\n';
    for (const auto& n : o.notes) line << "    " << n << '\n';
    std::cout << line.str() << std::flush;
    log << line.str();
  }
  if (!report.empty()) std::ofstream(report) << log.str();
  return as_expected ? 0 : 1;
}
