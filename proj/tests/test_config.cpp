#include <doctest.h>

#include "stirap/config.hpp"
#include "stirap/experiment.hpp"

using namespace stirap;

namespace {

json config(const std::string& name) { return load_json_file(std::string(STIRAP_CONFIG_DIR) + "/" + name); }

// Effective-model transmon run, cheap to resolve.
json small() {
  json j = config("transmon_fig2b.json");
  j["model"] = "effective";
  return j;
}

std::string error_path(const json& j) {
  try {
    parse_run_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("shipped run configurations validate") {
  for (const char* name : {"transmon_fig2b.json", "transmon_fig2b_open.json", "flux_fig2a.json",
                           "flux_fig2a_open.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(parse_run_config(config(name)));
  }
}

TEST_CASE("derived pump amplitude and units") {
  const RunConfig c = parse_run_config(small());
  CHECK(units::to_mhz(c.pulses.Omega0) == doctest::Approx(3.9));
  CHECK(units::to_mhz(c.pulses.Omega_r) == doctest::Approx(194.9).epsilon(2e-3));
  CHECK(c.pulses.delta2 == doctest::Approx(-5.0 * c.pulses.Omega_r));
  CHECK(c.pulses.tau == doctest::Approx(0.36));
  CHECK(c.grid.integrator == Integrator::magnus4);
  CHECK(c.seed == 20162u);

  const RunConfig f = parse_run_config(config("flux_fig2a_open.json"));
  CHECK(units::to_mhz(f.pulses.Omega0) == doctest::Approx(20.0));
  REQUIRE(f.noise.has_value());
  CHECK(f.noise->q.sigma_delta == doctest::Approx(std::sqrt(2.0) * (1.0 / 2.5 - 1.0 / 24.0)));
  CHECK(f.noise->q.correlation_a == -4.5);
  REQUIRE(f.open_system.has_value());
  CHECK(f.open_system->T1 == 12.0);
}

TEST_CASE("validation errors name the offending key") {
  json j = small();
  j["pulses"].erase("T_us");
  CHECK(error_path(j) == "pulses.T_us");

  j = small();
  j["pulses"]["T_us"] = -0.1;
  CHECK(error_path(j) == "pulses.T_us");

  j = small();
  j["version"] = 2;
  CHECK(error_path(j) == "version");

  j = small();
  j["pulses"]["colour"] = "blue";
  CHECK(error_path(j) == "pulses.colour");

  j = small();
  j["pulses"]["delta2_mhz"] = -900.0;
  CHECK(error_path(j).rfind("pulses.delta2", 0) == 0);

  j = small();
  j["device"]["n_levels"] = 2;
  CHECK(error_path(j) == "device.n_levels");

  j = small();
  j["scheme"] = "spiral";
  CHECK(error_path(j) == "scheme");

  j = config("flux_fig2a_open.json");
  j["scheme"] = "transmon-chirp";
  CHECK(error_path(j) == "scheme");

  j = config("flux_fig2a_open.json");
  j["noise"]["sigma_delta_mhz"] = 0.1;
  CHECK(error_path(j).rfind("noise", 0) == 0);

  j = small();
  j["pulses"]["pump_prefactor"] = "quarter";
  CHECK(error_path(j).rfind("pulses", 0) == 0);

  j = small();
  j["trajectories"] = 10;
  CHECK(error_path(j) == "trajectories");
}

TEST_CASE("type errors are configuration errors") {
  json j = small();
  j["pulses"]["T_us"] = "long";
  CHECK(error_path(j) == "pulses.T_us");
  CHECK_THROWS_AS(parse_run_config(json::array()), ConfigError);
}

TEST_CASE("configuration hash is canonical") {
  const RunConfig a = parse_run_config(small());
  json reordered = json::parse(small().dump());
  reordered["pulses"]["tau_over_T"] = 0.6;
  const RunConfig b = parse_run_config(reordered);
  CHECK(config_hash(resolved_json(a)) == config_hash(resolved_json(b)));
  CHECK(config_hash(resolved_json(a)).size() == 16);

  json other = small();
  other["seed"] = 1;
  CHECK(config_hash(resolved_json(parse_run_config(other))) != config_hash(resolved_json(a)));

  json threaded = small();
  threaded["threads"] = 3;
  CHECK(config_hash(resolved_json(parse_run_config(threaded))) == config_hash(resolved_json(a)));
}

TEST_CASE("overrides replace configuration values") {
  json j = small();
  apply_overrides(j, Overrides{7u, std::string("rwa-interaction"), std::string("no-chirp"), 200});
  const RunConfig c = parse_run_config(j);
  CHECK(c.seed == 7u);
  CHECK(c.model == ModelKind::rwa_interaction);
  CHECK(c.scheme == Scheme::no_chirp);
  CHECK(c.trajectories == 200);
}

TEST_CASE("dotted paths and ranges") {
  json j = json::object();
  set_path(j, "pulses.r_ratio", 2.0);
  CHECK(j["pulses"]["r_ratio"] == 2.0);

  const auto lin = parse_range(json{{"min", -1.0}, {"max", 1.0}, {"n", 5}}, "x");
  REQUIRE(lin.size() == 5);
  CHECK(lin[1] == doctest::Approx(-0.5));
  const auto lg = parse_range(json{{"min", 1.0}, {"max", 100.0}, {"n", 3}, {"scale", "log"}}, "x");
  CHECK(lg[1] == doctest::Approx(10.0));
  CHECK(parse_range(json{{"values", {3.0, 1.0}}}, "x").size() == 2);
  CHECK_THROWS_AS(parse_range(json{{"min", 1.0}, {"max", 0.0}, {"n", 1}}, "x"), ConfigError);

  const SweepAxis ax = parse_axis(json{{"path", "pulses.r_ratio"}, {"values", {1.0, 2.0}}}, "axis");
  CHECK(ax.path == "pulses.r_ratio");
}

TEST_CASE("sweep configurations validate") {
  const DetuningSweepSpec d = parse_detuning_sweep(config("transmon_fig3b_detuning.json"));
  CHECK(d.delta_tilde_mhz.size() == 41);
  CHECK(d.r_values == std::vector<double>{1.0, 2.0});
  CHECK(d.line_slope == 2.0);
  const DurationSweepSpec u = parse_duration_sweep(config("fig3a_duration.json"));
  CHECK(u.omega_r_mhz.size() == 100);
  const T2SweepSpec t = parse_t2_sweep(config("transmon_fig3c_t2.json"));
  CHECK(t.T2_star_us.size() == 16);

  json bad = config("transmon_fig3b_detuning.json");
  bad["base"]["pulses"].erase("T_us");
  try {
    parse_detuning_sweep(bad);
    sweep_detuning(parse_detuning_sweep(bad), 1);
    FAIL("accepted a base without T_us");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.path()).rfind("base.pulses", 0) == 0);
  }
}

TEST_CASE("threshold interval on a sampled line") {
  const std::vector<double> x{-2, -1, 0, 1, 2};
  const std::vector<double> e{0.5, 0.9, 1.0, 0.96, 0.8};
  const LineInterval li = threshold_interval(x, e, 0.95);
  CHECK(li.contains_origin);
  CHECK(li.lower_mhz == doctest::Approx(-0.5));
  CHECK(li.upper_mhz == doctest::Approx(1.0 + 0.01 / 0.16));
  CHECK(!li.lower_clipped);
  const LineInterval all = threshold_interval(x, std::vector<double>(5, 1.0), 0.95);
  CHECK(all.lower_clipped);
  CHECK(all.upper_clipped);
}

TEST_CASE("contour crossings of a bilinear surface") {
  const std::vector<double> x{-1, 0, 1}, y{-1, 0, 1};
  RMatrix z(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) z(i, j) = 1.0 - x[i] * x[i] - y[j] * y[j];
  const auto pts = contour_points(x, y, z, 0.5);
  CHECK(pts.size() == 4);
  for (const auto& p : pts) CHECK(std::hypot(p.x, p.y) == doctest::Approx(0.5));
}

TEST_CASE("duration scaling of both pump laws") {
  const double alpha = units::from_mhz(-243.77);
  CHECK(duration_flux(units::from_mhz(200.0), -5.0, 15.0) == doctest::Approx(15.0 / units::from_mhz(20.0)));
  double prev = 1e9;
  for (double mhz : {50.0, 200.0, 1000.0, 5000.0}) {
    const double tt = duration_transmon(units::from_mhz(mhz), -5.0, alpha, 15.0, PumpPrefactor::half);
    CHECK(tt > duration_flux(units::from_mhz(mhz), -5.0, 15.0));
    CHECK(tt < prev);
    prev = tt;
  }
  // Large-amplitude limit factor * 2 * 25 / |alpha|.
  CHECK(duration_transmon(units::from_mhz(1e6), -5.0, alpha, 15.0, PumpPrefactor::half) ==
        doctest::Approx(15.0 * 50.0 / std::abs(alpha)).epsilon(1e-3));
}

}  // TEST_SUITE
