#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("stirap_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(STIRAP_CLI) + " " + args + " > " + (scratch() / "log.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json shipped(const std::string& name) {
  std::ifstream in(std::string(STIRAP_CONFIG_DIR) + "/" + name);
  return json::parse(in);
}

std::string write_config(const std::string& name, const json& j) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << j.dump(2);
  return p.string();
}

std::string effective_transmon() {
  json j = shipped("transmon_fig2b.json");
  j["model"] = "effective";
  return write_config("eff.json", j);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
  CHECK(cli("--help") == 0);
  CHECK(cli("") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("run") == 2);
  CHECK(cli("run --config /nonexistent.json") == 2);
}

TEST_CASE("invalid configurations exit with code two") {
  json j = shipped("transmon_fig2b.json");
  j["pulses"].erase("T_us");
  CHECK(cli("run --config " + write_config("missing.json", j) + " --out " + (scratch() / "o").string()) == 2);
  CHECK(slurp(scratch() / "log.txt").find("pulses.T_us") != std::string::npos);

  std::ofstream(scratch() / "broken.json") << "{ not json";
  CHECK(cli("run --config " + (scratch() / "broken.json").string()) == 2);
  CHECK(cli("run --config " + effective_transmon() + " --model nonsense") == 2);
}

TEST_CASE("numerical failures exit with code three") {
  json j = shipped("transmon_fig2b.json");
  j["model"] = "effective";
  // The first pump tone lands on the 1-2 transition.
  j["pulses"] = {{"Omega_r_mhz", 50.0}, {"delta2_mhz", 243.77}, {"T_us", 0.6}};
  CHECK(cli("run --config " + write_config("resonant.json", j) + " --out " + (scratch() / "o").string()) == 3);
}

TEST_CASE("run writes the time series and summary") {
  const fs::path out = scratch() / "run";
  REQUIRE(cli("run --config " + effective_transmon() + " --out " + out.string()) == 0);
  const std::string csv = slurp(out / "timeseries.csv");
  CHECK(csv.rfind("time_us,rho00,rho11,rho22,leakage\n", 0) == 0);
  const json s = json::parse(slurp(out / "summary.json"));
  for (const char* k : {"efficiency", "max_leakage", "max_rho22", "config_hash", "seed"}) CHECK(s.contains(k));
  CHECK(s["seed"] == 20162);
  CHECK(s["efficiency"].get<double>() > 0.99);
}

TEST_CASE("repeated runs are byte identical") {
  const std::string cfg = effective_transmon();
  const fs::path a = scratch() / "a", b = scratch() / "b";
  REQUIRE(cli("run --config " + cfg + " --out " + a.string()) == 0);
  REQUIRE(cli("run --config " + cfg + " --out " + b.string() + " --threads 3") == 0);
  CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
}

TEST_CASE("trajectory runs add standard-error columns and honour the seed") {
  json j = shipped("transmon_fig2b_open.json");
  j.erase("noise");
  const std::string cfg = write_config("open.json", j);
  const fs::path a = scratch() / "ta", b = scratch() / "tb", c = scratch() / "tc";
  REQUIRE(cli("run --config " + cfg + " --trajectories 100 --seed 5 --out " + a.string()) == 0);
  REQUIRE(cli("run --config " + cfg + " --trajectories 100 --seed 5 --out " + b.string()) == 0);
  REQUIRE(cli("run --config " + cfg + " --trajectories 100 --seed 6 --out " + c.string()) == 0);
  const std::string csv = slurp(a / "timeseries.csv");
  CHECK(csv.substr(0, csv.find('\n')).find("rho11_stderr") != std::string::npos);
  CHECK(csv == slurp(b / "timeseries.csv"));
  CHECK(csv != slurp(c / "timeseries.csv"));
  CHECK(json::parse(slurp(a / "summary.json"))["seed"] == 5);
}

TEST_CASE("noise summaries can include the samples") {
  json j = shipped("transmon_fig2b_open.json");
  j["noise"]["n_samples"] = 10;
  const std::string cfg = write_config("noisy.json", j);
  const fs::path out = scratch() / "noisy";
  REQUIRE(cli("run --config " + cfg + " --dump-samples --out " + out.string()) == 0);
  const json s = json::parse(slurp(out / "summary.json"));
  REQUIRE(s.contains("samples"));
  CHECK(s["samples"].size() == 10);
}

TEST_CASE("device, waveform and effective Hamiltonian subcommands") {
  const std::string cfg = effective_transmon();
  const fs::path out = scratch() / "aux";
  REQUIRE(cli("device-spectrum --config " + cfg + " --out " + out.string()) == 0);
  CHECK(slurp(out / "spectrum.csv").find("3.97") != std::string::npos);
  CHECK(fs::exists(out / "coupling.csv"));
  REQUIRE(cli("emit-waveform --config " + cfg + " --out " + out.string()) == 0);
  CHECK(fs::file_size(out / "waveform.csv") > 1000);
  REQUIRE(cli("effective-hamiltonian --config " + cfg + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "effective_hamiltonian.csv"));
  REQUIRE(cli("sweep-duration --config " + std::string(STIRAP_CONFIG_DIR) + "/fig3a_duration.json --out " +
              out.string()) == 0);
  CHECK(fs::exists(out / "duration.csv"));
}

TEST_CASE("small detuning and coherence sweeps") {
  json d = shipped("transmon_fig3b_detuning.json");
  d["sweep"]["delta_tilde_mhz"]["n"] = 5;
  d["sweep"]["delta_p_tilde_mhz"]["n"] = 5;
  d["sweep"]["line"]["delta_tilde_mhz"]["n"] = 9;
  const fs::path out = scratch() / "sweeps";
  REQUIRE(cli("sweep-detuning --config " + write_config("det.json", d) + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "detuning_map.csv"));
  CHECK(fs::exists(out / "detuning_line.csv"));

  json t = shipped("transmon_fig3c_t2.json");
  t["sweep"]["T2_star_us"] = {{"values", {1.0, 50.0}}};
  t["base"]["noise"]["n_samples"] = 8;
  REQUIRE(cli("sweep-t2 --config " + write_config("t2.json", t) + " --out " + out.string()) == 0);
  const std::string csv = slurp(out / "t2.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

}  // TEST_SUITE
