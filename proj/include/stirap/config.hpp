#pragma once

// JSON run and sweep configurations. All frequencies in the files are ordinary
// frequencies (GHz or MHz, as the key suffix says); they are converted to
// rad/us on load. Every validation failure names the offending key path.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stirap/control.hpp"
#include "stirap/device.hpp"
#include "stirap/dynamics.hpp"
#include "stirap/effective.hpp"
#include "stirap/noise.hpp"

namespace stirap {

using json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

enum class DeviceKind { flux, transmon };
enum class ModelKind { full_lab, rwa_interaction, effective };

std::string to_string(DeviceKind k);
std::string to_string(ModelKind k);
ModelKind parse_model(const std::string& s);

struct DeviceConfig {
  DeviceKind kind = DeviceKind::flux;
  FluxQubitSpec flux;
  TransmonSpec transmon;
  int n_levels = 6;
};

struct GridConfig {
  double step = 0.0;  // us; 0 selects the automatic step
  double points_per_period = 20.0;
  long min_steps = 4000;
  long output_points = 400;
  double start_over_T = 6.0;
  double end_over_T = 6.0;
  std::optional<double> readout_over_T;  // efficiency read at tau + readout_over_T * T
  Integrator integrator = Integrator::magnus4;
  Frame full_frame = Frame::interaction;  // frame used by the full-lab model
};

struct NoiseConfig {
  QuasistaticNoise q;  // sigma in rad/us; seed taken from RunConfig
  NoiseEstimator estimator = NoiseEstimator::lindblad_over_draws;
  bool auto_correlation = false;  // a from the device bias sensitivity
};

struct RunConfig {
  DeviceConfig device;
  Scheme scheme = Scheme::flux_chirp;
  ModelKind model = ModelKind::full_lab;
  PulseParams pulses;
  PumpPrefactor prefactor = PumpPrefactor::half;
  std::optional<DissipatorSpec> open_system;
  std::optional<NoiseConfig> noise;
  double static_delta_tilde = 0.0;    // rad/us
  double static_delta_p_tilde = 0.0;  // rad/us
  GridConfig grid;
  int trajectories = 0;  // > 0 selects quantum jumps for open-system runs
  std::uint64_t seed = 0;
  int threads = 0;
};

/// Command-line overrides applied on top of a configuration file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::string> scheme;
  std::optional<int> trajectories;
};

/// Applies overrides to the raw JSON before validation.
void apply_overrides(json& j, const Overrides& o);

/// Validates a "device" section.
DeviceConfig parse_device_config(const json& j);

/// Validates and resolves a run configuration (derived pulse amplitudes are
/// computed here, which may diagonalize the device).
RunConfig parse_run_config(const json& j);

/// Fully resolved configuration in canonical form (every default filled in,
/// derived values included), used for hashing and provenance.
json resolved_json(const RunConfig& c);

/// FNV-1a 64-bit hash of the canonical dump, as 16 hex digits.
std::string config_hash(const json& resolved);

json load_json_file(const std::string& path);

/// Sets a dotted path ("pulses.r_ratio") in a JSON object, creating objects as needed.
void set_path(json& j, const std::string& path, const json& value);

struct SweepAxis {
  std::string path;
  std::vector<double> values;
};

/// Axis from {"path", "values"} or {"path", "min", "max", "n", "scale"}.
SweepAxis parse_axis(const json& j, const std::string& where);
/// Values only, from {"values"} or {"min", "max", "n", "scale"}.
std::vector<double> parse_range(const json& j, const std::string& where, int min_points = 2);

/// Cached device model for a device configuration.
const DeviceModel& device_model(const DeviceConfig& d);

}  // namespace stirap
