#pragma once

// Plain-text outputs: CSV tables and JSON summaries. Numbers are printed with
// a fixed format so that identical results give byte-identical files.

#include <filesystem>
#include <string>
#include <vector>

#include "stirap/config.hpp"
#include "stirap/experiment.hpp"

namespace stirap {

/// Fixed-format number for CSV cells ("%.12g"; inf and nan spelled out).
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);

  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& file) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

/// time_us, rho00, rho11, rho22, leakage (+ rho_jj_stderr columns for trajectory runs).
CsvTable timeseries_table(const EvolutionResult& r);

/// Summary of a single run.
json run_summary(const RunConfig& c, const Experiment& e, const RunResult& r, bool dump_samples);

void write_json(const std::filesystem::path& file, const json& j);

/// Creates the directory if needed and returns it.
std::filesystem::path prepare_output_dir(const std::string& dir);

// Subcommand tables.
CsvTable spectrum_table(const DeviceModel& m);
CsvTable coupling_table(const DeviceModel& m);
CsvTable waveform_table(const DriveSpec& drive, const TimeGrid& grid);
/// Effective Hamiltonian samples, upper triangle in MHz (H / 2 pi).
CsvTable hamiltonian_table(const HamiltonianFn& h, const TimeGrid& grid, const std::string& prefix = "h");

CsvTable detuning_map_table(const DetuningSweepSpec& spec, const DetuningSweepResult& r);
CsvTable detuning_line_table(const DetuningSweepSpec& spec, const DetuningSweepResult& r);
CsvTable detuning_contour_table(const DetuningSweepResult& r);
json detuning_summary(const DetuningSweepSpec& spec, const DetuningSweepResult& r);

CsvTable duration_table(const DurationSweepResult& r);
json duration_summary(const DurationSweepSpec& spec, const DurationSweepResult& r);

CsvTable t2_table(const T2SweepResult& r);
json t2_summary(const T2SweepSpec& spec, const T2SweepResult& r);

}  // namespace stirap
