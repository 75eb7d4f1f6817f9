#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eia/analysis.hpp"
#include "eia/config.hpp"
#include "eia/spectrum.hpp"

namespace eia {

inline constexpr const char* kProfileHeader = "b_mg,alpha,transmission";
inline constexpr const char* kSweepHeader =
    "pump_uW,fwhm_mg,fwhm_khz,contrast_c,contrast_rel,t_back,t_0";

// 9 significant digits, the output precision of every CSV and report.
std::string format_number(double value);

struct ScanResult {
  AbsorptionProfile profile;
  std::optional<ResonanceMetrics> metrics;
  std::string metrics_error;  // set when metrics is empty
};

// Simulates the profile and analyzes it. Fit failures are kept in
// `metrics_error` so the profile survives; solver failures propagate.
ScanResult run_scan(const ExperimentConfig& config, const std::vector<double>& grid,
                    const FitOptions& options = {});

void write_profile_csv(std::ostream& out, const AbsorptionProfile& profile);
// `key,value` lines; a single `error,<message>` line when the fit failed.
void write_metrics_csv(std::ostream& out, const ScanResult& result);
std::string metrics_report(const ResonanceMetrics& metrics);

struct SweepSpec {
  std::vector<double> pump_powers;  // uW, strictly increasing
  double probe_power_uw = 3.5;
  ScanSpec scan;
  ExperimentConfig base;

  static SweepSpec from_config(const ExperimentConfig& config);
  void validate() const;  // ConfigError naming the offending key
};

struct SweepRow {
  double pump_uw = 0.0;
  AbsorptionProfile profile;
  std::optional<ResonanceMetrics> metrics;
  std::string error;
};

struct RunRecord {
  ExperimentConfig config;  // resolved snapshot, replays the sweep
  std::vector<SweepRow> rows;
  std::string version;
  std::string timestamp;  // UTC, ISO 8601
};

// One row per pump power; a failing power records its error and the sweep continues.
RunRecord run_power_sweep(const SweepSpec& spec, const FitOptions& options = {});

// Failed rows carry `nan` in every metric column.
void write_sweep_csv(std::ostream& out, const RunRecord& record);
// Long format `pump_uW,b_mg,alpha,transmission`.
void write_sweep_profiles_csv(std::ostream& out, const RunRecord& record);
// INI-compatible: the header lines are comments, the rest is the config snapshot.
void write_run_record(std::ostream& out, const RunRecord& record);
// width.svg, contrast_c.svg, contrast_rel.svg
void write_sweep_plots(const RunRecord& record, const std::filesystem::path& dir);
// sweep.csv, profiles.csv, record.ini and the plots.
void write_sweep_outputs(const RunRecord& record, const std::filesystem::path& dir);

struct ExternalOptions {
  bool column_swap = false;   // transmission first, field second
  double field_scale = 1.0;   // multiplies the field column into mG (e.g. mG per A)
  double reference = 0.0;     // divides raw transmission when > 0
  FitOptions fit;
};

struct ExternalSpectrum {
  std::vector<double> b_mg;
  std::vector<double> transmission;
};

// Two numeric columns, comma separated. A non-numeric first row is taken as a header.
// Rows are sorted by field. Parse failures name the 1-based row.
ExternalSpectrum read_spectrum_csv(std::istream& in, const ExternalOptions& options = {});
ResonanceMetrics fit_external_spectrum(const std::filesystem::path& csv_path,
                                       const ExternalOptions& options = {});

// Dipole elements, branching ratios and Zeeman constants.
std::string constants_report(const ExperimentConfig& config);

std::string tool_version();
// Keeps large solver buffers on the heap between solves (glibc only, no-op elsewhere).
void tune_allocator();
std::string utc_timestamp();

}  // namespace eia
