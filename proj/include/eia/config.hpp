#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eia/model.hpp"

namespace eia {

struct ScanSpec {
  double b_min = -200.0;  // mG
  double b_max = 200.0;
  int points = 401;

  std::vector<double> grid() const;

  friend bool operator==(const ScanSpec&, const ScanSpec&) = default;
};

// Resolved run configuration. Powers are in uW and map to Rabi frequencies
// through `calibration_uw` (the power giving a Rabi frequency of one Gamma).
struct ExperimentConfig {
  double pump_power_uw = 390.0;
  double probe_power_uw = 3.5;
  double calibration_uw = 100.0;
  // Angles from the x axis, which also carries b_transverse. The probe angle is
  // taken in its own frame (it propagates along -z), so -135 is lab 135 deg.
  double pol_angle_pump_deg = 45.0;
  double pol_angle_probe_deg = -135.0;
  double one_photon_detuning = 0.0;

  MagneticParams magnetic;
  RelaxationParams relaxation;

  double od = 800.0;  // wing transmission near 0.85 at the top sweep power
  int n_phase = 4;

  ScanSpec scan;
  std::vector<double> sweep_pump_powers;

  FieldParams field_params(double spatial_phase = 0.0) const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Default sweep axis: 39, 78, ..., 390 uW.
std::vector<double> default_sweep_powers();

ExperimentConfig default_config();

// Throws ConfigError naming the offending key.
void validate_config(const ExperimentConfig& config);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& config);

}  // namespace eia
