#pragma once

#include <vector>

#include "eia/config.hpp"
#include "eia/solver.hpp"

namespace eia {

struct AbsorptionProfile {
  std::vector<double> b_grid;        // mG, strictly increasing
  std::vector<double> alpha;         // normalized probe absorption
  std::vector<double> transmission;  // exp(-od * alpha)
  double od = 1.0;

  std::size_t size() const { return b_grid.size(); }
};

// Probe-quadrature of the optical coherences normalized to the probe intensity.
double probe_absorption(const DensityState& state, const FieldParams& fields);

// Probe absorption at a single field value, averaged over `n_phase` equally
// spaced pump/probe relative phases.
double phase_averaged_absorption(const ExperimentConfig& config, double b_longitudinal,
                                 int n_phase);

AbsorptionProfile scan_field(const ExperimentConfig& config, const std::vector<double>& b_grid,
                             int n_phase);
AbsorptionProfile scan_field(const ExperimentConfig& config);

double to_transmission(double alpha, double od);

}  // namespace eia
