#include "eia/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "eia/errors.hpp"

namespace eia {
namespace {

template <typename E>
[[noreturn]] void rethrow_at(const E& err, double b) {
  std::ostringstream msg;
  msg << "at B = " << b << " mG: " << err.what();
  throw E(msg.str());
}

}  // namespace

double probe_absorption(const DensityState& state, const FieldParams& fields) {
  if (!(fields.rabi_probe > 0.0)) throw InputError("probe_absorption needs a nonzero probe");
  const SphericalAmplitudes probe = probe_amplitudes(fields);

  cplx work = 0.0;
  for (const auto& g : LevelScheme::ground_sublevels()) {
    for (const auto& e : LevelScheme::excited_sublevels()) {
      const int q = e.m - g.m;
      if (q < -1 || q > 1) continue;
      work += std::conj(probe[q]) * dipole_element(g, e, q) * state.rho(e.index(), g.index());
    }
  }
  return work.imag() / (fields.rabi_probe * fields.rabi_probe);
}

double phase_averaged_absorption(const ExperimentConfig& config, double b_longitudinal,
                                 int n_phase) {
  if (n_phase < 1) throw InputError("n_phase must be >= 1");
  MagneticParams mag = config.magnetic;
  mag.b_longitudinal = b_longitudinal;
  const FieldParams base = config.field_params();

  const auto states =
      steady_state_sites(build_phase_lattice(base, mag, config.relaxation, n_phase));
  double sum = 0.0;
  for (int k = 0; k < n_phase; ++k) {
    FieldParams local = base;
    local.spatial_phase = lattice_phase(k, n_phase);
    sum += probe_absorption(states[k], local);
  }
  return sum / n_phase;
}

AbsorptionProfile scan_field(const ExperimentConfig& config, const std::vector<double>& b_grid,
                             int n_phase) {
  if (b_grid.empty()) throw InputError("b_grid must be nonempty");
  if (n_phase < 1) throw InputError("n_phase must be >= 1");
  for (std::size_t i = 1; i < b_grid.size(); ++i) {
    if (!(b_grid[i] > b_grid[i - 1])) throw InputError("b_grid must be strictly increasing");
  }

  AbsorptionProfile profile;
  profile.b_grid = b_grid;
  profile.od = config.od;
  profile.alpha.reserve(b_grid.size());
  profile.transmission.reserve(b_grid.size());
  for (double b : b_grid) {
    double alpha = 0.0;
    try {
      alpha = phase_averaged_absorption(config, b, n_phase);
    } catch (const SolverError& err) {
      rethrow_at(err, b);
    } catch (const NumericalError& err) {
      rethrow_at(err, b);
    }
    profile.alpha.push_back(alpha);
    profile.transmission.push_back(to_transmission(alpha, config.od));
  }
  return profile;
}

AbsorptionProfile scan_field(const ExperimentConfig& config) {
  return scan_field(config, config.scan.grid(), config.n_phase);
}

double to_transmission(double alpha, double od) { return std::exp(-od * alpha); }

}  // namespace eia
