#pragma once

#include <string>
#include <vector>

#include "eia/model.hpp"

namespace eia {

struct DensityState {
  Operator rho = Operator::Zero();
  double reservoir = 0.0;

  StateVector to_vector() const;
  static DensityState from_vector(const StateVector& x);

  // Ground sublevels 5/8 evenly, reservoir 3/8, excited empty.
  static DensityState isotropic(double refill_ground_fraction = 5.0 / 8.0);

  double trace() const { return rho.trace().real() + reservoir; }
};

struct StateViolation {
  enum class Kind { Hermiticity, Trace, Positivity, Reservoir };
  Kind kind;
  double magnitude;  // size of the breach (deficit, asymmetry, or negative eigenvalue)
  std::string message;
};

inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-9;
inline constexpr double kReservoirTol = 1e-12;

std::vector<StateViolation> validate_state(const DensityState& s);

// Null vector of L normalized by Tr(rho) + reservoir = 1 per site. The last
// row of L (the reservoir equation of the last site) is replaced by the
// summed trace constraint.
DensityState steady_state(const Liouvillian& L);
std::vector<DensityState> steady_state_sites(const Liouvillian& L);

// Reference time evolution, x(t) = exp(L t) x(0), stepped with exponential
// propagators under step-doubling error control.
DensityState propagate(const Liouvillian& L, const DensityState& initial, double t);
std::vector<DensityState> propagate_sites(const Liouvillian& L,
                                          const std::vector<DensityState>& initial, double t);

}  // namespace eia
