#include "eia/solver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "eia/errors.hpp"

namespace eia {
namespace {

// Reciprocal condition estimate below which the constrained system is treated as singular.
constexpr double kSingularRcond = 1e-13;
constexpr double kResidualTol = 1e-8;
constexpr double kLocalErrorPerTime = 1e-10;

}  // namespace

StateVector DensityState::to_vector() const {
  StateVector x(kStateSize);
  for (int i = 0; i < kLevelCount; ++i) {
    for (int j = 0; j < kLevelCount; ++j) x(vec_index(i, j)) = rho(i, j);
  }
  x(kReservoirIndex) = reservoir;
  return x;
}

DensityState DensityState::from_vector(const StateVector& x) {
  if (x.size() != kStateSize) throw InputError("state vector must have 65 entries");
  DensityState s;
  for (int i = 0; i < kLevelCount; ++i) {
    for (int j = 0; j < kLevelCount; ++j) s.rho(i, j) = x(vec_index(i, j));
  }
  s.reservoir = x(kReservoirIndex).real();
  return s;
}

DensityState DensityState::isotropic(double refill_ground_fraction) {
  DensityState s;
  for (int g = 0; g < kGroundCount; ++g) s.rho(g, g) = refill_ground_fraction / kGroundCount;
  s.reservoir = 1.0 - refill_ground_fraction;
  return s;
}

std::vector<StateViolation> validate_state(const DensityState& s) {
  std::vector<StateViolation> out;
  auto report = [&](StateViolation::Kind kind, double magnitude, const std::string& what) {
    std::ostringstream msg;
    msg << what << " (" << magnitude << ")";
    out.push_back({kind, magnitude, msg.str()});
  };

  const double asym = (s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= kHermiticityTol)) report(StateViolation::Kind::Hermiticity, asym, "rho is not Hermitian");

  const double deficit = 1.0 - s.trace();
  if (!(std::abs(deficit) <= kTraceTol)) {
    report(StateViolation::Kind::Trace, deficit, "Tr(rho) + reservoir differs from 1 by");
  }

  const Operator herm = 0.5 * (s.rho + s.rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> eig(herm, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (!(min_eig >= -kPositivityTol)) {
    report(StateViolation::Kind::Positivity, min_eig, "rho has a negative eigenvalue");
  }
  if (!(s.reservoir >= -kReservoirTol)) {
    report(StateViolation::Kind::Reservoir, s.reservoir, "reservoir population is negative");
  }
  return out;
}

namespace {

StateVector stack(const std::vector<DensityState>& states) {
  StateVector x(kStateSize * static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    x.segment(static_cast<Eigen::Index>(k) * kStateSize, kStateSize) = states[k].to_vector();
  }
  return x;
}

std::vector<DensityState> unstack(const StateVector& x) {
  std::vector<DensityState> out;
  for (Eigen::Index k = 0; k < x.size() / kStateSize; ++k) {
    out.push_back(DensityState::from_vector(x.segment(k * kStateSize, kStateSize)));
  }
  return out;
}

StateVector solve_constrained(const Liouvillian& L) {
  const int dim = L.dimension();
  Eigen::MatrixXcd system = L.generator();
  system.row(dim - 1) = Liouvillian::trace_row(L.sites());
  StateVector rhs = StateVector::Zero(dim);
  rhs(dim - 1) = static_cast<double>(L.sites());

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    std::ostringstream msg;
    msg << "steady state is not unique: constrained generator is singular (rcond " << rcond
        << "); a degenerate dark-state manifold needs gamma_transit > 0 or a nonzero field";
    throw SolverError(msg.str());
  }
  const StateVector x = lu.solve(rhs);

  const double residual = L.apply(x).cwiseAbs().maxCoeff();
  if (!(residual <= kResidualTol)) {
    std::ostringstream msg;
    msg << "steady-state residual " << residual << " exceeds " << kResidualTol;
    throw NumericalError(msg.str());
  }
  return x;
}

StateVector propagate_vector(const Liouvillian& L, StateVector x, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("propagation time must be >= 0");
  if (t == 0.0) return x;

  const Eigen::MatrixXcd& gen = L.generator();
  const double norm = std::max(gen.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const double h_min = 1e-14 * std::max(t, 1.0 / norm);
  double h = std::min(t, 1.0 / norm);
  double elapsed = 0.0;

  while (elapsed < t) {
    h = std::min(h, t - elapsed);
    const Eigen::MatrixXcd half_step = (gen * (0.5 * h)).exp();
    const Eigen::MatrixXcd full_step = (gen * h).exp();
    const StateVector coarse = full_step * x;
    const StateVector fine = half_step * (half_step * x);
    const double err = (coarse - fine).cwiseAbs().maxCoeff();

    if (std::isfinite(err) && err <= kLocalErrorPerTime * std::max(h, 1e-3)) {
      x = fine;
      elapsed += h;
      h *= 2.0;
    } else {
      h *= 0.5;
      if (h < h_min) {
        std::ostringstream msg;
        msg << "step size collapsed to " << h << " at t = " << elapsed;
        throw IntegrationError(msg.str());
      }
    }
  }
  return x;
}

}  // namespace

DensityState steady_state(const Liouvillian& L) {
  if (L.sites() != 1) throw InputError("steady_state expects a single-site generator");
  return DensityState::from_vector(solve_constrained(L));
}

std::vector<DensityState> steady_state_sites(const Liouvillian& L) {
  return unstack(solve_constrained(L));
}

DensityState propagate(const Liouvillian& L, const DensityState& initial, double t) {
  if (L.sites() != 1) throw InputError("propagate expects a single-site generator");
  return DensityState::from_vector(propagate_vector(L, initial.to_vector(), t));
}

std::vector<DensityState> propagate_sites(const Liouvillian& L,
                                          const std::vector<DensityState>& initial, double t) {
  if (static_cast<int>(initial.size()) != L.sites()) {
    throw InputError("one initial state per lattice site is required");
  }
  return unstack(propagate_vector(L, stack(initial), t));
}

}  // namespace eia
