#pragma once

// Generator of the optical Bloch equations for the open Fg=2 -> Fe=1 system
// driven by a counter-propagating lin-perp-lin pump/probe pair.
//
// State vector layout of one site (65 complex coordinates):
//   x[8*i + j] = rho(i, j)   for sublevel indices i, j in [0, 8)
//   x[64]      = reservoir population (non-resonant Fg=1 level)
// A phase lattice stacks n such blocks, one per pump/probe relative phase.
// All rates and Rabi frequencies are in units of the excited decay rate.

#include <Eigen/Dense>
#include <numbers>
#include <string>
#include <vector>

#include "eia/angular.hpp"

namespace eia {

inline constexpr int kRhoSize = kLevelCount * kLevelCount;
inline constexpr int kReservoirIndex = kRhoSize;
inline constexpr int kStateSize = kRhoSize + 1;

using Operator = Eigen::Matrix<cplx, kLevelCount, kLevelCount>;
using StateVector = Eigen::VectorXcd;

constexpr int vec_index(int row, int col) { return row * kLevelCount + col; }

struct LevelScheme {
  int ground_f = kGroundF;
  int excited_f = kExcitedF;

  static std::vector<Sublevel> ground_sublevels();
  static std::vector<Sublevel> excited_sublevels();
};

struct FieldParams {
  double rabi_pump = 0.0;
  double rabi_probe = 0.0;
  double pol_angle_pump = 0.0;
  double pol_angle_probe = std::numbers::pi / 2;
  double spatial_phase = 0.0;
  double one_photon_detuning = 0.0;
};

// Ground-state Larmor constant used for all kHz <-> mG conversions.
inline constexpr double kLarmorKhzPerMg = 0.73;
// Lande ratio g(5P1/2, F=1) / g(5S1/2, F=2) = (-1/6) / (1/2).
inline constexpr double kExcitedZeemanKhzPerMg = -kLarmorKhzPerMg / 3.0;
// 87Rb D1 natural linewidth Gamma/2pi.
inline constexpr double kRbD1LinewidthKhz = 5746.0;

struct MagneticParams {
  double b_longitudinal = 0.0;  // mG
  double b_transverse = 0.0;    // mG, along x
  double zeeman_ground = kLarmorKhzPerMg;
  double zeeman_excited = kExcitedZeemanKhzPerMg;
  double linewidth_khz = kRbD1LinewidthKhz;  // value of Gamma/2pi in kHz

  friend bool operator==(const MagneticParams&, const MagneticParams&) = default;
};

struct RelaxationParams {
  double gamma = 1.0;
  double gamma_opt = 100.0;
  double gamma_e_depol = 50.0;
  double gamma_transit = 0.001;
  double branch_to_ground = 5.0 / 6.0;
  // Share of the transit refill that enters Fg=2 (spread evenly); the rest feeds the reservoir.
  double refill_ground_fraction = 5.0 / 8.0;
  // Decay rate of the fundamental spatial harmonic of the Zeeman-level density
  // matrix (ground and excited blocks) due to atomic diffusion across the
  // polarization lattice. Zero means motionless atoms.
  double gamma_diffusion = 1.0;

  friend bool operator==(const RelaxationParams&, const RelaxationParams&) = default;
};

// Warnings for soft invariants (perturbative probe, rate hierarchy).
std::vector<std::string> soft_warnings(const FieldParams& field, const RelaxationParams& relax);

// Generator over one or more sites (65 coordinates each).
class Liouvillian {
 public:
  explicit Liouvillian(Eigen::MatrixXcd generator);

  const Eigen::MatrixXcd& generator() const { return generator_; }
  int sites() const { return static_cast<int>(generator_.rows()) / kStateSize; }
  int dimension() const { return static_cast<int>(generator_.rows()); }
  StateVector apply(const StateVector& x) const { return generator_ * x; }

  // Row vector reading out the summed Tr(rho) + reservoir of all sites.
  static Eigen::RowVectorXcd trace_row(int sites = 1);
  // max |trace_row * L| relative to the largest generator entry.
  double trace_leak() const;

 private:
  Eigen::MatrixXcd generator_;
};

double power_to_rabi(double power_uw, double calibration_uw);

// Zeeman Hamiltonian in kHz (frequency units, not angular).
Operator build_zeeman_hamiltonian(const MagneticParams& mag);

// V = -sum_q field_q d_q |e><g| + h.c. for a total field given by its
// spherical components (already scaled by Rabi frequencies).
Operator build_interaction_hamiltonian(const SphericalAmplitudes& total_field);
Operator build_interaction_hamiltonian(const FieldParams& fields,
                                       const LevelScheme& scheme = LevelScheme{});

// Total spherical field seen by an atom at the given relative phase: pump along +z,
// probe along -z carrying exp(i * spatial_phase).
SphericalAmplitudes pump_amplitudes(const FieldParams& fields);
SphericalAmplitudes probe_amplitudes(const FieldParams& fields);

Eigen::MatrixXcd build_relaxation_superop(const RelaxationParams& relax,
                                          const LevelScheme& scheme = LevelScheme{});

// -i[H, .] as a 65x65 block (zero reservoir row/column).
Eigen::MatrixXcd commutator_superop(const Operator& hamiltonian);

Liouvillian build_liouvillian(const FieldParams& fields, const MagneticParams& mag,
                              const RelaxationParams& relax);

// Relative phase of lattice site k out of n: 2 pi k / n.
double lattice_phase(int site, int n_sites);

// n_sites copies of the single-site generator at phases lattice_phase(k, n)
// (the spatial_phase of `fields` is ignored), with nearest-neighbour hopping
// of the ground/excited blocks and the reservoir. The hopping rate is scaled
// so the fundamental harmonic decays at gamma_diffusion for any n_sites.
Liouvillian build_phase_lattice(const FieldParams& fields, const MagneticParams& mag,
                                const RelaxationParams& relax, int n_sites);

}  // namespace eia
