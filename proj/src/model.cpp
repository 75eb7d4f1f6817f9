#include "eia/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "eia/errors.hpp"

namespace eia {
namespace {

using Eigen::MatrixXcd;

const cplx kI(0.0, 1.0);

// L += scale * (A . B) as a superoperator on the rho block: (A rho B)_ij = A_ik rho_kl B_lj.
void add_sandwich(MatrixXcd& L, const Operator& a, const Operator& b, cplx scale) {
  for (int i = 0; i < kLevelCount; ++i) {
    for (int k = 0; k < kLevelCount; ++k) {
      const cplx aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < kLevelCount; ++j) {
        for (int l = 0; l < kLevelCount; ++l) {
          const cplx blj = b(l, j);
          if (blj == 0.0) continue;
          L(vec_index(i, j), vec_index(k, l)) += scale * aik * blj;
        }
      }
    }
  }
}

bool is_excited(int index) { return index >= kGroundCount; }

// Jump operator sum_{g,e} d_q(g,e) |g><e| for one polarization channel q.
Operator lowering_operator(int q) {
  Operator op = Operator::Zero();
  for (const auto& g : LevelScheme::ground_sublevels()) {
    for (const auto& e : LevelScheme::excited_sublevels()) {
      op(g.index(), e.index()) = dipole_element(g, e, q);
    }
  }
  return op;
}

// F_z and F_x restricted to one manifold, embedded in the 8x8 space.
void add_angular_momentum(Operator& h, int f, int offset, double z_coeff, double x_coeff) {
  for (int m = -f; m <= f; ++m) {
    const int i = offset + m + f;
    h(i, i) += z_coeff * m;
    if (m < f) {
      // <m+1|F_+|m> = sqrt(f(f+1) - m(m+1)); F_x = (F_+ + F_-)/2
      const double ladder = 0.5 * std::sqrt(static_cast<double>(f * (f + 1) - m * (m + 1)));
      h(i + 1, i) += x_coeff * ladder;
      h(i, i + 1) += x_coeff * ladder;
    }
  }
}

void require_rate(double value, const char* name, bool strictly_positive = false) {
  if (!std::isfinite(value) || value < 0.0 || (strictly_positive && value == 0.0)) {
    std::ostringstream msg;
    msg << "relaxation rate " << name << " must be " << (strictly_positive ? "> 0" : ">= 0")
        << ", got " << value;
    throw ConfigError(msg.str(), std::string("relaxation.") + name);
  }
}

}  // namespace

std::vector<Sublevel> LevelScheme::ground_sublevels() {
  std::vector<Sublevel> out;
  for (int m = -kGroundF; m <= kGroundF; ++m) out.push_back(ground(m));
  return out;
}

std::vector<Sublevel> LevelScheme::excited_sublevels() {
  std::vector<Sublevel> out;
  for (int m = -kExcitedF; m <= kExcitedF; ++m) out.push_back(excited(m));
  return out;
}

std::vector<std::string> soft_warnings(const FieldParams& field, const RelaxationParams& relax) {
  std::vector<std::string> out;
  if (field.rabi_pump > 0.0 && field.rabi_probe > 0.3 * field.rabi_pump) {
    out.emplace_back("probe Rabi frequency is not small compared to the pump");
  }
  if (relax.gamma_transit > 0.1 * relax.gamma) {
    out.emplace_back("gamma_transit is not small compared to gamma");
  }
  return out;
}

Liouvillian::Liouvillian(Eigen::MatrixXcd generator) : generator_(std::move(generator)) {
  if (generator_.rows() != generator_.cols() || generator_.rows() == 0 ||
      generator_.rows() % kStateSize != 0) {
    throw InputError("Liouvillian must be square with a multiple of 65 rows");
  }
  if (trace_leak() > 1e-12) {
    throw NumericalError("generator does not preserve Tr(rho) + reservoir");
  }
}

Eigen::RowVectorXcd Liouvillian::trace_row(int sites) {
  Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(kStateSize * sites);
  for (int s = 0; s < sites; ++s) {
    const int base = s * kStateSize;
    for (int i = 0; i < kLevelCount; ++i) row(base + vec_index(i, i)) = 1.0;
    row(base + kReservoirIndex) = 1.0;
  }
  return row;
}

double Liouvillian::trace_leak() const {
  const double scale = std::max(1.0, generator_.cwiseAbs().maxCoeff());
  return (trace_row(sites()) * generator_).cwiseAbs().maxCoeff() / scale;
}

double power_to_rabi(double power_uw, double calibration_uw) {
  if (!(calibration_uw > 0.0) || !std::isfinite(calibration_uw)) {
    throw ConfigError("power calibration must be > 0", "field.calibration_uw");
  }
  if (!(power_uw >= 0.0)) throw InputError("power must be >= 0");
  return std::sqrt(power_uw / calibration_uw);
}

Operator build_zeeman_hamiltonian(const MagneticParams& mag) {
  Operator h = Operator::Zero();
  add_angular_momentum(h, kGroundF, 0, mag.zeeman_ground * mag.b_longitudinal,
                       mag.zeeman_ground * mag.b_transverse);
  add_angular_momentum(h, kExcitedF, kGroundCount, mag.zeeman_excited * mag.b_longitudinal,
                       mag.zeeman_excited * mag.b_transverse);
  return h;
}

SphericalAmplitudes pump_amplitudes(const FieldParams& fields) {
  auto c = decompose_polarization(fields.pol_angle_pump, +1);
  c.minus *= fields.rabi_pump;
  c.pi *= fields.rabi_pump;
  c.plus *= fields.rabi_pump;
  return c;
}

SphericalAmplitudes probe_amplitudes(const FieldParams& fields) {
  auto c = decompose_polarization(fields.pol_angle_probe, -1);
  const cplx scale = fields.rabi_probe * std::exp(kI * fields.spatial_phase);
  c.minus *= scale;
  c.pi *= scale;
  c.plus *= scale;
  return c;
}

Operator build_interaction_hamiltonian(const SphericalAmplitudes& total_field) {
  if (std::abs(total_field.pi) != 0.0) {
    throw InputError("field must be transverse to the quantization axis (pi component present)");
  }
  Operator v = Operator::Zero();
  for (const auto& g : LevelScheme::ground_sublevels()) {
    for (const auto& e : LevelScheme::excited_sublevels()) {
      const int q = e.m - g.m;
      if (q < -1 || q > 1) continue;
      const cplx coupling = -total_field[q] * dipole_element(g, e, q);
      v(e.index(), g.index()) = coupling;
      v(g.index(), e.index()) = std::conj(coupling);
    }
  }
  return v;
}

Operator build_interaction_hamiltonian(const FieldParams& fields, const LevelScheme&) {
  const auto pump = pump_amplitudes(fields);
  const auto probe = probe_amplitudes(fields);
  return build_interaction_hamiltonian(SphericalAmplitudes{
      .minus = pump.minus + probe.minus,
      .pi = pump.pi + probe.pi,
      .plus = pump.plus + probe.plus,
  });
}

Eigen::MatrixXcd commutator_superop(const Operator& hamiltonian) {
  MatrixXcd L = MatrixXcd::Zero(kStateSize, kStateSize);
  const Operator id = Operator::Identity();
  add_sandwich(L, hamiltonian, id, -kI);
  add_sandwich(L, id, hamiltonian, kI);
  return L;
}

Eigen::MatrixXcd build_relaxation_superop(const RelaxationParams& relax, const LevelScheme&) {
  require_rate(relax.gamma, "gamma", true);
  require_rate(relax.gamma_opt, "gamma_opt");
  require_rate(relax.gamma_e_depol, "gamma_e_depol");
  require_rate(relax.gamma_transit, "gamma_transit");
  if (relax.gamma_opt < 0.5 * relax.gamma) {
    throw ConfigError("gamma_opt must be >= gamma/2", "relaxation.gamma_opt");
  }
  if (!(relax.branch_to_ground >= 0.0 && relax.branch_to_ground <= 1.0)) {
    throw ConfigError("branch_to_ground must lie in [0, 1]", "relaxation.branch_to_ground");
  }
  if (!(relax.refill_ground_fraction >= 0.0 && relax.refill_ground_fraction <= 1.0)) {
    throw ConfigError("refill_ground_fraction must lie in [0, 1]",
                      "relaxation.refill_ground_fraction");
  }

  MatrixXcd L = MatrixXcd::Zero(kStateSize, kStateSize);
  const Operator id = Operator::Identity();

  // (a) Spontaneous decay. Each excited sublevel has sum_{g,q} |d|^2 = 1/(2Fe+1),
  // so the jump operators carry a factor (2Fe+1) to give the total rate gamma.
  const double jump_scale = relax.gamma * relax.branch_to_ground * kExcitedCount;
  for (int q = -1; q <= 1; ++q) {
    const Operator j = lowering_operator(q);
    add_sandwich(L, j, j.adjoint(), jump_scale);
  }
  Operator excited_projector = Operator::Zero();
  for (int e = kGroundCount; e < kLevelCount; ++e) excited_projector(e, e) = 1.0;
  add_sandwich(L, excited_projector, id, -0.5 * relax.gamma);
  add_sandwich(L, id, excited_projector, -0.5 * relax.gamma);
  for (int e = kGroundCount; e < kLevelCount; ++e) {
    L(kReservoirIndex, vec_index(e, e)) += relax.gamma * (1.0 - relax.branch_to_ground);
  }

  // (b) Optical coherences decay at gamma_opt in total (spontaneous part gamma/2 is above).
  // (c) Excited-state Zeeman coherences lose anisotropy at gamma_e_depol.
  const double extra_optical = relax.gamma_opt - 0.5 * relax.gamma;
  for (int i = 0; i < kLevelCount; ++i) {
    for (int j = 0; j < kLevelCount; ++j) {
      const int k = vec_index(i, j);
      if (is_excited(i) != is_excited(j)) {
        L(k, k) -= extra_optical;
      } else if (is_excited(i) && i != j) {
        L(k, k) -= relax.gamma_e_depol;
      }
    }
  }

  // (d) Transit: everything leaves at gamma_transit and returns isotropically.
  const auto trace = Liouvillian::trace_row();
  for (int k = 0; k < kStateSize; ++k) L(k, k) -= relax.gamma_transit;
  const double per_ground = relax.refill_ground_fraction / kGroundCount;
  for (int g = 0; g < kGroundCount; ++g) {
    L.row(vec_index(g, g)) += relax.gamma_transit * per_ground * trace;
  }
  L.row(kReservoirIndex) += relax.gamma_transit * (1.0 - relax.refill_ground_fraction) * trace;

  return L;
}

Liouvillian build_liouvillian(const FieldParams& fields, const MagneticParams& mag,
                              const RelaxationParams& relax) {
  if (!(mag.linewidth_khz > 0.0)) {
    throw ConfigError("linewidth_khz must be > 0", "magnetic.linewidth_khz");
  }
  Operator h = build_zeeman_hamiltonian(mag) / mag.linewidth_khz;
  h += build_interaction_hamiltonian(fields);
  for (int e = kGroundCount; e < kLevelCount; ++e) h(e, e) -= fields.one_photon_detuning;

  MatrixXcd generator = commutator_superop(h);
  generator += build_relaxation_superop(relax);
  return Liouvillian(std::move(generator));
}

double lattice_phase(int site, int n_sites) {
  return 2.0 * std::numbers::pi * site / n_sites;
}

Liouvillian build_phase_lattice(const FieldParams& fields, const MagneticParams& mag,
                                const RelaxationParams& relax, int n_sites) {
  if (n_sites < 1) throw InputError("phase lattice needs at least one site");
  require_rate(relax.gamma_diffusion, "gamma_diffusion");

  const int dim = n_sites * kStateSize;
  MatrixXcd generator = MatrixXcd::Zero(dim, dim);

  // Site-independent part, built once.
  FieldParams no_field = fields;
  no_field.rabi_pump = 0.0;
  no_field.rabi_probe = 0.0;
  const MatrixXcd common = build_liouvillian(no_field, mag, relax).generator();

  for (int k = 0; k < n_sites; ++k) {
    FieldParams local = fields;
    local.spatial_phase = lattice_phase(k, n_sites);
    generator.block(k * kStateSize, k * kStateSize, kStateSize, kStateSize) =
        common + commutator_superop(build_interaction_hamiltonian(local));
  }

  if (n_sites > 1 && relax.gamma_diffusion > 0.0) {
    // Eigenvalue of the ring Laplacian for the first harmonic is 2 - 2 cos(2 pi / n).
    const double hop =
        relax.gamma_diffusion / (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / n_sites));
    std::vector<int> mobile;
    for (int i = 0; i < kLevelCount; ++i) {
      for (int j = 0; j < kLevelCount; ++j) {
        if (is_excited(i) == is_excited(j)) mobile.push_back(vec_index(i, j));
      }
    }
    mobile.push_back(kReservoirIndex);
    for (int k = 0; k < n_sites; ++k) {
      const int next = (k + 1) % n_sites;
      const int prev = (k + n_sites - 1) % n_sites;
      for (int c : mobile) {
        const int row = k * kStateSize + c;
        generator(row, row) -= 2.0 * hop;
        generator(row, next * kStateSize + c) += hop;
        generator(row, prev * kStateSize + c) += hop;
      }
    }
  }
  return Liouvillian(std::move(generator));
}

}  // namespace eia
