#pragma once

// Angular-momentum algebra for the Fg=2 -> Fe=1 D1 transition of 87Rb.
//
// Spherical basis convention used throughout the project:
//   e(+1) = -(x + i y)/sqrt(2),  e(0) = z,  e(-1) = (x - i y)/sqrt(2)
// with the quantization axis z along the solenoid field (the beam axis).

#include <array>
#include <complex>

namespace eia {

using cplx = std::complex<double>;

enum class Manifold { Ground, Excited };

inline constexpr int kGroundF = 2;
inline constexpr int kExcitedF = 1;
inline constexpr int kGroundCount = 2 * kGroundF + 1;
inline constexpr int kExcitedCount = 2 * kExcitedF + 1;
inline constexpr int kLevelCount = kGroundCount + kExcitedCount;

// Angular momentum stored doubled so half-integers stay exact.
// An `int` converts implicitly to the integer value; use `half(3)` for 3/2.
struct HalfInt {
  int twice = 0;

  constexpr HalfInt() = default;
  constexpr HalfInt(int j) : twice(2 * j) {}  // NOLINT(google-explicit-constructor)
  constexpr double value() const { return 0.5 * twice; }
};

inline constexpr HalfInt half(int twice_j) {
  HalfInt h;
  h.twice = twice_j;
  return h;
}

struct Sublevel {
  Manifold manifold = Manifold::Ground;
  int m = 0;

  // Position in the 8-level ordering: ground m=-2..2 -> 0..4, excited m=-1..1 -> 5..7.
  int index() const;
  static Sublevel from_index(int index);
  friend bool operator==(const Sublevel&, const Sublevel&) = default;
};

Sublevel ground(int m);
Sublevel excited(int m);

struct SphericalAmplitudes {
  cplx minus;  // q = -1
  cplx pi;     // q =  0
  cplx plus;   // q = +1

  cplx operator[](int q) const;
  double norm_squared() const;
};

// Racah formula. Throws InputError on inconsistent half-integer arguments;
// returns 0 when a selection rule fails.
double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3);
double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);

// <e|d_q|g> with the reduced element set to 1:
//   (-1)^(Fe - me) * 3j(Fe, 1, Fg; -me, q, mg)
double dipole_element(const Sublevel& g, const Sublevel& e, int q);

// Fraction of the 5P1/2 Fe decay that lands in 5S1/2 Fg (I = 3/2, J = 1/2).
double branching_ratio(int fe, int fg_target);

// Transverse linear polarization at `linear_angle` from x, measured in the
// beam's own right-handed frame. A beam travelling along -z has its frame
// rotated by pi about x, so its y axis maps to lab -y.
SphericalAmplitudes decompose_polarization(double linear_angle, int propagation_sign);

}  // namespace eia
