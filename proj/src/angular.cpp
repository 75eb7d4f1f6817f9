#include "eia/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "eia/errors.hpp"

namespace eia {
namespace {

constexpr int kMaxFactorial = 40;

constexpr std::array<double, kMaxFactorial + 1> make_factorials() {
  std::array<double, kMaxFactorial + 1> f{};
  f[0] = 1.0;
  for (int i = 1; i <= kMaxFactorial; ++i) f[i] = f[i - 1] * i;
  return f;
}

constexpr auto kFactorials = make_factorials();

double fact(int n) {
  if (n < 0 || n > kMaxFactorial) {
    throw InputError("factorial argument out of range: " + std::to_string(n));
  }
  return kFactorials[n];
}

int sign_of_power(int n) { return (n % 2 == 0) ? 1 : -1; }

// All arguments are doubled; `half_sum` returns the (integer) half of an even sum.
int halve(int twice) { return twice / 2; }

void require_nonnegative(HalfInt j) {
  if (j.twice < 0) throw InputError("angular momentum must be non-negative");
}

void require_projection(HalfInt j, HalfInt m) {
  if ((j.twice + m.twice) % 2 != 0) {
    throw InputError("j + m must be an integer (j=" + std::to_string(j.value()) +
                     ", m=" + std::to_string(m.value()) + ")");
  }
  if (std::abs(m.twice) > j.twice) {
    throw InputError("|m| exceeds j (j=" + std::to_string(j.value()) +
                     ", m=" + std::to_string(m.value()) + ")");
  }
}

bool triad_ok(HalfInt a, HalfInt b, HalfInt c) {
  if ((a.twice + b.twice + c.twice) % 2 != 0) return false;
  return c.twice <= a.twice + b.twice && c.twice >= std::abs(a.twice - b.twice);
}

// Triangle coefficient (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)! for a valid triad.
double triangle_delta(HalfInt a, HalfInt b, HalfInt c) {
  return fact(halve(a.twice + b.twice - c.twice)) * fact(halve(a.twice - b.twice + c.twice)) *
         fact(halve(-a.twice + b.twice + c.twice)) /
         fact(halve(a.twice + b.twice + c.twice) + 1);
}

}  // namespace

int Sublevel::index() const {
  if (manifold == Manifold::Ground) {
    if (std::abs(m) > kGroundF) throw InputError("ground sublevel |m| > 2");
    return m + kGroundF;
  }
  if (std::abs(m) > kExcitedF) throw InputError("excited sublevel |m| > 1");
  return kGroundCount + m + kExcitedF;
}

Sublevel Sublevel::from_index(int index) {
  if (index < 0 || index >= kLevelCount) throw InputError("sublevel index out of range");
  if (index < kGroundCount) return ground(index - kGroundF);
  return excited(index - kGroundCount - kExcitedF);
}

Sublevel ground(int m) {
  if (std::abs(m) > kGroundF) throw InputError("ground sublevel |m| > 2");
  return {Manifold::Ground, m};
}

Sublevel excited(int m) {
  if (std::abs(m) > kExcitedF) throw InputError("excited sublevel |m| > 1");
  return {Manifold::Excited, m};
}

cplx SphericalAmplitudes::operator[](int q) const {
  switch (q) {
    case -1: return minus;
    case 0: return pi;
    case 1: return plus;
    default: throw InputError("spherical index must be -1, 0 or +1");
  }
}

double SphericalAmplitudes::norm_squared() const {
  return std::norm(minus) + std::norm(pi) + std::norm(plus);
}

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  require_nonnegative(j1);
  require_nonnegative(j2);
  require_nonnegative(j3);
  require_projection(j1, m1);
  require_projection(j2, m2);
  require_projection(j3, m3);

  if (m1.twice + m2.twice + m3.twice != 0) return 0.0;
  if (!triad_ok(j1, j2, j3)) return 0.0;

  // Racah sum over k with all factorial arguments non-negative.
  const int a1 = halve(j3.twice - j2.twice + m1.twice);  // j3 - j2 + m1
  const int a2 = halve(j3.twice - j1.twice - m2.twice);  // j3 - j1 - m2
  const int b1 = halve(j1.twice + j2.twice - j3.twice);  // j1 + j2 - j3
  const int b2 = halve(j1.twice - m1.twice);             // j1 - m1
  const int b3 = halve(j2.twice + m2.twice);             // j2 + m2

  const int k_min = std::max({0, -a1, -a2});
  const int k_max = std::min({b1, b2, b3});

  double sum = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double denom =
        fact(k) * fact(a1 + k) * fact(a2 + k) * fact(b1 - k) * fact(b2 - k) * fact(b3 - k);
    sum += sign_of_power(k) / denom;
  }

  const double norm = triangle_delta(j1, j2, j3) * fact(halve(j1.twice + m1.twice)) *
                      fact(halve(j1.twice - m1.twice)) * fact(halve(j2.twice + m2.twice)) *
                      fact(halve(j2.twice - m2.twice)) * fact(halve(j3.twice + m3.twice)) *
                      fact(halve(j3.twice - m3.twice));

  const int phase = halve(j1.twice - j2.twice - m3.twice);
  return sign_of_power(phase) * std::sqrt(norm) * sum;
}

double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  for (HalfInt j : {j1, j2, j3, j4, j5, j6}) require_nonnegative(j);

  if (!triad_ok(j1, j2, j3) || !triad_ok(j1, j5, j6) || !triad_ok(j4, j2, j6) ||
      !triad_ok(j4, j5, j3)) {
    return 0.0;
  }

  const int a1 = halve(j1.twice + j2.twice + j3.twice);
  const int a2 = halve(j1.twice + j5.twice + j6.twice);
  const int a3 = halve(j4.twice + j2.twice + j6.twice);
  const int a4 = halve(j4.twice + j5.twice + j3.twice);
  const int b1 = halve(j1.twice + j2.twice + j4.twice + j5.twice);
  const int b2 = halve(j2.twice + j3.twice + j5.twice + j6.twice);
  const int b3 = halve(j3.twice + j1.twice + j6.twice + j4.twice);

  const int t_min = std::max({a1, a2, a3, a4});
  const int t_max = std::min({b1, b2, b3});

  double sum = 0.0;
  for (int t = t_min; t <= t_max; ++t) {
    const double denom = fact(t - a1) * fact(t - a2) * fact(t - a3) * fact(t - a4) *
                         fact(b1 - t) * fact(b2 - t) * fact(b3 - t);
    sum += sign_of_power(t) * fact(t + 1) / denom;
  }

  const double norm = triangle_delta(j1, j2, j3) * triangle_delta(j1, j5, j6) *
                      triangle_delta(j4, j2, j6) * triangle_delta(j4, j5, j3);
  return std::sqrt(norm) * sum;
}

double dipole_element(const Sublevel& g, const Sublevel& e, int q) {
  if (g.manifold != Manifold::Ground || e.manifold != Manifold::Excited) {
    throw InputError("dipole_element expects (ground, excited) sublevels");
  }
  if (q < -1 || q > 1) throw InputError("spherical index must be -1, 0 or +1");
  if (e.m != g.m + q) return 0.0;
  return sign_of_power(kExcitedF - e.m) * wigner3j(kExcitedF, 1, kGroundF, -e.m, q, g.m);
}

double branching_ratio(int fe, int fg_target) {
  // 87Rb D1: J = 1/2 in both manifolds, I = 3/2.
  constexpr HalfInt kJg = half(1);
  constexpr HalfInt kJe = half(1);
  constexpr HalfInt kNuclear = half(3);
  if (fe != 1) throw InputError("branching_ratio supports Fe = 1 only");
  if (fg_target != 1 && fg_target != 2) throw InputError("Fg target must be 1 or 2");
  const double sixj = wigner6j(kJg, kJe, 1, fe, fg_target, kNuclear);
  return (2 * fg_target + 1) * (kJe.twice + 1) * sixj * sixj;
}

SphericalAmplitudes decompose_polarization(double linear_angle, int propagation_sign) {
  if (propagation_sign != 1 && propagation_sign != -1) {
    throw InputError("propagation_sign must be +1 or -1");
  }
  const double lab_angle = propagation_sign * linear_angle;
  // c_q = conj(e_q) . (cos a, sin a, 0)
  const double s = 1.0 / std::numbers::sqrt2;
  const cplx rotate(0.0, lab_angle);
  return SphericalAmplitudes{
      .minus = s * std::exp(rotate),
      .pi = 0.0,
      .plus = -s * std::exp(-rotate),
  };
}

}  // namespace eia
