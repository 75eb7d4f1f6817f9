#include "eia/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "eia/errors.hpp"

namespace eia {
namespace {

struct DipGuess {
  double t_back;
  double wing_sd;
  std::size_t i_min;
  double depth;
};

void require_same_size(std::span<const double> b, std::span<const double> t) {
  if (b.size() != t.size()) throw InputError("field and transmission columns differ in length");
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw InputError("median of an empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

std::vector<double> wing_values(std::span<const double> t) {
  const std::size_t k = wing_count(t.size());
  std::vector<double> w(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k));
  w.insert(w.end(), t.end() - static_cast<std::ptrdiff_t>(k), t.end());
  return w;
}

DipGuess detect_dip(std::span<const double> t) {
  const auto wings = wing_values(t);
  const double mean = std::accumulate(wings.begin(), wings.end(), 0.0) / wings.size();
  double var = 0.0;
  for (double v : wings) var += (v - mean) * (v - mean);
  const double sd = wings.size() > 1 ? std::sqrt(var / (wings.size() - 1)) : 0.0;

  DipGuess g{};
  g.t_back = median_of(wings);
  g.wing_sd = sd;
  g.i_min = static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin());
  g.depth = g.t_back - t[g.i_min];
  if (!(g.depth > 0.0) || !(g.depth > kDipDetectionSigma * sd)) {
    std::ostringstream msg;
    msg << "no dip detected: depth " << g.depth << " vs wing scatter " << sd;
    throw FitError(msg.str());
  }
  return g;
}

// Linear interpolation of where t crosses `level`, walking outward from i_min.
// Returns false when the level is not crossed on that side.
bool crossing(std::span<const double> b, std::span<const double> t, std::size_t i_min,
              double level, int direction, double& out) {
  std::ptrdiff_t i = static_cast<std::ptrdiff_t>(i_min);
  const auto n = static_cast<std::ptrdiff_t>(t.size());
  while (true) {
    const std::ptrdiff_t j = i + direction;
    if (j < 0 || j >= n) return false;
    if (t[j] >= level) {
      const double frac = (level - t[i]) / (t[j] - t[i]);
      out = b[i] + frac * (b[j] - b[i]);
      return true;
    }
    i = j;
  }
}

}  // namespace

double FitResult::evaluate(double b) const {
  const double hw2 = 0.25 * fwhm * fwhm;
  const double d = b - center;
  return t_back + slope * (b - b_ref) - amplitude * hw2 / (d * d + hw2);
}

std::size_t wing_count(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(kWingFraction * n)));
}

double wing_median(std::span<const double> values) { return median_of(wing_values(values)); }

FitResult fit_lorentzian(std::span<const double> b, std::span<const double> t,
                         const FitOptions& options) {
  require_same_size(b, t);
  if (b.size() < 8) {
    throw FitError("insufficient points for a Lorentzian fit (need >= 8, got " +
                   std::to_string(b.size()) + ")");
  }
  const DipGuess guess = detect_dip(t);

  const double half = guess.t_back - 0.5 * guess.depth;
  double left = 0.0;
  double right = 0.0;
  const bool has_left = crossing(b, t, guess.i_min, half, -1, left);
  const bool has_right = crossing(b, t, guess.i_min, half, +1, right);
  double w0 = 0.25 * (b.back() - b.front());
  if (has_left && has_right) {
    w0 = right - left;
  } else if (has_left) {
    w0 = 2.0 * (b[guess.i_min] - left);
  } else if (has_right) {
    w0 = 2.0 * (right - b[guess.i_min]);
  }
  w0 = std::max(w0, 1e-6 * std::abs(b.back() - b.front()));

  const int np = options.background_slope ? 5 : 4;
  const auto n = static_cast<Eigen::Index>(b.size());
  Eigen::VectorXd p(np);
  p << guess.t_back, guess.depth, b[guess.i_min], w0;
  if (np == 5) p(4) = 0.0;
  const double b_ref = 0.5 * (b.front() + b.back());

  auto residuals = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(n);
    if (jac) jac->resize(n, np);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = b[i] - q(2);
      const double hw2 = 0.25 * q(3) * q(3);
      const double den = d * d + hw2;
      const double shape = hw2 / den;
      double model = q(0) - q(1) * shape;
      if (np == 5) model += q(4) * (b[i] - b_ref);
      r(i) = model - t[i];
      if (jac) {
        (*jac)(i, 0) = 1.0;
        (*jac)(i, 1) = -shape;
        (*jac)(i, 2) = -q(1) * hw2 * 2.0 * d / (den * den);
        (*jac)(i, 3) = -q(1) * (0.5 * q(3) * d * d) / (den * den);
        if (np == 5) (*jac)(i, 4) = b[i] - b_ref;
      }
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  residuals(p, r, &J);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;

  for (; iter < options.max_iterations && !converged; ++iter) {
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd grad = J.transpose() * r;
    bool stepped = false;
    while (lambda < 1e12) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      const Eigen::VectorXd trial = p + step;
      Eigen::VectorXd r_trial;
      residuals(trial, r_trial, nullptr);
      const double trial_cost = r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double rel_change =
            (step.array().abs() / (p.array().abs() + 1e-12)).maxCoeff();
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        residuals(p, r, &J);
        stepped = true;
        if (rel_change < options.relative_tolerance) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No downhill step at any damping: already at the minimum to machine precision.
    if (!stepped) {
      converged = true;
      break;
    }
  }

  FitResult fit;
  fit.t_back = p(0);
  fit.amplitude = p(1);
  fit.center = p(2);
  fit.fwhm = std::abs(p(3));
  fit.slope = np == 5 ? p(4) : 0.0;
  fit.b_ref = np == 5 ? b_ref : 0.0;
  fit.residual_rms = std::sqrt(cost / static_cast<double>(n));
  fit.iterations = iter;
  fit.converged = converged;
  return fit;
}

double fwhm_direct(std::span<const double> b, std::span<const double> t) {
  require_same_size(b, t);
  if (b.size() < 3) throw RangeError("fwhm_direct needs at least 3 points");
  const double t_back = wing_median(t);
  const auto i_min = static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin());
  const double level = 0.5 * (t_back + t[i_min]);
  double left = 0.0;
  double right = 0.0;
  if (!(t[i_min] < t_back) || !crossing(b, t, i_min, level, -1, left) ||
      !crossing(b, t, i_min, level, +1, right)) {
    throw RangeError("half-depth level is not crossed on both sides of the dip");
  }
  return right - left;
}

double contrast_absorbed(double t_back, double t_0) {
  if (!(t_0 < 1.0)) throw InputError("contrast C undefined: T_0 must be < 1");
  if (!(t_0 > 0.0 && t_0 <= t_back && t_back <= 1.0)) {
    throw InputError("contrast C expects 0 < T_0 <= T_back <= 1");
  }
  return (t_back - t_0) / (1.0 - t_0) * 100.0;
}

double contrast_relative(double t_back, double t_0) {
  if (!(t_back < 1.0)) throw InputError("contrast C_rel undefined: T_back must be < 1");
  if (!(t_0 > 0.0 && t_0 <= t_back)) throw InputError("contrast C_rel expects 0 < T_0 <= T_back");
  return (t_back - t_0) / (1.0 - t_back) * 100.0;
}

double larmor_from_field(double b_mg, double khz_per_mg) { return khz_per_mg * b_mg; }

ResonanceMetrics analyze_resonance(std::span<const double> b, std::span<const double> t,
                                   const FitOptions& options, double khz_per_mg) {
  ResonanceMetrics m;
  m.fit = fit_lorentzian(b, t, options);
  m.t_min_raw = *std::min_element(t.begin(), t.end());
  // With a slope term the background under the resonance is taken at its center.
  const double t_back = m.fit.t_back + m.fit.slope * (m.fit.center - m.fit.b_ref);
  const double t_0 = t_back - m.fit.amplitude;
  m.contrast_c = contrast_absorbed(t_back, t_0);
  m.contrast_rel = contrast_relative(t_back, t_0);
  m.fwhm_mg = m.fit.fwhm;
  m.fwhm_khz = larmor_from_field(m.fit.fwhm, khz_per_mg);
  return m;
}

}  // namespace eia
