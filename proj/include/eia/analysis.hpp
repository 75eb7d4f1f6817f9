#pragma once

#include <span>

#include "eia/model.hpp"

namespace eia {

struct FitOptions {
  // Fit a linear background slope in addition to the constant level.
  bool background_slope = false;
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
};

// T(B) = t_back + slope*(B - b_ref) - amplitude * (w^2/4) / ((B - center)^2 + w^2/4)
struct FitResult {
  double t_back = 0.0;
  double amplitude = 0.0;
  double center = 0.0;
  double fwhm = 0.0;
  double slope = 0.0;
  double b_ref = 0.0;  // abscissa about which the slope is taken (mid-scan)
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;

  double t_0() const { return t_back - amplitude; }
  double evaluate(double b) const;
};

struct ResonanceMetrics {
  double contrast_c = 0.0;    // percent
  double contrast_rel = 0.0;  // percent
  double fwhm_mg = 0.0;
  double fwhm_khz = 0.0;
  double t_min_raw = 0.0;  // lowest sampled transmission
  FitResult fit;
};

inline constexpr double kDipDetectionSigma = 5.0;
inline constexpr double kWingFraction = 0.10;

// Outermost 10% of the samples on each side (at least one point per side).
std::size_t wing_count(std::size_t n);
double wing_median(std::span<const double> values);

FitResult fit_lorentzian(std::span<const double> b, std::span<const double> t,
                         const FitOptions& options = {});

// Width between the two crossings of (wing median + min)/2, by linear interpolation.
double fwhm_direct(std::span<const double> b, std::span<const double> t);

double contrast_absorbed(double t_back, double t_0);
double contrast_relative(double t_back, double t_0);

double larmor_from_field(double b_mg, double khz_per_mg = kLarmorKhzPerMg);

ResonanceMetrics analyze_resonance(std::span<const double> b, std::span<const double> t,
                                   const FitOptions& options = {},
                                   double khz_per_mg = kLarmorKhzPerMg);

}  // namespace eia
