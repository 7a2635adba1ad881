#pragma once

#include <span>

// Small least-squares fitters used by the campaign estimators.

namespace spinsim {

struct GaussFit {
  double amplitude = 0;
  double t_peak = 0;
  double sigma_t = 0;
  double offset = 0;
  double residual_norm = 0;
  int iterations = 0;
};

// Levenberg-Marquardt fit of a*exp(-(t-t_peak)^2/(2 sigma^2)) + c with
// deterministic moment-based initialization.  Throws FitError on
// non-convergence within 200 iterations.
GaussFit fit_gaussian_profile(std::span<const double> t,
                              std::span<const double> y);

// Least squares y = b*x through the origin.
double fit_line_through_origin(std::span<const double> x,
                               std::span<const double> y);

struct LinearFit {
  double intercept = 0;
  double slope = 0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace spinsim
