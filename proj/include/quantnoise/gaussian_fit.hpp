#pragma once

#include <array>
#include <vector>

#include "quantnoise/estimator.hpp"

namespace quantnoise {

enum class FitWeighting { none, inverse_variance };

struct GaussianFitOptions {
  FitWeighting weighting = FitWeighting::none;
  double relative_tolerance = 1e-10;
  int max_iterations = 200;
};

struct GaussianCdfFit {
  double mu = 0;
  double sigma = 0;  // > 0
  double max_residual = 0;
  double rms_residual = 0;
  int iterations = 0;
  bool converged = false;
  // Objective value at the start and after every accepted step; non-increasing.
  std::vector<double> objective_trace;
};

// Fits Phi((x - mu)/sigma) to the sampled CDF by damped Gauss-Newton
// (Levenberg-Marquardt) on (mu, log sigma), seeded from the interpolated
// median and the 15.9%/84.1% quantile spread. Non-convergence is reported via
// the flag, not an exception; genuinely unfittable inputs (fewer than three
// points, all values equal, or all values saturated at 0/1) throw fit_error.
GaussianCdfFit fit_gaussian_cdf(const CdfEstimate& estimate, const GaussianFitOptions& options = {});

// The exact objective the fit minimizes; exposed so independent searches can
// check the optimizer against the same function.
double gaussian_cdf_objective(const CdfEstimate& estimate, FitWeighting weighting, double mu,
                              double sigma);

// Weighted residuals sqrt(w)*(f_hat - Phi((x-mu)/sigma)) and, when requested,
// their analytic Jacobian with respect to (mu, sigma).
void gaussian_cdf_residuals(const CdfEstimate& estimate, FitWeighting weighting, double mu,
                            double sigma, std::vector<double>& residuals,
                            std::vector<std::array<double, 2>>* jacobian = nullptr);

void attach_fit(CdfEstimate& estimate, const GaussianCdfFit& fit);

}  // namespace quantnoise
