#include "quantnoise/gaussian_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quantnoise/errors.hpp"
#include "quantnoise/math.hpp"

namespace quantnoise {

namespace {

std::vector<double> fit_weights(const CdfEstimate& est, FitWeighting weighting) {
  std::vector<double> w(est.points.size(), 1.0);
  if (weighting == FitWeighting::none) return w;
  // Inverse-variance weighting; saturated points have plug-in variance 0, so
  // clamp to the smallest positive variance instead of dividing by zero.
  double min_positive = std::numeric_limits<double>::infinity();
  for (const auto& p : est.points) {
    if (p.var_hat > 0) min_positive = std::min(min_positive, p.var_hat);
  }
  if (!std::isfinite(min_positive)) {
    throw fit_error("inverse-variance weighting needs at least one non-degenerate point");
  }
  for (std::size_t i = 0; i < est.points.size(); ++i) {
    w[i] = 1.0 / std::max(est.points[i].var_hat, min_positive);
  }
  return w;
}

void check_fittable(const CdfEstimate& est) {
  if (est.points.size() < 3) throw fit_error("gaussian fit needs at least 3 CDF points");
  bool all_equal = true;
  bool any_interior = false;
  const double first = est.points.front().f_hat;
  for (const auto& p : est.points) {
    if (p.f_hat != first) all_equal = false;
    if (p.f_hat > 0.0 && p.f_hat < 1.0) any_interior = true;
  }
  if (all_equal) throw fit_error("gaussian fit: all CDF values are equal");
  if (!any_interior) throw fit_error("gaussian fit: all CDF values saturated at 0 or 1");
}

}  // namespace

double gaussian_cdf_objective(const CdfEstimate& est, FitWeighting weighting, double mu,
                              double sigma) {
  const std::vector<double> w = fit_weights(est, weighting);
  double s = 0;
  for (std::size_t i = 0; i < est.points.size(); ++i) {
    const double r = est.points[i].f_hat - normal_cdf((est.points[i].x - mu) / sigma);
    s += w[i] * r * r;
  }
  return s;
}

void gaussian_cdf_residuals(const CdfEstimate& est, FitWeighting weighting, double mu,
                            double sigma, std::vector<double>& residuals,
                            std::vector<std::array<double, 2>>* jacobian) {
  const std::vector<double> w = fit_weights(est, weighting);
  residuals.resize(est.points.size());
  if (jacobian) jacobian->resize(est.points.size());
  for (std::size_t i = 0; i < est.points.size(); ++i) {
    const double sw = std::sqrt(w[i]);
    const double z = (est.points[i].x - mu) / sigma;
    residuals[i] = sw * (est.points[i].f_hat - normal_cdf(z));
    if (jacobian) {
      const double phi = normal_pdf(z);
      (*jacobian)[i] = {sw * phi / sigma, sw * phi * z / sigma};
    }
  }
}

GaussianCdfFit fit_gaussian_cdf(const CdfEstimate& est, const GaussianFitOptions& options) {
  check_fittable(est);
  if (options.max_iterations < 1) throw fit_error("max_iterations must be positive");

  double mu = cdf_quantile(est, 0.5);
  double sigma0 = 0.5 * (cdf_quantile(est, normal_cdf(1.0)) - cdf_quantile(est, normal_cdf(-1.0)));
  if (!(sigma0 > 0) || !std::isfinite(sigma0)) {
    // quantiles collapsed (heavily clustered ordinates); fall back to the span
    sigma0 = 0.25 * (est.points.back().x - est.points.front().x);
  }
  if (!(sigma0 > 0)) throw fit_error("gaussian fit: cannot seed a positive sigma");
  double log_sigma = std::log(sigma0);

  const std::vector<double> w = fit_weights(est, options.weighting);
  auto objective = [&](double m, double t) {
    const double s = std::exp(t);
    double acc = 0;
    for (std::size_t i = 0; i < est.points.size(); ++i) {
      const double r = est.points[i].f_hat - normal_cdf((est.points[i].x - m) / s);
      acc += w[i] * r * r;
    }
    return acc;
  };

  GaussianCdfFit fit;
  double obj = objective(mu, log_sigma);
  fit.objective_trace.push_back(obj);

  double lambda = 1e-3;
  int iter = 0;
  for (iter = 1; iter <= options.max_iterations; ++iter) {
    // normal equations in (mu, log sigma)
    double a00 = 0, a01 = 0, a11 = 0, g0 = 0, g1 = 0;
    {
      const double sigma = std::exp(log_sigma);
      for (std::size_t i = 0; i < est.points.size(); ++i) {
        const double z = (est.points[i].x - mu) / sigma;
        const double r = est.points[i].f_hat - normal_cdf(z);
        const double phi = normal_pdf(z);
        const double j0 = phi / sigma;  // d residual / d mu
        const double j1 = phi * z;      // d residual / d log sigma
        a00 += w[i] * j0 * j0;
        a01 += w[i] * j0 * j1;
        a11 += w[i] * j1 * j1;
        g0 += w[i] * j0 * r;
        g1 += w[i] * j1 * r;
      }
    }

    bool stepped = false;
    double rel = 0;
    for (int tries = 0; tries < 60; ++tries) {
      const double d00 = a00 * (1.0 + lambda);
      const double d11 = a11 * (1.0 + lambda);
      const double det = d00 * d11 - a01 * a01;
      if (!(std::fabs(det) > 0) || !std::isfinite(det)) {
        lambda *= 4;
        continue;
      }
      const double dmu = (-g0 * d11 + g1 * a01) / det;
      const double dt = (-g1 * d00 + g0 * a01) / det;
      const double mu2 = mu + dmu;
      const double t2 = log_sigma + dt;
      if (!std::isfinite(mu2) || !std::isfinite(t2)) {
        lambda *= 4;
        continue;
      }
      const double obj2 = objective(mu2, t2);
      if (obj2 <= obj) {
        rel = std::max(std::fabs(dmu) / (std::fabs(mu) + std::exp(log_sigma)), std::fabs(dt));
        mu = mu2;
        log_sigma = t2;
        obj = obj2;
        fit.objective_trace.push_back(obj);
        lambda = std::max(lambda / 3.0, 1e-14);
        stepped = true;
        break;
      }
      lambda *= 4;
      if (lambda > 1e14) break;
    }
    if (!stepped) {
      // no improving step exists anymore; call it converged if the gradient
      // has collapsed, otherwise report the stall
      fit.converged = std::hypot(g0, g1) <= 1e-12 * (1.0 + obj);
      break;
    }
    if (rel < options.relative_tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.iterations = std::min(iter, options.max_iterations);
  fit.mu = mu;
  fit.sigma = std::exp(log_sigma);

  double max_r = 0, sum_sq = 0;
  for (const auto& p : est.points) {
    const double r = p.f_hat - normal_cdf((p.x - fit.mu) / fit.sigma);
    max_r = std::max(max_r, std::fabs(r));
    sum_sq += r * r;
  }
  fit.max_residual = max_r;
  fit.rms_residual = std::sqrt(sum_sq / static_cast<double>(est.points.size()));
  return fit;
}

void attach_fit(CdfEstimate& estimate, const GaussianCdfFit& fit) {
  estimate.fitted = AttachedFit{fit.mu, fit.sigma, fit.max_residual, fit.converged};
}

}  // namespace quantnoise
