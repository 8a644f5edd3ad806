#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "quantnoise/errors.hpp"
#include "quantnoise/gaussian_fit.hpp"
#include "quantnoise/math.hpp"
#include "quantnoise/rng.hpp"

using namespace quantnoise;

namespace {

CdfEstimate gaussian_points(double mu, double sigma, int count, double span_sigmas,
                            double noise_amp = 0.0, std::uint64_t seed = 0) {
  RandomStream rng(seed);
  CdfEstimate est;
  est.records = 1000;
  est.k_hi = 1;
  for (int i = 0; i < count; ++i) {
    CdfPoint p;
    p.x = mu + sigma * span_sigmas * (2.0 * i / (count - 1) - 1.0);
    p.f_hat = normal_cdf((p.x - mu) / sigma);
    if (noise_amp > 0) {
      p.f_hat = std::clamp(p.f_hat + noise_amp * (2.0 * rng.uniform01() - 1.0), 0.0, 1.0);
    }
    p.multiplicity = 1;
    p.var_hat = theoretical_variance(p.f_hat, est.records, 1);
    p.degenerate = p.f_hat == 0.0 || p.f_hat == 1.0;
    est.points.push_back(p);
  }
  return est;
}

}  // namespace

TEST_CASE("normal cdf against high-precision references") {
  const std::array<std::pair<double, double>, 14> reference{{
      {-8.0, 6.220960574271784123516e-16},
      {-6.0, 9.865876450376981407009e-10},
      {-4.0, 0.00003167124183311992125377},
      {-2.0, 0.02275013194817920720028},
      {-1.0, 0.1586552539314570514148},
      {-0.5, 0.3085375387259868963623},
      {0.0, 0.5},
      {0.3, 0.6179114221889526330723},
      {1.0, 0.8413447460685429485852},
      {1.5, 0.9331927987311419339955},
      {2.0, 0.9772498680518207927997},
      {3.0, 0.9986501019683699054733},
      {5.0, 0.9999997133484281208061},
      {8.0, 0.9999999999999993779039},
  }};
  for (const auto& [z, phi] : reference) {
    CHECK(std::fabs(normal_cdf(z) - phi) <= 1e-12);
  }
}

TEST_CASE("exact synthetic points recover the generating parameters") {
  const CdfEstimate est = gaussian_points(0.3, 0.2, 41, 3.0);
  const GaussianCdfFit fit = fit_gaussian_cdf(est);
  CHECK(fit.converged);
  CHECK(std::fabs(fit.mu - 0.3) <= 1e-8);
  CHECK(std::fabs(fit.sigma - 0.2) <= 1e-8);
  CHECK(fit.max_residual <= 1e-8);
}

TEST_CASE("degenerate inputs are rejected") {
  CdfEstimate two = gaussian_points(0, 1, 2, 1.0);
  CHECK_THROWS_AS(fit_gaussian_cdf(two), fit_error);

  CdfEstimate flat = gaussian_points(0, 1, 5, 1.0);
  for (auto& p : flat.points) p.f_hat = 0.25;
  CHECK_THROWS_AS(fit_gaussian_cdf(flat), fit_error);

  CdfEstimate saturated = gaussian_points(0, 1, 5, 1.0);
  for (std::size_t i = 0; i < saturated.points.size(); ++i) {
    saturated.points[i].f_hat = i < 2 ? 0.0 : 1.0;
    saturated.points[i].var_hat = 0.0;
  }
  CHECK_THROWS_AS(fit_gaussian_cdf(saturated), fit_error);
}

TEST_CASE("translation and scale equivariance") {
  const CdfEstimate base = gaussian_points(0.05, 0.7, 33, 2.5, 0.01, 5);
  const GaussianCdfFit fit = fit_gaussian_cdf(base);

  CdfEstimate shifted = base;
  for (auto& p : shifted.points) p.x += 3.25;
  const GaussianCdfFit fit_shift = fit_gaussian_cdf(shifted);
  CHECK(fit_shift.mu == doctest::Approx(fit.mu + 3.25).epsilon(1e-9));
  CHECK(fit_shift.sigma == doctest::Approx(fit.sigma).epsilon(1e-9));

  CdfEstimate scaled = base;
  for (auto& p : scaled.points) p.x *= 4.0;
  const GaussianCdfFit fit_scale = fit_gaussian_cdf(scaled);
  CHECK(fit_scale.mu == doctest::Approx(4.0 * fit.mu).epsilon(1e-8));
  CHECK(fit_scale.sigma == doctest::Approx(4.0 * fit.sigma).epsilon(1e-8));
}

TEST_CASE("analytic jacobian matches central differences") {
  const CdfEstimate est = gaussian_points(-0.1, 0.5, 21, 2.0, 0.02, 9);
  RandomStream rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const double mu = -0.3 + 0.6 * rng.uniform01();
    const double sigma = 0.2 + 0.8 * rng.uniform01();
    std::vector<double> r;
    std::vector<std::array<double, 2>> jac;
    gaussian_cdf_residuals(est, FitWeighting::none, mu, sigma, r, &jac);

    const double h_mu = 1e-6 * sigma;
    const double h_sigma = 1e-6 * sigma;
    std::vector<double> rp, rm;
    gaussian_cdf_residuals(est, FitWeighting::none, mu + h_mu, sigma, rp);
    gaussian_cdf_residuals(est, FitWeighting::none, mu - h_mu, sigma, rm);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double numeric = (rp[i] - rm[i]) / (2.0 * h_mu);
      CHECK(std::fabs(jac[i][0] - numeric) <= 1e-6 * (std::fabs(numeric) + 1e-6));
    }
    gaussian_cdf_residuals(est, FitWeighting::none, mu, sigma + h_sigma, rp);
    gaussian_cdf_residuals(est, FitWeighting::none, mu, sigma - h_sigma, rm);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double numeric = (rp[i] - rm[i]) / (2.0 * h_sigma);
      CHECK(std::fabs(jac[i][1] - numeric) <= 1e-6 * (std::fabs(numeric) + 1e-6));
    }
  }
}

TEST_CASE("objective is non-increasing across accepted steps") {
  const CdfEstimate est = gaussian_points(0.02, 0.3, 61, 3.0, 0.03, 21);
  const GaussianCdfFit fit = fit_gaussian_cdf(est);
  REQUIRE(fit.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1]);
  }
}

TEST_CASE("optimum matches a brute-force grid search within one cell") {
  const CdfEstimate est = gaussian_points(0.1, 0.25, 51, 3.0, 0.02, 13);
  const GaussianCdfFit fit = fit_gaussian_cdf(est);
  REQUIRE(fit.converged);

  const int cells = 401;
  const double mu_lo = fit.mu - 0.1, mu_hi = fit.mu + 0.1;
  const double sigma_lo = fit.sigma * 0.5, sigma_hi = fit.sigma * 1.5;
  double best = 1e300, best_mu = 0, best_sigma = 0;
  for (int i = 0; i < cells; ++i) {
    const double mu = mu_lo + (mu_hi - mu_lo) * i / (cells - 1);
    for (int j = 0; j < cells; ++j) {
      const double sigma = sigma_lo + (sigma_hi - sigma_lo) * j / (cells - 1);
      const double s = gaussian_cdf_objective(est, FitWeighting::none, mu, sigma);
      if (s < best) {
        best = s;
        best_mu = mu;
        best_sigma = sigma;
      }
    }
  }
  CHECK(std::fabs(fit.mu - best_mu) <= (mu_hi - mu_lo) / (cells - 1));
  CHECK(std::fabs(fit.sigma - best_sigma) <= (sigma_hi - sigma_lo) / (cells - 1));
  CHECK(gaussian_cdf_objective(est, FitWeighting::none, fit.mu, fit.sigma) <= best + 1e-15);
}

TEST_CASE("iteration cap reports non-convergence and returns the best iterate") {
  const CdfEstimate est = gaussian_points(0.4, 0.6, 41, 3.0, 0.05, 3);
  GaussianFitOptions opts;
  opts.max_iterations = 1;
  const GaussianCdfFit fit = fit_gaussian_cdf(est, opts);
  CHECK(!fit.converged);
  CHECK(fit.iterations <= 1);
  CHECK(fit.sigma > 0);
}

TEST_CASE("inverse-variance weighting accepts saturated points") {
  CdfEstimate est = gaussian_points(0.0, 0.2, 41, 6.0);  // tails saturate at 0/1
  bool has_degenerate = false;
  for (const auto& p : est.points) has_degenerate |= p.degenerate;
  REQUIRE(has_degenerate);
  GaussianFitOptions opts;
  opts.weighting = FitWeighting::inverse_variance;
  const GaussianCdfFit fit = fit_gaussian_cdf(est, opts);
  CHECK(std::fabs(fit.mu) <= 1e-6);
  CHECK(std::fabs(fit.sigma - 0.2) <= 1e-6);
}

TEST_CASE("non-monotone raw points still seed and fit") {
  CdfEstimate est = gaussian_points(0.0, 0.5, 41, 3.0, 0.04, 31);
  // force a few inversions
  std::swap(est.points[10].f_hat, est.points[11].f_hat);
  std::swap(est.points[25].f_hat, est.points[26].f_hat);
  const GaussianCdfFit fit = fit_gaussian_cdf(est);
  CHECK(fit.converged);
  CHECK(std::fabs(fit.mu) <= 0.05);
  CHECK(std::fabs(fit.sigma - 0.5) <= 0.05);
}
