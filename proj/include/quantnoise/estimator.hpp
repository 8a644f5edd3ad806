#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quantnoise/partition.hpp"
#include "quantnoise/records.hpp"

namespace quantnoise {

// One sampled CDF value. f_hat is always an exact multiple of
// 1/(records * multiplicity); count is the raw indicator total so that
// exactness is checkable. var_hat is the plug-in binomial variance
// f(1-f)/(R*L); when f_hat is exactly 0 or 1 the plug-in variance collapses
// to 0 and the point is flagged degenerate.
struct CdfPoint {
  double x = 0;
  double f_hat = 0;
  double var_hat = 0;
  long long count = 0;
  int multiplicity = 1;
  bool degenerate = false;
};

// Parameters of an attached parametric model (filled by the gaussian fit).
struct AttachedFit {
  double mu = 0;
  double sigma = 0;
  double max_residual = 0;
  bool converged = false;
};

struct CdfEstimate {
  std::vector<CdfPoint> points;  // ascending in x
  int records = 0;
  double tolerance = 0;
  int k_lo = 1;
  int k_hi = 0;
  std::uint64_t quantizer_fp = 0;
  std::uint64_t stimulus_fp = 0;
  std::optional<AttachedFit> fitted;
};

struct EstimateOptions {
  // The stimulus fingerprint check rejects records paired with a partition
  // from a different sequence. Pipelines that estimate the sequence from the
  // records themselves intentionally build the partition from the estimated
  // sequence and must opt out.
  bool require_matching_stimulus = true;
};

// The sampled-CDF estimator: for every group j,
//   f_hat_j = (1/(R*L_j)) * sum over (n,k) in S_j, sum over r of [y(n,r) <= k].
// The indicator uses code order only. Throws estimation_error when records and
// partition do not describe the same acquisition.
CdfEstimate estimate_cdf(const CodeRecords& records, const PartitionTable& partition,
                         const EstimateOptions& options = {});

// Binomial variance of the estimator at a point with true CDF value f.
double theoretical_variance(double f, long long records, long long multiplicity);

// Piecewise-linear interpolant through the sampled points with constant
// extension outside [x_1, x_L]. With monotone = true the ordinates first get
// an isotonic (pool-adjacent-violators) pass.
class CdfInterpolant {
 public:
  CdfInterpolant(const CdfEstimate& estimate, bool monotone);
  double operator()(double x) const;

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

double interpolate_cdf(const CdfEstimate& estimate, double x, bool monotone = false);

// Abscissa where the isotonic interpolant reaches probability p (clamped to
// the sampled range). Used to seed parametric fits.
double cdf_quantile(const CdfEstimate& estimate, double p);

enum class PdfMethod { analytic_from_fit, central_difference };

// PDF estimate as (x, density) pairs. The analytic mode evaluates the
// attached parametric fit; the numeric mode takes centered differences
// (f[j+w]-f[j-w])/(x[j+w]-x[j-w]) at interior points.
std::vector<std::pair<double, double>> pdf_from_cdf(const CdfEstimate& estimate,
                                                    PdfMethod method, int window = 1);

// Approximate bound band due to a bias of at most delta_eps on the abscissas:
// lower_j = F(x_j - delta_eps), upper_j = F(x_j + delta_eps), both read off
// the isotonic interpolant so the band is ordered pointwise.
struct ErrorBounds {
  double delta_eps = 0;
  std::vector<double> x;
  std::vector<double> lower;
  std::vector<double> upper;
};

ErrorBounds bound_curves(const CdfEstimate& estimate, double delta_eps);

// CSV with columns j,x_j,L_j,F_hat,var_hat. A fitted model, when attached, is
// recorded as a "# fit: ..." comment in the header. read_estimate_csv accepts
// exactly what write_estimate_csv produces.
void write_estimate_csv(const CdfEstimate& estimate, const std::string& path);
CdfEstimate read_estimate_csv(const std::string& path);

void write_bounds_csv(const ErrorBounds& bounds, const std::string& path);

void write_pdf_csv(const std::vector<std::pair<double, double>>& pdf, PdfMethod method,
                   const std::string& path);

}  // namespace quantnoise
