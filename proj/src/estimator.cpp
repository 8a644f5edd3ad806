#include "quantnoise/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"
#include "quantnoise/math.hpp"

namespace quantnoise {

CdfEstimate estimate_cdf(const CodeRecords& records, const PartitionTable& partition,
                         const EstimateOptions& options) {
  if (records.samples() != partition.samples) {
    throw estimation_error("records have N=" + std::to_string(records.samples()) +
                           " but partition was built for N=" +
                           std::to_string(partition.samples));
  }
  if (records.quantizer_fingerprint() != partition.quantizer_fp) {
    throw estimation_error("quantizer fingerprint mismatch between records and partition");
  }
  if (options.require_matching_stimulus &&
      records.stimulus_fingerprint() != partition.stimulus_fp) {
    throw estimation_error(
        "stimulus fingerprint mismatch between records and partition; pass "
        "require_matching_stimulus=false only when the partition abscissas are estimates");
  }
  if (partition.k_hi > records.num_codes() - 1) {
    throw estimation_error("partition uses transition indices beyond the code range");
  }

  const int n_samples = records.samples();
  const int n_records = records.records();
  const int n_codes = records.num_codes();

  // cum[n][k] = number of records with y(n, .) <= k, k = 0..K
  const std::size_t row = static_cast<std::size_t>(n_codes) + 1;
  std::vector<long long> cum(static_cast<std::size_t>(n_samples) * row, 0);
  for (int r = 0; r < n_records; ++r) {
    for (int n = 0; n < n_samples; ++n) {
      ++cum[static_cast<std::size_t>(n) * row + static_cast<std::size_t>(records.code(n, r))];
    }
  }
  for (int n = 0; n < n_samples; ++n) {
    long long* c = &cum[static_cast<std::size_t>(n) * row];
    for (std::size_t k = 1; k < row; ++k) c[k] += c[k - 1];
  }

  CdfEstimate est;
  est.records = n_records;
  est.tolerance = partition.tolerance;
  est.k_lo = partition.k_lo;
  est.k_hi = partition.k_hi;
  est.quantizer_fp = partition.quantizer_fp;
  est.stimulus_fp = partition.stimulus_fp;
  est.points.reserve(partition.groups.size());

  for (const auto& group : partition.groups) {
    long long count = 0;
    for (const auto& [n, k] : group.members) {
      count += cum[static_cast<std::size_t>(n) * row + static_cast<std::size_t>(k)];
    }
    CdfPoint p;
    p.x = group.x;
    p.multiplicity = group.multiplicity();
    p.count = count;
    const double denom = static_cast<double>(n_records) * p.multiplicity;
    p.f_hat = static_cast<double>(count) / denom;
    p.var_hat = theoretical_variance(p.f_hat, n_records, p.multiplicity);
    p.degenerate = (count == 0 || p.f_hat == 1.0);
    est.points.push_back(p);
  }
  return est;
}

double theoretical_variance(double f, long long records, long long multiplicity) {
  return f * (1.0 - f) / (static_cast<double>(records) * static_cast<double>(multiplicity));
}

CdfInterpolant::CdfInterpolant(const CdfEstimate& estimate, bool monotone) {
  if (estimate.points.size() < 2) {
    throw estimation_error("interpolation needs at least 2 CDF points");
  }
  xs_.reserve(estimate.points.size());
  ys_.reserve(estimate.points.size());
  for (const auto& p : estimate.points) {
    xs_.push_back(p.x);
    ys_.push_back(p.f_hat);
  }
  if (monotone) ys_ = pava_nondecreasing(ys_);
}

double CdfInterpolant::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const std::size_t i =
      static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
  const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
  return ys_[i - 1] + t * (ys_[i] - ys_[i - 1]);
}

double interpolate_cdf(const CdfEstimate& estimate, double x, bool monotone) {
  return CdfInterpolant(estimate, monotone)(x);
}

double cdf_quantile(const CdfEstimate& estimate, double p) {
  if (estimate.points.size() < 2) {
    throw estimation_error("quantile lookup needs at least 2 CDF points");
  }
  std::vector<double> xs, ys;
  xs.reserve(estimate.points.size());
  ys.reserve(estimate.points.size());
  for (const auto& pt : estimate.points) {
    xs.push_back(pt.x);
    ys.push_back(pt.f_hat);
  }
  ys = pava_nondecreasing(ys);
  if (p <= ys.front()) return xs.front();
  if (p >= ys.back()) return xs.back();
  const std::size_t i =
      static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), p) - ys.begin());
  // ys[i-1] < p <= ys[i], so the segment is strictly rising here
  return xs[i - 1] + (p - ys[i - 1]) * (xs[i] - xs[i - 1]) / (ys[i] - ys[i - 1]);
}

std::vector<std::pair<double, double>> pdf_from_cdf(const CdfEstimate& estimate,
                                                    PdfMethod method, int window) {
  std::vector<std::pair<double, double>> pdf;
  if (method == PdfMethod::analytic_from_fit) {
    if (!estimate.fitted) {
      throw estimation_error("analytic PDF requires an attached parametric fit");
    }
    const double mu = estimate.fitted->mu;
    const double sigma = estimate.fitted->sigma;
    pdf.reserve(estimate.points.size());
    for (const auto& p : estimate.points) {
      pdf.emplace_back(p.x, normal_pdf((p.x - mu) / sigma) / sigma);
    }
    return pdf;
  }
  const int n = static_cast<int>(estimate.points.size());
  if (n < 3) throw estimation_error("numeric PDF needs at least 3 CDF points");
  if (window < 1 || 2 * window >= n) {
    throw estimation_error("numeric PDF window too large for " + std::to_string(n) + " points");
  }
  pdf.reserve(static_cast<std::size_t>(n - 2 * window));
  for (int j = window; j < n - window; ++j) {
    const auto& lo = estimate.points[static_cast<std::size_t>(j - window)];
    const auto& hi = estimate.points[static_cast<std::size_t>(j + window)];
    pdf.emplace_back(estimate.points[static_cast<std::size_t>(j)].x,
                     (hi.f_hat - lo.f_hat) / (hi.x - lo.x));
  }
  return pdf;
}

ErrorBounds bound_curves(const CdfEstimate& estimate, double delta_eps) {
  if (!(delta_eps >= 0) || !std::isfinite(delta_eps)) {
    throw estimation_error("delta_eps must be a finite non-negative voltage");
  }
  const CdfInterpolant f(estimate, /*monotone=*/true);
  ErrorBounds b;
  b.delta_eps = delta_eps;
  b.x.reserve(estimate.points.size());
  b.lower.reserve(estimate.points.size());
  b.upper.reserve(estimate.points.size());
  for (const auto& p : estimate.points) {
    b.x.push_back(p.x);
    b.lower.push_back(f(p.x - delta_eps));
    b.upper.push_back(f(p.x + delta_eps));
  }
  return b;
}

void write_estimate_csv(const CdfEstimate& estimate, const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-estimate v1 R=" << estimate.records
      << " tau=" << format_double(estimate.tolerance) << " k_lo=" << estimate.k_lo
      << " k_hi=" << estimate.k_hi << " quantizer_fp=" << format_hex64(estimate.quantizer_fp)
      << " stimulus_fp=" << format_hex64(estimate.stimulus_fp) << "\n";
  if (estimate.fitted) {
    out << "# fit: mu=" << format_double(estimate.fitted->mu)
        << " sigma=" << format_double(estimate.fitted->sigma)
        << " maxres=" << format_double(estimate.fitted->max_residual)
        << " converged=" << (estimate.fitted->converged ? "true" : "false") << "\n";
  }
  out << "j,x_j,L_j,F_hat,var_hat\n";
  for (std::size_t j = 0; j < estimate.points.size(); ++j) {
    const auto& p = estimate.points[j];
    out << j << ',' << format_double(p.x) << ',' << p.multiplicity << ','
        << format_double(p.f_hat) << ',' << format_double(p.var_hat) << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

CdfEstimate read_estimate_csv(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# quantnoise-estimate v1", 0) != 0) {
    throw io_error("unrecognized estimate file header: " + path);
  }
  CdfEstimate est;
  std::string tmp;
  auto need = [&](const char* key) {
    if (!header_value(line, key, tmp)) {
      throw io_error(std::string("estimate header missing ") + key + ": " + path);
    }
    return tmp;
  };
  est.records = static_cast<int>(parse_int(need("R")));
  est.tolerance = parse_double(need("tau"));
  est.k_lo = static_cast<int>(parse_int(need("k_lo")));
  est.k_hi = static_cast<int>(parse_int(need("k_hi")));
  est.quantizer_fp = parse_hex64(need("quantizer_fp"));
  est.stimulus_fp = parse_hex64(need("stimulus_fp"));
  if (est.records < 1) throw io_error("estimate header has R < 1: " + path);

  while (std::getline(in, line)) {
    auto s = trim(line);
    if (s.empty()) continue;
    if (s.rfind("# fit:", 0) == 0) {
      AttachedFit fit;
      fit.mu = parse_double(need("mu"));
      fit.sigma = parse_double(need("sigma"));
      fit.max_residual = parse_double(need("maxres"));
      fit.converged = need("converged") == "true";
      est.fitted = fit;
      continue;
    }
    if (s.front() == '#' || s == "j,x_j,L_j,F_hat,var_hat") continue;
    auto cols = split(s, ',');
    if (cols.size() != 5) throw io_error("estimate row needs 5 columns: " + path);
    CdfPoint p;
    p.x = parse_double(cols[1]);
    p.multiplicity = static_cast<int>(parse_int(cols[2]));
    p.f_hat = parse_double(cols[3]);
    p.var_hat = parse_double(cols[4]);
    if (p.multiplicity < 1) throw io_error("estimate row has L_j < 1: " + path);
    const double denom = static_cast<double>(est.records) * p.multiplicity;
    p.count = std::llround(p.f_hat * denom);
    p.degenerate = (p.f_hat == 0.0 || p.f_hat == 1.0);
    if (!est.points.empty() && !(est.points.back().x < p.x)) {
      throw io_error("estimate abscissas must be strictly increasing: " + path);
    }
    est.points.push_back(p);
  }
  return est;
}

void write_bounds_csv(const ErrorBounds& bounds, const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-bounds v1 delta_eps=" << format_double(bounds.delta_eps) << "\n";
  out << "x,lower,upper\n";
  for (std::size_t i = 0; i < bounds.x.size(); ++i) {
    out << format_double(bounds.x[i]) << ',' << format_double(bounds.lower[i]) << ','
        << format_double(bounds.upper[i]) << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

void write_pdf_csv(const std::vector<std::pair<double, double>>& pdf, PdfMethod method,
                   const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-pdf v1 method="
      << (method == PdfMethod::analytic_from_fit ? "analytic" : "central-difference") << "\n";
  out << "x,density\n";
  for (const auto& [x, d] : pdf) {
    out << format_double(x) << ',' << format_double(d) << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace quantnoise
