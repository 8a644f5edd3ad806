#include "quantnoise/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace quantnoise {

QrLeastSquares::QrLeastSquares(Matrix a) : qr_(std::move(a)) {
  const int m = qr_.rows;
  const int n = qr_.cols;
  if (m < n || n < 1) throw std::invalid_argument("QR: need rows >= cols >= 1");
  tau_.assign(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    double* col = &qr_.data[static_cast<std::size_t>(j) * m];
    const double alpha = col[j];
    double tail = 0;
    for (int i = j + 1; i < m; ++i) tail += col[i] * col[i];
    if (tail == 0.0) {
      tau_[j] = 0.0;  // column already triangular
      continue;
    }
    const double norm = std::sqrt(alpha * alpha + tail);
    const double beta = (alpha >= 0) ? -norm : norm;
    tau_[j] = (beta - alpha) / beta;
    const double scale = 1.0 / (alpha - beta);
    for (int i = j + 1; i < m; ++i) col[i] *= scale;  // v, with v[j] = 1 implicit
    col[j] = beta;
    for (int c = j + 1; c < n; ++c) {
      double* cc = &qr_.data[static_cast<std::size_t>(c) * m];
      double dot = cc[j];
      for (int i = j + 1; i < m; ++i) dot += col[i] * cc[i];
      dot *= tau_[j];
      cc[j] -= dot;
      for (int i = j + 1; i < m; ++i) cc[i] -= dot * col[i];
    }
  }
}

std::vector<double> QrLeastSquares::solve(std::span<const double> rhs) const {
  const int m = qr_.rows;
  const int n = qr_.cols;
  if (static_cast<int>(rhs.size()) != m) {
    throw std::invalid_argument("QR solve: right-hand side length mismatch");
  }
  std::vector<double> w(rhs.begin(), rhs.end());
  for (int j = 0; j < n; ++j) {
    if (tau_[j] == 0.0) continue;
    const double* col = &qr_.data[static_cast<std::size_t>(j) * m];
    double dot = w[j];
    for (int i = j + 1; i < m; ++i) dot += col[i] * w[i];
    dot *= tau_[j];
    w[j] -= dot;
    for (int i = j + 1; i < m; ++i) w[i] -= dot * col[i];
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int j = n - 1; j >= 0; --j) {
    double s = w[j];
    for (int c = j + 1; c < n; ++c) s -= qr_.at(j, c) * x[c];
    const double d = qr_.at(j, j);
    if (d == 0.0) throw std::domain_error("QR solve: rank-deficient system");
    x[j] = s / d;
  }
  return x;
}

bool QrLeastSquares::rank_deficient(double relative_tolerance) const {
  double max_diag = 0;
  for (int j = 0; j < qr_.cols; ++j) max_diag = std::max(max_diag, std::fabs(qr_.at(j, j)));
  if (max_diag == 0.0) return true;
  for (int j = 0; j < qr_.cols; ++j) {
    if (std::fabs(qr_.at(j, j)) <= relative_tolerance * max_diag) return true;
  }
  return false;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line: need at least two points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::domain_error("fit_line: degenerate abscissas");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace quantnoise
