#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace quantnoise {

// Dense column-major matrix; small fixed column counts only.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // column-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(c) * rows + r]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(c) * rows + r]; }
};

// Householder QR of a tall matrix, reusable across right-hand sides. Solves
// the least-squares problem without forming normal equations.
class QrLeastSquares {
 public:
  explicit QrLeastSquares(Matrix a);

  // Minimum-norm-residual solution for one right-hand side of length rows().
  std::vector<double> solve(std::span<const double> rhs) const;

  bool rank_deficient(double relative_tolerance = 1e-12) const;

  int rows() const { return qr_.rows; }
  int cols() const { return qr_.cols; }

 private:
  Matrix qr_;                // Householder vectors below the diagonal, R above
  std::vector<double> tau_;  // reflector scalars
};

struct LineFit {
  double slope = 0;
  double intercept = 0;
};

// Ordinary least-squares straight line y ~ slope*x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace quantnoise
