#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace quantnoise {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Standard normal CDF via erfc; absolute error well under 1e-12 on [-8, 8].
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Pool-adjacent-violators: closest nondecreasing sequence in (weighted) least
// squares. Empty weights mean unit weights.
std::vector<double> pava_nondecreasing(std::span<const double> values,
                                       std::span<const double> weights = {});

}  // namespace quantnoise
