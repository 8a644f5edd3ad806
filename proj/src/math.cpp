#include "quantnoise/math.hpp"

#include <stdexcept>

namespace quantnoise {

std::vector<double> pava_nondecreasing(std::span<const double> values,
                                       std::span<const double> weights) {
  if (!weights.empty() && weights.size() != values.size()) {
    throw std::invalid_argument("pava: weight count mismatch");
  }
  const std::size_t n = values.size();
  std::vector<double> level;   // block means
  std::vector<double> weight;  // block weights
  std::vector<std::size_t> size;
  level.reserve(n);
  weight.reserve(n);
  size.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = values[i];
    double w = weights.empty() ? 1.0 : weights[i];
    std::size_t s = 1;
    while (!level.empty() && level.back() > v) {
      v = (level.back() * weight.back() + v * w) / (weight.back() + w);
      w += weight.back();
      s += size.back();
      level.pop_back();
      weight.pop_back();
      size.pop_back();
    }
    level.push_back(v);
    weight.push_back(w);
    size.push_back(s);
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t b = 0; b < level.size(); ++b) {
    for (std::size_t k = 0; k < size[b]; ++k) out.push_back(level[b]);
  }
  return out;
}

}  // namespace quantnoise
