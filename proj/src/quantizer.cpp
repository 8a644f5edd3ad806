#include "quantnoise/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"
#include "quantnoise/rng.hpp"

namespace quantnoise {

QuantizerModel::QuantizerModel(std::vector<double> transitions)
    : transitions_(std::move(transitions)) {
  if (transitions_.size() < 3) {
    throw config_error("quantizer needs at least 3 transition levels (K >= 2)");
  }
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    if (!std::isfinite(transitions_[i])) {
      throw config_error("quantizer transition levels must be finite");
    }
    if (i > 0 && !(transitions_[i - 1] < transitions_[i])) {
      throw config_error("quantizer transition levels must be strictly increasing");
    }
  }
  fingerprint_ = fingerprint_of(transitions_);
}

int QuantizerModel::quantize(double x) const {
  // index of the first transition above x == count of levels <= x
  const auto it = std::upper_bound(transitions_.begin(), transitions_.end(), x);
  const int idx = static_cast<int>(it - transitions_.begin());
  return std::clamp(idx, 1, num_codes());
}

QuantizerModel make_uniform(int bits, double full_scale_low, double full_scale_high) {
  if (bits < 1 || bits > 20) {
    throw config_error("quantizer bits must be in 1..20, got " + std::to_string(bits));
  }
  if (!std::isfinite(full_scale_low) || !std::isfinite(full_scale_high) ||
      !(full_scale_low < full_scale_high)) {
    throw config_error("quantizer full-scale range must satisfy low < high");
  }
  const int codes = 1 << bits;
  const double step = (full_scale_high - full_scale_low) / codes;
  std::vector<double> t(static_cast<std::size_t>(codes) + 1);
  for (int k = 0; k <= codes; ++k) {
    t[static_cast<std::size_t>(k)] = full_scale_low + k * step;
  }
  // endpoints exact regardless of rounding in the interior sums
  t.front() = full_scale_low;
  t.back() = full_scale_high;
  return QuantizerModel(std::move(t));
}

QuantizerModel make_perturbed(const QuantizerModel& base, double inl_bound, std::uint64_t seed) {
  if (!std::isfinite(inl_bound) || inl_bound < 0) {
    throw config_error("perturbation bound must be a finite non-negative voltage");
  }
  if (inl_bound == 0.0) return base;

  const auto& t = base.transitions();
  double min_gap = t[1] - t[0];
  for (std::size_t i = 2; i < t.size(); ++i) min_gap = std::min(min_gap, t[i] - t[i - 1]);
  if (inl_bound >= 0.5 * min_gap) {
    throw config_error("perturbation bound " + format_double(inl_bound) +
                       " >= half the smallest bin width " + format_double(min_gap) +
                       "; monotonicity not achievable");
  }

  std::vector<double> out = t;
  RandomStream rng(derive_seed(seed, 0x7145u));
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    double candidate = 0;
    int tries = 0;
    do {
      candidate = t[k] + inl_bound * (2.0 * rng.uniform01() - 1.0);
      if (++tries > 128) {
        throw config_error("could not keep perturbed transitions monotone");
      }
    } while (!(candidate > out[k - 1]));  // resample against the already-fixed neighbor
    out[k] = candidate;
  }
  return QuantizerModel(std::move(out));  // constructor re-validates monotonicity
}

void save_transitions(const QuantizerModel& q, const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-transitions v1 K=" << q.num_codes() << "\n";
  for (double t : q.transitions()) out << format_double(t) << "\n";
  if (!out) throw io_error("write failed: " + path);
}

QuantizerModel load_transitions(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty transitions file: " + path);
  if (line.rfind("# quantnoise-transitions v1", 0) != 0) {
    throw io_error("unrecognized transitions file header: " + path);
  }
  std::string k_text;
  if (!header_value(line, "K", k_text)) throw io_error("transitions header missing K: " + path);
  const long long codes = parse_int(k_text);
  if (codes < 2) throw io_error("transitions header has K < 2: " + path);

  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(codes) + 1);
  while (std::getline(in, line)) {
    auto s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    t.push_back(parse_double(s));
  }
  if (static_cast<long long>(t.size()) != codes + 1) {
    throw io_error("transitions file: expected " + std::to_string(codes + 1) + " levels, got " +
                   std::to_string(t.size()));
  }
  return QuantizerModel(std::move(t));
}

}  // namespace quantnoise
