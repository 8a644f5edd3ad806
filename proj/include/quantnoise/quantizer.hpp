#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace quantnoise {

// Memoryless quantizer with K code bins delimited by K+1 transition levels
// T_0 < T_1 < ... < T_K (volts). Code k in 1..K covers [T_{k-1}, T_k); a
// level exactly on a transition belongs to the upper bin. Inputs outside
// [T_0, T_K) saturate to codes 1 and K, so quantize() is total.
//
// Codes are bare ordinal indices: the estimators in this library only ever
// compare them, they never map codes back to voltages.
class QuantizerModel {
 public:
  explicit QuantizerModel(std::vector<double> transitions);

  int num_codes() const { return static_cast<int>(transitions_.size()) - 1; }
  const std::vector<double>& transitions() const { return transitions_; }
  double transition(int k) const { return transitions_[static_cast<std::size_t>(k)]; }

  // Mean bin width (T_K - T_0)/K; the nominal step for uniform models.
  double step() const {
    return (transitions_.back() - transitions_.front()) / num_codes();
  }

  int quantize(double x) const;

  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::vector<double> transitions_;
  std::uint64_t fingerprint_ = 0;
};

// Ideal uniform quantizer: 2^bits bins over [full_scale_low, full_scale_high)
// with step (high - low)/2^bits. Endpoints are stored exactly.
QuantizerModel make_uniform(int bits, double full_scale_low, double full_scale_high);

// Displaces each interior transition by an independent seeded uniform offset
// in [-inl_bound, +inl_bound], keeping T_0 and T_K fixed. Requires
// inl_bound < (smallest bin width)/2 so strict monotonicity stays achievable.
QuantizerModel make_perturbed(const QuantizerModel& base, double inl_bound, std::uint64_t seed);

// Plain-text transitions file, one level per line in shortest round-trip
// decimal. Save/load round-trips bit-exactly.
void save_transitions(const QuantizerModel& q, const std::string& path);
QuantizerModel load_transitions(const std::string& path);

}  // namespace quantnoise
