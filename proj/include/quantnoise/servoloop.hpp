#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quantnoise/linalg.hpp"
#include "quantnoise/quantizer.hpp"
#include "quantnoise/signal.hpp"

namespace quantnoise {

// Black-box device that quantizes (DC level + its own input noise). The
// servoloop only ever draws samples through this interface; it never reads
// device internals, so a hardware back end can slot in unchanged.
class DcSampler {
 public:
  virtual ~DcSampler() = default;

  // Per-code counts (index 1..num_codes) of `count` samples at the DC level.
  virtual std::vector<long long> sample(double dc_level, long long count) = 0;

  virtual int num_codes() const = 0;

  // A device whose sampling state is shared must be driven sequentially.
  virtual bool concurrent_safe() const { return false; }
};

// Simulated device: a quantizer model plus additive input noise. Each call
// draws from a fresh substream of the device seed, sequenced by a call
// counter, so a fixed call order reproduces bit-identically.
class SimulatedDcDevice : public DcSampler {
 public:
  SimulatedDcDevice(QuantizerModel quantizer, NoiseModel noise, std::uint64_t seed);

  std::vector<long long> sample(double dc_level, long long count) override;
  int num_codes() const override { return quantizer_.num_codes(); }

  const QuantizerModel& quantizer() const { return quantizer_; }

 private:
  QuantizerModel quantizer_;
  NoiseModel noise_;
  std::uint64_t seed_;
  std::atomic<std::uint64_t> calls_{0};
};

// Feedback search for the DC level where codes <= k occur half the time.
// The step direction follows the observed fraction and the step size decays
// on every direction reversal until it falls below `tolerance`.
struct ServoloopConfig {
  std::vector<int> targets;            // transition indices, each in 1..K-1
  long long samples_per_step = 10000;  // M
  double initial_step = 0;             // volts, > 0
  double decay = 0.5;                  // per reversal, in (0, 1)
  int max_iterations = 200;
  double tolerance = 0;                // volts, > 0
  double start_level = 0;              // fallback first probe level
  std::vector<double> start_levels;    // optional per-target probe levels
};

struct TransitionEstimate {
  int k = 0;               // transition index: level between codes k and k+1
  double level = 0;        // estimated T_k
  int iterations = 0;
  double final_fraction = 0;  // fraction of codes <= k at the returned level
  bool converged = false;
};

struct CalibrationResult {
  std::vector<TransitionEstimate> entries;
  std::vector<std::string> failures;   // per-target error messages
  std::optional<LineFit> line;         // T_hat ~ gain*k + offset
  double max_line_deviation = 0;       // max |T_hat - line| over fitted entries
};

// Locates one transition level. Throws calibration_error when the device
// turns out noiseless (the output fraction never leaves {0,1} even though the
// loop has bracketed the level from both sides: without noise the code cannot
// straddle the threshold).
TransitionEstimate servoloop(DcSampler& device, const ServoloopConfig& config, int k,
                             std::optional<double> start_level = std::nullopt);

// Runs the servoloop for every configured target, then fits a straight line
// through the recovered levels and reports the worst deviation from it (the
// usual integral-nonlinearity figure). Per-target failures are recorded, not
// fatal.
CalibrationResult calibrate_all(DcSampler& device, const ServoloopConfig& config);

// CSV with columns k,T_hat,iterations,final_fraction,converged plus line-fit
// summary comments.
void write_calibration_csv(const CalibrationResult& result, const std::string& path);

// Converged levels as a quantizer model (needs at least 3 of them).
QuantizerModel quantizer_from_calibration(const CalibrationResult& result);

}  // namespace quantnoise
