#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "quantnoise/rng.hpp"

namespace quantnoise {

// Coherent sine: s_n = A sin(2*pi*periods*n/samples + initial_phase) + offset.
struct SineStimulus {
  double amplitude = 0;      // volts
  int periods = 1;           // whole periods across one record
  int samples = 0;           // N
  double initial_phase = 0;  // radians
  double offset = 0;         // volts
};

// DC levels applied one at a time; each level plays the role of a constant s_n.
struct SweptDcStimulus {
  std::vector<double> levels;
};

using Stimulus = std::variant<SineStimulus, SweptDcStimulus>;

enum class NoiseFamily { gaussian, uniform, laplace };

// Additive noise; `scale` is sigma for gaussian, the half-width for uniform
// and the diversity for laplace. All families are symmetric about `location`.
struct NoiseModel {
  NoiseFamily family = NoiseFamily::gaussian;
  double location = 0;  // volts
  double scale = 0;     // volts, > 0
  std::uint64_t seed = 0;
};

struct StimulusPlan {
  Stimulus stimulus;
  NoiseModel noise;
  int records = 1;  // R
};

NoiseFamily noise_family_from_name(const std::string& name);
std::string noise_family_name(NoiseFamily family);

int stimulus_length(const Stimulus& s);
void validate_stimulus(const Stimulus& s);  // throws config_error
void validate_plan(const StimulusPlan& plan);

// Non-fatal configuration advice, e.g. gcd(periods, samples) != 1.
std::optional<std::string> stimulus_warning(const Stimulus& s);

// The deterministic sequence s_n.
std::vector<double> render_sequence(const Stimulus& s);

// One noise draw from the model's family (location/scale applied).
double sample_noise(const NoiseModel& model, RandomStream& stream);

// Analytic CDF of the noise model at x.
double noise_cdf(const NoiseModel& model, double x);

// N x R sample container; storage is record-major so per-record generation
// writes contiguously.
class SampleMatrix {
 public:
  SampleMatrix(int samples, int records)
      : samples_(samples),
        records_(records),
        values_(static_cast<std::size_t>(samples) * records, 0.0) {}

  int samples() const { return samples_; }
  int records() const { return records_; }
  double at(int n, int r) const {
    return values_[static_cast<std::size_t>(r) * samples_ + n];
  }
  double& at(int n, int r) { return values_[static_cast<std::size_t>(r) * samples_ + n]; }

 private:
  int samples_;
  int records_;
  std::vector<double> values_;
};

// x(n,r) = s_n + eta(n,r), eta i.i.d. across n and r. Record r draws from the
// substream derive_seed(noise.seed, r), so the matrix is bit-identical for
// any worker count and records are independent of one another's generation.
SampleMatrix synthesize(const StimulusPlan& plan, int jobs = 1);

// CSV export, columns n,r,x.
void write_samples_csv(const SampleMatrix& x, const std::string& path);

}  // namespace quantnoise
