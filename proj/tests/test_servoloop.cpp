#include <doctest.h>

#include <cmath>
#include <vector>

#include "quantnoise/errors.hpp"
#include "quantnoise/servoloop.hpp"

using namespace quantnoise;

namespace {

// Deterministic quantizer with no input noise at all.
class NoiselessDevice : public DcSampler {
 public:
  explicit NoiselessDevice(QuantizerModel q) : q_(std::move(q)) {}
  std::vector<long long> sample(double dc_level, long long count) override {
    std::vector<long long> hist(static_cast<std::size_t>(q_.num_codes()) + 1, 0);
    hist[static_cast<std::size_t>(q_.quantize(dc_level))] = count;
    return hist;
  }
  int num_codes() const override { return q_.num_codes(); }

 private:
  QuantizerModel q_;
};

ServoloopConfig basic_config(const QuantizerModel& q) {
  ServoloopConfig cfg;
  cfg.samples_per_step = 10000;
  cfg.initial_step = 0.5 * q.step();
  cfg.decay = 0.5;
  cfg.tolerance = 1e-3 * q.step();
  cfg.max_iterations = 200;
  return cfg;
}

}  // namespace

TEST_CASE("servoloop recovers mid-range transitions of an ideal device") {
  const QuantizerModel q = make_uniform(8, -1.0, 1.0);
  const double step = q.step();
  NoiseModel noise{NoiseFamily::gaussian, 0.0, 0.2 * step, 11};
  SimulatedDcDevice device(q, noise, 31);
  const ServoloopConfig cfg = basic_config(q);
  for (int k : {100, 128, 156}) {
    const TransitionEstimate e = servoloop(device, cfg, k, q.transition(k));
    CHECK(e.converged);
    CHECK(std::fabs(e.level - q.transition(k)) <= 0.02 * step);
    CHECK(std::fabs(e.final_fraction - 0.5) <= 0.1);
  }
}

TEST_CASE("zero-median noise of any symmetric family centers on the transition") {
  const QuantizerModel q = make_uniform(8, -1.0, 1.0);
  const double step = q.step();
  const ServoloopConfig cfg = basic_config(q);
  for (NoiseFamily family :
       {NoiseFamily::gaussian, NoiseFamily::uniform, NoiseFamily::laplace}) {
    NoiseModel noise{family, 0.0, 0.25 * step, 5};
    SimulatedDcDevice device(q, noise, 17 + static_cast<std::uint64_t>(family));
    const TransitionEstimate e = servoloop(device, cfg, 128, q.transition(128));
    CHECK(e.converged);
    CHECK(std::fabs(e.level - q.transition(128)) <= 0.02 * step);
  }
}

TEST_CASE("servoloop travels to a distant transition") {
  const QuantizerModel q = make_uniform(8, -1.0, 1.0);
  NoiseModel noise{NoiseFamily::gaussian, 0.0, 0.2 * q.step(), 3};
  SimulatedDcDevice device(q, noise, 7);
  ServoloopConfig cfg = basic_config(q);
  cfg.max_iterations = 500;
  const int k = 148;  // 20 steps above the start level
  const TransitionEstimate e = servoloop(device, cfg, k, 0.0);
  CHECK(e.converged);
  CHECK(std::fabs(e.level - q.transition(k)) <= 0.02 * q.step());
}

TEST_CASE("a noiseless device raises the documented calibration error") {
  const QuantizerModel q = make_uniform(8, -1.0, 1.0);
  NoiselessDevice device(q);
  const ServoloopConfig cfg = basic_config(q);
  CHECK_THROWS_WITH_AS(servoloop(device, cfg, 128, q.transition(128)),
                       doctest::Contains("noise is required"), calibration_error);
}

TEST_CASE("servoloop validates its configuration") {
  const QuantizerModel q = make_uniform(4, -1.0, 1.0);
  NoiseModel noise{NoiseFamily::gaussian, 0.0, 0.1, 1};
  SimulatedDcDevice device(q, noise, 1);
  ServoloopConfig cfg = basic_config(q);
  cfg.decay = 1.5;
  CHECK_THROWS_AS(servoloop(device, cfg, 2), config_error);
  cfg = basic_config(q);
  cfg.tolerance = 0;
  CHECK_THROWS_AS(servoloop(device, cfg, 2), config_error);
  cfg = basic_config(q);
  CHECK_THROWS_AS(servoloop(device, cfg, 0), config_error);
  CHECK_THROWS_AS(servoloop(device, cfg, q.num_codes()), config_error);
  CHECK_THROWS_AS(SimulatedDcDevice(q, NoiseModel{NoiseFamily::gaussian, 0, 0, 1}, 1),
                  config_error);
}

TEST_CASE("doubling the samples per step tightens the estimates") {
  const QuantizerModel q = make_uniform(6, -1.0, 1.0);
  const double truth = q.transition(32);
  auto spread = [&](long long samples, std::uint64_t seed_base) {
    ServoloopConfig cfg = basic_config(q);
    cfg.samples_per_step = samples;
    double mean = 0, m2 = 0;
    const int runs = 30;
    for (int i = 0; i < runs; ++i) {
      NoiseModel noise{NoiseFamily::gaussian, 0.0, 0.2 * q.step(), 0};
      SimulatedDcDevice device(q, noise, seed_base + static_cast<std::uint64_t>(i));
      const double err = servoloop(device, cfg, 32, truth).level - truth;
      const double delta = err - mean;
      mean += delta / (i + 1);
      m2 += delta * (err - mean);
    }
    return m2 / (runs - 1);
  };
  const double var_single = spread(4000, 1000);
  const double var_double = spread(8000, 2000);
  CHECK(var_double / var_single < 0.7);
}

TEST_CASE("full calibration fits a line and reproduces injected nonlinearity") {
  const QuantizerModel ideal = make_uniform(8, -1.0, 1.0);
  const double step = ideal.step();
  ServoloopConfig cfg = basic_config(ideal);
  for (int k = 96; k <= 160; k += 8) {
    cfg.targets.push_back(k);
    cfg.start_levels.push_back(ideal.transition(k));
  }

  NoiseModel noise{NoiseFamily::gaussian, 0.0, 0.2 * step, 0};

  SimulatedDcDevice ideal_device(ideal, noise, 41);
  const CalibrationResult flat = calibrate_all(ideal_device, cfg);
  REQUIRE(flat.failures.empty());
  REQUIRE(flat.line.has_value());
  CHECK(flat.max_line_deviation <= 0.03 * step);
  for (std::size_t i = 1; i < flat.entries.size(); ++i) {
    CHECK(flat.entries[i - 1].level < flat.entries[i].level);
  }

  const QuantizerModel bent = make_perturbed(ideal, step / 4.0, 9);
  SimulatedDcDevice bent_device(bent, noise, 42);
  const CalibrationResult result = calibrate_all(bent_device, cfg);
  REQUIRE(result.failures.empty());
  REQUIRE(result.line.has_value());
  CHECK(result.max_line_deviation <= step / 4.0 + 0.03 * step);
  for (const auto& e : result.entries) {
    CHECK(std::fabs(e.level - bent.transition(e.k)) <= 0.02 * step);
  }

  const QuantizerModel window = quantizer_from_calibration(result);
  CHECK(window.num_codes() == static_cast<int>(cfg.targets.size()) - 1);
}
