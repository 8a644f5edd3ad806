#include "quantnoise/servoloop.hpp"

#include <cmath>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"

namespace quantnoise {

SimulatedDcDevice::SimulatedDcDevice(QuantizerModel quantizer, NoiseModel noise,
                                     std::uint64_t seed)
    : quantizer_(std::move(quantizer)), noise_(noise), seed_(seed) {
  if (!(noise_.scale > 0) || !std::isfinite(noise_.scale)) {
    throw config_error("simulated device noise scale must be positive");
  }
}

std::vector<long long> SimulatedDcDevice::sample(double dc_level, long long count) {
  std::vector<long long> hist(static_cast<std::size_t>(quantizer_.num_codes()) + 1, 0);
  RandomStream stream(derive_seed(seed_, calls_.fetch_add(1)));
  for (long long i = 0; i < count; ++i) {
    const double x = dc_level + sample_noise(noise_, stream);
    ++hist[static_cast<std::size_t>(quantizer_.quantize(x))];
  }
  return hist;
}

namespace {

void validate_config(const ServoloopConfig& cfg, int num_codes) {
  if (cfg.samples_per_step < 1) throw config_error("servoloop needs samples_per_step >= 1");
  if (!(cfg.decay > 0) || !(cfg.decay < 1)) throw config_error("servoloop decay must be in (0,1)");
  if (!(cfg.tolerance > 0) || !std::isfinite(cfg.tolerance)) {
    throw config_error("servoloop tolerance must be positive");
  }
  if (!(cfg.initial_step > 0) || !std::isfinite(cfg.initial_step)) {
    throw config_error("servoloop initial step must be positive");
  }
  if (cfg.max_iterations < 1) throw config_error("servoloop max_iterations must be positive");
  for (int k : cfg.targets) {
    if (k < 1 || k > num_codes - 1) {
      throw config_error("servoloop target " + std::to_string(k) +
                         " outside interior transitions 1.." + std::to_string(num_codes - 1));
    }
  }
}

double fraction_at_or_below(const std::vector<long long>& hist, int k, long long total) {
  long long below = 0;
  for (int c = 1; c <= k && c < static_cast<int>(hist.size()); ++c) {
    below += hist[static_cast<std::size_t>(c)];
  }
  return static_cast<double>(below) / static_cast<double>(total);
}

}  // namespace

TransitionEstimate servoloop(DcSampler& device, const ServoloopConfig& config, int k,
                             std::optional<double> start_level) {
  validate_config(config, device.num_codes());
  if (k < 1 || k > device.num_codes() - 1) {
    throw config_error("servoloop target " + std::to_string(k) +
                       " outside interior transitions 1.." +
                       std::to_string(device.num_codes() - 1));
  }

  double level = start_level.value_or(config.start_level);
  double step = config.initial_step;
  int previous_direction = 0;
  bool saw_interior = false;
  bool saw_all_below = false;
  bool saw_none_below = false;
  bool balanced = false;
  int iterations = 0;

  while (iterations < config.max_iterations && step >= config.tolerance) {
    ++iterations;
    const auto hist = device.sample(level, config.samples_per_step);
    const double frac = fraction_at_or_below(hist, k, config.samples_per_step);
    if (frac > 0.0 && frac < 1.0) saw_interior = true;
    if (frac == 1.0) saw_all_below = true;
    if (frac == 0.0) saw_none_below = true;

    // frac > 1/2 means the level sits below the transition: move up.
    const int direction = frac > 0.5 ? +1 : (frac < 0.5 ? -1 : 0);
    if (direction == 0) {
      balanced = true;  // output already straddles half/half
      break;
    }
    if (previous_direction != 0 && direction != previous_direction) step *= config.decay;
    level += direction * step;
    previous_direction = direction;
  }

  TransitionEstimate out;
  out.k = k;
  out.level = level;
  out.iterations = iterations;
  out.converged = balanced || step < config.tolerance;

  const auto hist = device.sample(level, config.samples_per_step);
  out.final_fraction = fraction_at_or_below(hist, k, config.samples_per_step);
  if (out.final_fraction > 0.0 && out.final_fraction < 1.0) saw_interior = true;

  if (!saw_interior && saw_all_below && saw_none_below) {
    throw calibration_error(
        "device output fraction never left {0,1}: noise is required to dither the "
        "threshold, a noiseless device cannot be calibrated by the servoloop");
  }
  return out;
}

CalibrationResult calibrate_all(DcSampler& device, const ServoloopConfig& config) {
  validate_config(config, device.num_codes());
  if (config.targets.empty()) throw config_error("servoloop has no target transitions");
  if (!config.start_levels.empty() && config.start_levels.size() != config.targets.size()) {
    throw config_error("servoloop start_levels must match targets");
  }

  CalibrationResult result;
  for (std::size_t i = 0; i < config.targets.size(); ++i) {
    std::optional<double> start;
    if (!config.start_levels.empty()) {
      start = config.start_levels[i];
    } else if (!result.entries.empty()) {
      start = result.entries.back().level;  // warm start from the neighbor
    }
    try {
      result.entries.push_back(servoloop(device, config, config.targets[i], start));
    } catch (const calibration_error& e) {
      result.failures.push_back("k=" + std::to_string(config.targets[i]) + ": " + e.what());
    }
  }

  std::vector<double> ks, levels;
  for (const auto& e : result.entries) {
    if (!e.converged) continue;
    ks.push_back(static_cast<double>(e.k));
    levels.push_back(e.level);
  }
  if (ks.size() >= 2) {
    result.line = fit_line(ks, levels);
    double worst = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      worst = std::max(worst,
                       std::fabs(levels[i] - (result.line->slope * ks[i] + result.line->intercept)));
    }
    result.max_line_deviation = worst;
  }
  return result;
}

void write_calibration_csv(const CalibrationResult& result, const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-calibration v1\n";
  if (result.line) {
    out << "# line: gain=" << format_double(result.line->slope)
        << " offset=" << format_double(result.line->intercept)
        << " max_deviation=" << format_double(result.max_line_deviation) << "\n";
  }
  for (const auto& f : result.failures) out << "# failed " << f << "\n";
  out << "k,T_hat,iterations,final_fraction,converged\n";
  for (const auto& e : result.entries) {
    out << e.k << ',' << format_double(e.level) << ',' << e.iterations << ','
        << format_double(e.final_fraction) << ',' << (e.converged ? "true" : "false") << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

QuantizerModel quantizer_from_calibration(const CalibrationResult& result) {
  std::vector<double> levels;
  for (const auto& e : result.entries) {
    if (e.converged) levels.push_back(e.level);
  }
  if (levels.size() < 3) {
    throw calibration_error("need at least 3 converged transition levels to form a quantizer");
  }
  return QuantizerModel(std::move(levels));
}

}  // namespace quantnoise
