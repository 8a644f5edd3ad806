#include "quantnoise/signal.hpp"

#include <cmath>
#include <numeric>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"
#include "quantnoise/math.hpp"
#include "quantnoise/parallel.hpp"

namespace quantnoise {

NoiseFamily noise_family_from_name(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "uniform") return NoiseFamily::uniform;
  if (name == "laplace") return NoiseFamily::laplace;
  throw config_error("unknown noise family: " + name);
}

std::string noise_family_name(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::uniform: return "uniform";
    case NoiseFamily::laplace: return "laplace";
  }
  return "?";
}

int stimulus_length(const Stimulus& s) {
  if (const auto* sine = std::get_if<SineStimulus>(&s)) return sine->samples;
  return static_cast<int>(std::get<SweptDcStimulus>(s).levels.size());
}

void validate_stimulus(const Stimulus& s) {
  if (const auto* sine = std::get_if<SineStimulus>(&s)) {
    if (sine->samples < 3) throw config_error("sine stimulus needs at least 3 samples");
    if (sine->periods < 1) throw config_error("sine stimulus needs at least 1 period");
    if (!std::isfinite(sine->amplitude) || !std::isfinite(sine->initial_phase) ||
        !std::isfinite(sine->offset)) {
      throw config_error("sine stimulus parameters must be finite");
    }
    return;
  }
  const auto& sweep = std::get<SweptDcStimulus>(s);
  if (sweep.levels.empty()) throw config_error("swept-DC stimulus needs at least one level");
  for (double v : sweep.levels) {
    if (!std::isfinite(v)) throw config_error("swept-DC levels must be finite");
  }
}

void validate_plan(const StimulusPlan& plan) {
  validate_stimulus(plan.stimulus);
  if (plan.records < 1) throw config_error("plan needs at least one record");
  if (!(plan.noise.scale > 0) || !std::isfinite(plan.noise.scale)) {
    throw config_error("noise scale must be positive");
  }
  if (!std::isfinite(plan.noise.location)) {
    throw config_error("noise location must be finite");
  }
}

std::optional<std::string> stimulus_warning(const Stimulus& s) {
  if (const auto* sine = std::get_if<SineStimulus>(&s)) {
    if (sine->samples >= 3 && sine->periods >= 1 &&
        std::gcd(sine->periods, sine->samples) != 1) {
      return "gcd(periods, samples) != 1: the sine revisits phases, fewer distinct "
             "sampling points result";
    }
  }
  return std::nullopt;
}

std::vector<double> render_sequence(const Stimulus& s) {
  validate_stimulus(s);
  if (const auto* sine = std::get_if<SineStimulus>(&s)) {
    std::vector<double> seq(static_cast<std::size_t>(sine->samples));
    const double w = 2.0 * kPi * sine->periods / sine->samples;
    for (int n = 0; n < sine->samples; ++n) {
      seq[static_cast<std::size_t>(n)] =
          sine->amplitude * std::sin(w * n + sine->initial_phase) + sine->offset;
    }
    return seq;
  }
  return std::get<SweptDcStimulus>(s).levels;
}

double sample_noise(const NoiseModel& model, RandomStream& stream) {
  switch (model.family) {
    case NoiseFamily::gaussian:
      return model.location + model.scale * stream.gaussian();
    case NoiseFamily::uniform:
      return model.location + model.scale * (2.0 * stream.uniform01() - 1.0);
    case NoiseFamily::laplace: {
      const double u = stream.uniform01() - 0.5;  // in (-0.5, 0.5)
      const double mag = -std::log1p(-2.0 * std::fabs(u));
      return model.location + model.scale * (u < 0 ? -mag : mag);
    }
  }
  return model.location;
}

double noise_cdf(const NoiseModel& model, double x) {
  const double z = x - model.location;
  switch (model.family) {
    case NoiseFamily::gaussian:
      return normal_cdf(z / model.scale);
    case NoiseFamily::uniform: {
      if (z <= -model.scale) return 0.0;
      if (z >= model.scale) return 1.0;
      return (z + model.scale) / (2.0 * model.scale);
    }
    case NoiseFamily::laplace:
      return z < 0 ? 0.5 * std::exp(z / model.scale)
                   : 1.0 - 0.5 * std::exp(-z / model.scale);
  }
  return 0.0;
}

SampleMatrix synthesize(const StimulusPlan& plan, int jobs) {
  validate_plan(plan);
  const std::vector<double> seq = render_sequence(plan.stimulus);
  const int n_samples = static_cast<int>(seq.size());
  SampleMatrix x(n_samples, plan.records);
  parallel_chunks(plan.records, jobs, [&](int r_begin, int r_end) {
    for (int r = r_begin; r < r_end; ++r) {
      RandomStream stream(derive_seed(plan.noise.seed, static_cast<std::uint64_t>(r)));
      for (int n = 0; n < n_samples; ++n) {
        x.at(n, r) = seq[static_cast<std::size_t>(n)] + sample_noise(plan.noise, stream);
      }
    }
  });
  return x;
}

void write_samples_csv(const SampleMatrix& x, const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-samples v1 N=" << x.samples() << " R=" << x.records() << "\n";
  out << "n,r,x\n";
  for (int n = 0; n < x.samples(); ++n) {
    for (int r = 0; r < x.records(); ++r) {
      out << n << ',' << r << ',' << format_double(x.at(n, r)) << "\n";
    }
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace quantnoise
