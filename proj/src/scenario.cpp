#include "quantnoise/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <string>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"
#include "quantnoise/math.hpp"

namespace quantnoise {

namespace {

constexpr std::uint64_t kSeedNoise = 0xA1;
constexpr std::uint64_t kSeedQuantizer = 0xB2;
constexpr std::uint64_t kSeedCalibration = 0xC3;
constexpr std::uint64_t kSeedReplication = 0xD4;

template <typename F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
  auto tag = [&](const char* what) { return std::string("stage ") + name + ": " + what; };
  try {
    return f();
  } catch (const config_error& e) {
    throw config_error(tag(e.what()));
  } catch (const io_error& e) {
    throw io_error(tag(e.what()));
  } catch (const partition_error& e) {
    throw partition_error(tag(e.what()));
  } catch (const estimation_error& e) {
    throw estimation_error(tag(e.what()));
  } catch (const fit_error& e) {
    throw fit_error(tag(e.what()));
  } catch (const calibration_error& e) {
    throw calibration_error(tag(e.what()));
  } catch (const std::exception& e) {
    throw pipeline_error(tag(e.what()));
  }
}

ScenarioConfig sine_scenario(double sigma_steps, EstimationMode mode, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.bits = 8;
  cfg.full_scale_low = -1;
  cfg.full_scale_high = 1;
  const double step = 2.0 / 256.0;
  SineStimulus sine;
  sine.amplitude = 5.37 * step;
  sine.periods = 35;
  sine.samples = 151;
  sine.initial_phase = 11.0 * kPi / 2.0;
  sine.offset = 0;
  cfg.stimulus = sine;
  cfg.noise_family = NoiseFamily::gaussian;
  cfg.noise_location = 0;
  cfg.noise_scale = sigma_steps * step;
  cfg.records = 1000;
  cfg.mode = mode;
  cfg.seed = seed;
  return cfg;
}

double quantizer_nominal_step(const ScenarioConfig& cfg) {
  return (cfg.full_scale_high - cfg.full_scale_low) / static_cast<double>(1 << cfg.bits);
}

NoiseModel scenario_noise(const ScenarioConfig& cfg) {
  NoiseModel noise;
  noise.family = cfg.noise_family;
  noise.location = cfg.noise_location;
  noise.scale = cfg.noise_scale;
  noise.seed = derive_seed(cfg.seed, kSeedNoise);
  return noise;
}

ScenarioResult run_sine_or_sweep(const ScenarioConfig& cfg) {
  ScenarioResult result;
  const QuantizerModel q = run_stage("quantizer", [&] { return scenario_quantizer(cfg); });
  result.true_transitions = q.transitions();

  StimulusPlan plan{cfg.stimulus, scenario_noise(cfg), cfg.records};
  result.true_sequence = run_stage("stimulus", [&] { return render_sequence(cfg.stimulus); });
  const CodeRecords records =
      run_stage("simulate", [&] { return simulate_records(plan, q, cfg.jobs); });

  result.estimated_sequence = result.true_sequence;
  if (cfg.mode == EstimationMode::sinefit_s) {
    const auto* sine = std::get_if<SineStimulus>(&cfg.stimulus);
    if (!sine) throw config_error("sinefit estimation needs a sine stimulus");
    result.sinefit =
        run_stage("sinefit", [&] { return fit_records(records, q, sine->periods); });
    result.estimated_sequence = result.sinefit->reconstructed;
  }

  double tolerance = cfg.tolerance > 0 ? cfg.tolerance : default_tolerance(q);
  const PartitionTable part = run_stage(
      "partition", [&] { return build_partition(q, result.estimated_sequence, tolerance); });

  EstimateOptions opts;
  opts.require_matching_stimulus = (cfg.mode == EstimationMode::known_s);
  result.estimate = run_stage("estimate", [&] { return estimate_cdf(records, part, opts); });

  if (cfg.mode == EstimationMode::sinefit_s || cfg.delta_eps_user) {
    double delta = 0;
    if (cfg.delta_eps_user) {
      delta = *cfg.delta_eps_user;
    } else if (cfg.delta_eps_from_truth) {
      for (std::size_t n = 0; n < result.true_sequence.size(); ++n) {
        delta = std::max(delta,
                         std::fabs(result.estimated_sequence[n] - result.true_sequence[n]));
      }
    }
    result.delta_eps = delta;
    result.bounds = run_stage("bounds", [&] { return bound_curves(result.estimate, delta); });
  }

  GaussianFitOptions fit_opts;
  fit_opts.weighting = cfg.weighting;
  result.fit = run_stage("fit", [&] { return fit_gaussian_cdf(result.estimate, fit_opts); });
  attach_fit(result.estimate, result.fit);
  result.pdf = run_stage(
      "pdf", [&] { return pdf_from_cdf(result.estimate, PdfMethod::analytic_from_fit); });
  return result;
}

ScenarioResult run_experiment(const ScenarioConfig& cfg) {
  ScenarioResult result;
  const QuantizerModel truth = run_stage("quantizer", [&] { return scenario_quantizer(cfg); });
  result.true_transitions = truth.transitions();
  const double step = quantizer_nominal_step(cfg);
  const NoiseModel noise = scenario_noise(cfg);

  // Calibrate the transitions around mid scale with the servoloop.
  ServoloopConfig servo = cfg.servo;
  if (servo.initial_step <= 0) servo.initial_step = 0.5 * step;
  if (servo.tolerance <= 0) servo.tolerance = 1e-3 * step;
  servo.targets.clear();
  servo.start_levels.clear();
  for (int k = 1; k <= truth.num_codes() - 1; ++k) {
    const double nominal = cfg.full_scale_low + k * step;
    if (std::fabs(nominal) <= cfg.calibration_halfwidth * step * (1.0 + 1e-12)) {
      servo.targets.push_back(k);
      servo.start_levels.push_back(nominal);
    }
  }
  if (servo.targets.size() < 3) {
    throw calibration_error("calibration window selects fewer than 3 transitions");
  }

  // The servoloop settles on the level where codes straddle half/half, i.e.
  // the transition minus the dither median. The calibration dither is
  // therefore modeled zero-median; the noise offset belongs to the sweep
  // acquisition path, where it stays measurable.
  NoiseModel device_noise = noise;
  device_noise.location = 0;
  device_noise.seed = derive_seed(cfg.seed, kSeedCalibration);
  SimulatedDcDevice device(truth, device_noise, device_noise.seed);
  CalibrationResult cal =
      run_stage("servoloop", [&] { return calibrate_all(device, servo); });
  if (!cal.failures.empty() || cal.entries.size() != servo.targets.size()) {
    throw calibration_error("servoloop calibration failed for some transitions");
  }
  for (const auto& e : cal.entries) {
    if (!e.converged) throw calibration_error("servoloop did not converge for all transitions");
  }

  const QuantizerModel window =
      run_stage("window", [&] { return quantizer_from_calibration(cal); });
  result.calibration = std::move(cal);
  const int k_first = servo.targets.front();

  // Swept-DC acquisition across the calibrated window.
  SweptDcStimulus sweep;
  const double lo = -cfg.sweep_halfwidth_steps * step;
  const double hi = cfg.sweep_halfwidth_steps * step;
  if (cfg.sweep_levels < 2) throw config_error("sweep needs at least 2 levels");
  sweep.levels.resize(static_cast<std::size_t>(cfg.sweep_levels));
  for (int i = 0; i < cfg.sweep_levels; ++i) {
    sweep.levels[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * i / static_cast<double>(cfg.sweep_levels - 1);
  }
  result.true_sequence = sweep.levels;
  result.estimated_sequence = sweep.levels;  // levels are measured exactly here

  StimulusPlan plan{Stimulus{sweep}, noise, cfg.records};
  CodeRecords full = run_stage("simulate", [&] { return simulate_records(plan, truth, cfg.jobs); });

  // Reinterpret the full-range codes inside the calibrated window; indicator
  // comparisons against interior window transitions are unchanged by this.
  const int window_codes = window.num_codes();
  CodeRecords records = std::move(full).transform_codes(
      window_codes, window.fingerprint(), [k_first, window_codes](int code) {
        return std::clamp(code - k_first, 1, window_codes);
      });

  const double tolerance = cfg.tolerance > 0 ? cfg.tolerance : default_tolerance(window);
  const PartitionTable part =
      run_stage("partition", [&] { return build_partition(window, sweep.levels, tolerance); });
  result.estimate = run_stage("estimate", [&] { return estimate_cdf(records, part); });

  // Abscissa bias comes from the calibrated levels standing in for the true
  // ones; the levels themselves are exact in simulation.
  double delta = 0;
  if (cfg.delta_eps_user) {
    delta = *cfg.delta_eps_user;
  } else {
    for (int kw = 1; kw <= window.num_codes() - 1; ++kw) {
      delta = std::max(delta, std::fabs(window.transition(kw) - truth.transition(k_first + kw)));
    }
  }
  result.delta_eps = delta;
  result.bounds = run_stage("bounds", [&] { return bound_curves(result.estimate, delta); });

  GaussianFitOptions fit_opts;
  fit_opts.weighting = cfg.weighting;
  result.fit = run_stage("fit", [&] { return fit_gaussian_cdf(result.estimate, fit_opts); });
  attach_fit(result.estimate, result.fit);
  result.pdf = run_stage(
      "pdf", [&] { return pdf_from_cdf(result.estimate, PdfMethod::analytic_from_fit); });
  return result;
}

}  // namespace

QuantizerModel scenario_quantizer(const ScenarioConfig& cfg) {
  QuantizerModel q = make_uniform(cfg.bits, cfg.full_scale_low, cfg.full_scale_high);
  if (cfg.inl_bound > 0) {
    q = make_perturbed(q, cfg.inl_bound, derive_seed(cfg.seed, kSeedQuantizer));
  }
  return q;
}

StimulusPlan scenario_plan(const ScenarioConfig& cfg) {
  return StimulusPlan{cfg.stimulus, scenario_noise(cfg), cfg.records};
}

ScenarioKind scenario_kind_from_name(const std::string& name) {
  if (name == "fig2a") return ScenarioKind::fig2a;
  if (name == "fig2b") return ScenarioKind::fig2b;
  if (name == "fig2c") return ScenarioKind::fig2c;
  if (name == "experiment") return ScenarioKind::experiment;
  if (name == "custom") return ScenarioKind::custom;
  throw config_error("unknown scenario: " + name);
}

std::string scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::fig2a: return "fig2a";
    case ScenarioKind::fig2b: return "fig2b";
    case ScenarioKind::fig2c: return "fig2c";
    case ScenarioKind::experiment: return "experiment";
    case ScenarioKind::custom: return "custom";
  }
  return "?";
}

ScenarioConfig named_scenario(ScenarioKind kind, std::uint64_t seed) {
  switch (kind) {
    case ScenarioKind::fig2a: {
      ScenarioConfig cfg = sine_scenario(0.25, EstimationMode::known_s, seed);
      cfg.kind = kind;
      return cfg;
    }
    case ScenarioKind::fig2b: {
      ScenarioConfig cfg = sine_scenario(0.25, EstimationMode::sinefit_s, seed);
      cfg.kind = kind;
      return cfg;
    }
    case ScenarioKind::fig2c: {
      ScenarioConfig cfg = sine_scenario(0.18, EstimationMode::sinefit_s, seed);
      cfg.kind = kind;
      return cfg;
    }
    case ScenarioKind::experiment: {
      ScenarioConfig cfg;
      cfg.kind = kind;
      cfg.bits = 12;
      cfg.full_scale_low = -10;
      cfg.full_scale_high = 10;
      const double step = 20.0 / 4096.0;
      cfg.inl_bound = step / 4.0;
      cfg.noise_family = NoiseFamily::gaussian;
      cfg.noise_location = -0.0214 * step;
      cfg.noise_scale = 0.1867 * step;
      cfg.records = 250000;  // samples per DC level
      cfg.mode = EstimationMode::known_s;
      cfg.sweep_halfwidth_steps = 4;
      cfg.sweep_levels = 160;  // grid step ~2.46e-4 V across [-4, +4] steps
      cfg.calibration_halfwidth = 5;
      cfg.servo.samples_per_step = 10000;
      cfg.servo.decay = 0.5;
      cfg.servo.max_iterations = 200;
      cfg.seed = seed;
      return cfg;
    }
    case ScenarioKind::custom:
      break;
  }
  throw config_error("custom scenarios need explicit parameters");
}

ScenarioConfig scenario_from_config(const KeyValueConfig& kv) {
  const std::string name = kv.get_string("scenario", "custom");
  const ScenarioKind kind = scenario_kind_from_name(name);
  const std::uint64_t seed = kv.get_uint64("seed", 1);
  if (kind != ScenarioKind::custom) {
    ScenarioConfig cfg = named_scenario(kind, seed);
    cfg.jobs = static_cast<int>(kv.get_int("jobs", 1));
    if (kind == ScenarioKind::experiment) {
      cfg.records = static_cast<int>(kv.get_int("records", cfg.records));
      cfg.servo.samples_per_step = kv.get_int("servo.samples", cfg.servo.samples_per_step);
    }
    return cfg;
  }

  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::custom;
  cfg.seed = seed;
  cfg.jobs = static_cast<int>(kv.get_int("jobs", 1));
  cfg.bits = static_cast<int>(kv.get_int("quantizer.bits"));
  cfg.full_scale_low = kv.get_double("quantizer.low");
  cfg.full_scale_high = kv.get_double("quantizer.high");
  cfg.inl_bound = kv.get_double("quantizer.inl", 0.0);

  const std::string stim = kv.get_string("stimulus.kind");
  if (stim == "sine") {
    SineStimulus sine;
    sine.amplitude = kv.get_double("stimulus.amplitude");
    sine.periods = static_cast<int>(kv.get_int("stimulus.periods"));
    sine.samples = static_cast<int>(kv.get_int("stimulus.samples"));
    sine.initial_phase = kv.get_double("stimulus.phase", 0.0);
    sine.offset = kv.get_double("stimulus.offset", 0.0);
    cfg.stimulus = sine;
  } else if (stim == "sweep") {
    SweptDcStimulus sweep;
    const double lo = kv.get_double("sweep.start");
    const double hi = kv.get_double("sweep.stop");
    const int count = static_cast<int>(kv.get_int("sweep.count"));
    if (count < 1) throw config_error("sweep.count must be positive");
    sweep.levels.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      sweep.levels[static_cast<std::size_t>(i)] =
          count == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(count - 1);
    }
    cfg.stimulus = sweep;
  } else {
    throw config_error("stimulus.kind must be sine or sweep");
  }

  cfg.noise_family = noise_family_from_name(kv.get_string("noise.family", "gaussian"));
  cfg.noise_location = kv.get_double("noise.mu", 0.0);
  cfg.noise_scale = kv.get_double("noise.scale");
  cfg.records = static_cast<int>(kv.get_int("records"));
  cfg.tolerance = kv.get_double("tau", 0.0);

  const std::string mode = kv.get_string("estimation", "known-s");
  if (mode == "known-s") {
    cfg.mode = EstimationMode::known_s;
  } else if (mode == "sinefit-s") {
    cfg.mode = EstimationMode::sinefit_s;
  } else {
    throw config_error("estimation must be known-s or sinefit-s");
  }

  if (kv.has("delta.eps")) {
    const std::string de = kv.get_string("delta.eps");
    if (de == "truth") {
      cfg.delta_eps_from_truth = true;
    } else {
      cfg.delta_eps_user = parse_double(de);
    }
  }
  const std::string weights = kv.get_string("weights", "none");
  if (weights == "none") {
    cfg.weighting = FitWeighting::none;
  } else if (weights == "inverse-variance") {
    cfg.weighting = FitWeighting::inverse_variance;
  } else {
    throw config_error("weights must be none or inverse-variance");
  }
  return cfg;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  if (cfg.records < 1) throw config_error("scenario needs records >= 1");
  if (cfg.jobs < 1) throw config_error("scenario needs jobs >= 1");
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult result = (cfg.kind == ScenarioKind::experiment) ? run_experiment(cfg)
                                                                 : run_sine_or_sweep(cfg);
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_artifacts(const ScenarioResult& result, const ScenarioConfig& cfg,
                     const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  std::vector<std::string> written;
  auto track = [&](const std::string& name) {
    std::string path = (fs::path(directory) / name).string();
    written.push_back(path);
    return path;
  };
  try {
    write_estimate_csv(result.estimate, track("estimate.csv"));
    if (result.bounds) write_bounds_csv(*result.bounds, track("bounds.csv"));
    write_pdf_csv(result.pdf, PdfMethod::analytic_from_fit, track("pdf.csv"));
    if (result.sinefit) write_sine_fit_summary(*result.sinefit, track("sinefit.txt"));
    if (result.calibration) write_calibration_csv(*result.calibration, track("calibration.csv"));

    auto out = open_output(track("summary.txt"));
    out << "scenario=" << scenario_kind_name(cfg.kind) << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "estimation=" << (cfg.mode == EstimationMode::known_s ? "known-s" : "sinefit-s")
        << "\n";
    out << "records=" << result.estimate.records << "\n";
    out << "samples=" << result.true_sequence.size() << "\n";
    out << "tau=" << format_double(result.estimate.tolerance) << "\n";
    out << "points=" << result.estimate.points.size() << "\n";
    long long degenerate = 0;
    for (const auto& p : result.estimate.points) degenerate += p.degenerate ? 1 : 0;
    out << "degenerate_points=" << degenerate << "\n";
    out << "mu_hat=" << format_double(result.fit.mu) << "\n";
    out << "sigma_hat=" << format_double(result.fit.sigma) << "\n";
    out << "max_residual=" << format_double(result.fit.max_residual) << "\n";
    out << "rms_residual=" << format_double(result.fit.rms_residual) << "\n";
    out << "fit_converged=" << (result.fit.converged ? "true" : "false") << "\n";
    out << "fit_iterations=" << result.fit.iterations << "\n";
    if (result.bounds) out << "delta_eps=" << format_double(result.delta_eps) << "\n";
    if (result.sinefit) {
      out << "a_hat=" << format_double(result.sinefit->amplitude) << "\n";
      out << "phi0_hat=" << format_double(result.sinefit->initial_phase) << "\n";
      out << "offset_hat=" << format_double(result.sinefit->offset) << "\n";
    }
    if (result.calibration) {
      if (result.calibration->line) {
        out << "cal_gain=" << format_double(result.calibration->line->slope) << "\n";
        out << "cal_offset=" << format_double(result.calibration->line->intercept) << "\n";
        out << "cal_max_line_deviation=" << format_double(result.calibration->max_line_deviation)
            << "\n";
      }
      out << "cal_targets=" << result.calibration->entries.size() << "\n";
      out << "cal_failures=" << result.calibration->failures.size() << "\n";
    }
    if (!out) throw io_error("write failed: summary.txt");
  } catch (...) {
    for (const auto& path : written) {
      std::error_code ec;
      fs::remove(path, ec);
    }
    throw;
  }
}

ReplicationStats run_replications(const ScenarioConfig& cfg, int replications) {
  if (replications < 2) throw config_error("replications need M >= 2");
  ReplicationStats stats;
  stats.replications = replications;
  stats.records = cfg.records;
  const bool per_point = (cfg.mode == EstimationMode::known_s);
  std::vector<double> welford_mean, welford_m2;

  for (int m = 0; m < replications; ++m) {
    ScenarioConfig rep = cfg;
    rep.seed = derive_seed(derive_seed(cfg.seed, kSeedReplication), static_cast<std::uint64_t>(m));
    const ScenarioResult result = run_scenario(rep);
    stats.mu_hat.push_back(result.fit.mu);
    stats.sigma_hat.push_back(result.fit.sigma);
    stats.delta_eps.push_back(result.delta_eps);
    if (!per_point) continue;

    const auto& points = result.estimate.points;
    if (m == 0) {
      stats.x.reserve(points.size());
      stats.multiplicity.reserve(points.size());
      for (const auto& p : points) {
        stats.x.push_back(p.x);
        stats.multiplicity.push_back(p.multiplicity);
      }
      welford_mean.assign(points.size(), 0.0);
      welford_m2.assign(points.size(), 0.0);
    } else if (points.size() != stats.x.size()) {
      throw estimation_error("replications produced differing partitions for a known sequence");
    }
    for (std::size_t j = 0; j < points.size(); ++j) {
      const double delta = points[j].f_hat - welford_mean[j];
      welford_mean[j] += delta / static_cast<double>(m + 1);
      welford_m2[j] += delta * (points[j].f_hat - welford_mean[j]);
    }
  }
  if (per_point) {
    stats.mean_f = std::move(welford_mean);
    stats.var_f.resize(welford_m2.size());
    for (std::size_t j = 0; j < welford_m2.size(); ++j) {
      stats.var_f[j] = welford_m2[j] / static_cast<double>(replications - 1);
    }
  }
  return stats;
}

void write_replication_csv(const ReplicationStats& stats, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  if (!stats.x.empty()) {
    auto out = open_output((fs::path(directory) / "replication.csv").string());
    out << "# quantnoise-replication v1 M=" << stats.replications << " R=" << stats.records
        << "\n";
    out << "j,x_j,L_j,mean_F,var_F\n";
    for (std::size_t j = 0; j < stats.x.size(); ++j) {
      out << j << ',' << format_double(stats.x[j]) << ',' << stats.multiplicity[j] << ','
          << format_double(stats.mean_f[j]) << ',' << format_double(stats.var_f[j]) << "\n";
    }
    if (!out) throw io_error("write failed: replication.csv");
  }
  auto fits = open_output((fs::path(directory) / "fits.csv").string());
  fits << "# quantnoise-replication-fits v1 M=" << stats.replications << "\n";
  fits << "m,mu_hat,sigma_hat,delta_eps\n";
  for (std::size_t m = 0; m < stats.mu_hat.size(); ++m) {
    fits << m << ',' << format_double(stats.mu_hat[m]) << ',' << format_double(stats.sigma_hat[m])
         << ',' << format_double(stats.delta_eps[m]) << "\n";
  }
  if (!fits) throw io_error("write failed: fits.csv");
}

}  // namespace quantnoise
