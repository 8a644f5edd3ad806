// quantnoise: estimate the CDF/PDF of additive noise at a quantizer input
// from output codes plus known or calibrated transition levels.
//
// Exit codes: 0 success, 2 configuration error, 3 pipeline stage error,
// 4 non-convergence (artifacts retained and flagged).

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quantnoise/config.hpp"
#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"
#include "quantnoise/estimator.hpp"
#include "quantnoise/gaussian_fit.hpp"
#include "quantnoise/partition.hpp"
#include "quantnoise/quantizer.hpp"
#include "quantnoise/records.hpp"
#include "quantnoise/scenario.hpp"
#include "quantnoise/servoloop.hpp"
#include "quantnoise/signal.hpp"
#include "quantnoise/sine_fit.hpp"

namespace fs = std::filesystem;
using namespace quantnoise;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitUnconverged = 4;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int jobs = 1;
};

KeyValueConfig load_config(const GlobalArgs& g, const CLI::App& app) {
  KeyValueConfig kv;
  if (!g.config_path.empty()) kv = KeyValueConfig::from_file(g.config_path);
  // explicit flags override the file; otherwise file values win
  if (app.count("--seed") > 0 || !kv.has("seed")) kv.set("seed", std::to_string(g.seed));
  if (app.count("--jobs") > 0 || !kv.has("jobs")) kv.set("jobs", std::to_string(g.jobs));
  return kv;
}

std::string out_path(const GlobalArgs& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

std::vector<double> read_sequence_file(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> seq;
  std::string line;
  while (std::getline(in, line)) {
    auto s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    seq.push_back(parse_double(s));
  }
  if (seq.empty()) throw io_error("sequence file has no values: " + path);
  return seq;
}

void write_sequence_file(const std::vector<double>& seq, const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-sequence v1 N=" << seq.size() << "\n";
  for (double v : seq) out << format_double(v) << "\n";
  if (!out) throw io_error("write failed: " + path);
}

void warn_stimulus(const Stimulus& stimulus) {
  if (auto w = stimulus_warning(stimulus)) std::cerr << "warning: " << *w << "\n";
}

std::vector<int> parse_targets(const std::string& text) {
  std::vector<int> targets;
  for (auto part : split(text, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const std::size_t colon = part.find(':');
    if (colon == std::string_view::npos) {
      targets.push_back(static_cast<int>(parse_int(part)));
    } else {
      const int lo = static_cast<int>(parse_int(part.substr(0, colon)));
      const int hi = static_cast<int>(parse_int(part.substr(colon + 1)));
      if (hi < lo) throw config_error("target range is reversed: " + std::string(part));
      for (int k = lo; k <= hi; ++k) targets.push_back(k);
    }
  }
  if (targets.empty()) throw config_error("no servoloop targets given");
  return targets;
}

int print_scenario_summary(const ScenarioResult& result) {
  std::cout << "points=" << result.estimate.points.size() << "\n";
  std::cout << "mu_hat=" << format_double(result.fit.mu) << "\n";
  std::cout << "sigma_hat=" << format_double(result.fit.sigma) << "\n";
  std::cout << "max_residual=" << format_double(result.fit.max_residual) << "\n";
  if (result.bounds) std::cout << "delta_eps=" << format_double(result.delta_eps) << "\n";
  std::cout << "fit_converged=" << (result.fit.converged ? "true" : "false") << "\n";
  std::cerr << "elapsed: " << result.elapsed_seconds << " s\n";
  return result.fit.converged ? kExitOk : kExitUnconverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noise CDF/PDF estimation from quantized records"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_path, "key=value configuration file");
  app.add_option("--out-dir", g.out_dir, "artifact directory")->capture_default_str();
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads for record synthesis")->capture_default_str();

  int exit_code = kExitOk;
  auto run = [&](auto&& body) {
    try {
      exit_code = body();
    } catch (const config_error& e) {
      std::cerr << "config error: " << e.what() << "\n";
      exit_code = kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = kExitPipeline;
    }
  };

  // ---- gen-quantizer ----
  auto* gen = app.add_subcommand("gen-quantizer", "write a transitions file");
  struct {
    int bits = 8;
    double low = -1, high = 1, inl = 0;
    std::string output;
  } gq;
  gen->add_option("--bits", gq.bits, "resolution in bits")->capture_default_str();
  gen->add_option("--low", gq.low, "full-scale low (V)")->capture_default_str();
  gen->add_option("--high", gq.high, "full-scale high (V)")->capture_default_str();
  gen->add_option("--inl", gq.inl, "perturb transitions by at most this bound (V)");
  gen->add_option("-o,--output", gq.output, "output file (default <out-dir>/transitions.txt)");
  gen->callback([&] {
    run([&] {
      QuantizerModel q = make_uniform(gq.bits, gq.low, gq.high);
      if (gq.inl > 0) q = make_perturbed(q, gq.inl, g.seed);
      const std::string path = gq.output.empty() ? out_path(g, "transitions.txt") : gq.output;
      save_transitions(q, path);
      std::cout << "wrote " << path << " (K=" << q.num_codes()
                << ", step=" << format_double(q.step()) << ")\n";
      return kExitOk;
    });
  });

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "synthesize and quantize records");
  struct {
    bool emit_samples = false;
  } sa;
  sim->add_flag("--emit-samples", sa.emit_samples, "also write the voltage matrix (samples.csv)");
  sim->callback([&] {
    run([&] {
      const ScenarioConfig cfg = scenario_from_config(load_config(g, app));
      if (cfg.kind == ScenarioKind::experiment) {
        throw config_error("simulate does not drive the experiment pipeline; use `mc experiment`");
      }
      warn_stimulus(cfg.stimulus);
      const QuantizerModel q = scenario_quantizer(cfg);
      const StimulusPlan plan = scenario_plan(cfg);
      const CodeRecords records = simulate_records(plan, q, cfg.jobs);
      write_records_csv(records, out_path(g, "records.csv"));
      save_transitions(q, out_path(g, "transitions.txt"));
      if (sa.emit_samples) {
        write_samples_csv(synthesize(plan, cfg.jobs), out_path(g, "samples.csv"));
      }
      std::cout << "wrote " << out_path(g, "records.csv") << " (N=" << records.samples()
                << ", R=" << records.records() << ")\n";
      return kExitOk;
    });
  });

  // ---- estimate ----
  auto* est = app.add_subcommand("estimate", "sample the noise CDF from records");
  struct {
    std::string records_path;
    std::string quantizer_path;
    std::string sequence_path;
    double tau = 0;
    std::optional<double> delta_eps;
    bool allow_mismatch = false;
    bool emit_partition = false;
    bool members = false;
  } ea;
  est->add_option("--records", ea.records_path, "records.csv")->required();
  est->add_option("--quantizer", ea.quantizer_path, "transitions file")->required();
  est->add_option("--sequence", ea.sequence_path,
                  "stimulus sequence file (else rendered from config)");
  est->add_option("--tau", ea.tau, "grouping tolerance (V); 0 = step*1e-9");
  est->add_option("--delta-eps", ea.delta_eps,
                  "abscissa bias bound (V); also writes bounds.csv");
  est->add_flag("--allow-stimulus-mismatch", ea.allow_mismatch,
                "accept a sequence that differs from the one the records were acquired with "
                "(estimated-sequence workflows)");
  est->add_flag("--emit-partition", ea.emit_partition, "also write partition.csv");
  est->add_flag("--members", ea.members, "with --emit-partition, dump (n,k) members too");
  est->callback([&] {
    run([&] {
      const CodeRecords records = read_records_csv(ea.records_path);
      const QuantizerModel q = load_transitions(ea.quantizer_path);
      std::vector<double> seq;
      if (!ea.sequence_path.empty()) {
        seq = read_sequence_file(ea.sequence_path);
      } else {
        const ScenarioConfig cfg = scenario_from_config(load_config(g, app));
        seq = render_sequence(cfg.stimulus);
      }
      const double tau = ea.tau > 0 ? ea.tau : default_tolerance(q);
      const PartitionTable part = build_partition(q, seq, tau);
      if (ea.emit_partition) {
        write_partition_csv(part, out_path(g, "partition.csv"),
                            ea.members ? out_path(g, "partition_members.csv") : "");
      }
      EstimateOptions opts;
      opts.require_matching_stimulus = !ea.allow_mismatch;
      CdfEstimate estimate = estimate_cdf(records, part, opts);
      if (ea.delta_eps) {
        write_bounds_csv(bound_curves(estimate, *ea.delta_eps), out_path(g, "bounds.csv"));
      }
      write_estimate_csv(estimate, out_path(g, "estimate.csv"));
      std::cout << "wrote " << out_path(g, "estimate.csv") << " (" << estimate.points.size()
                << " points)\n";
      return kExitOk;
    });
  });

  // ---- sinefit ----
  auto* sf = app.add_subcommand("sinefit", "estimate the sine stimulus from records");
  struct {
    std::string records_path;
    std::string quantizer_path;
    int periods = 1;
    bool thetas = false;
    bool emit_sequence = false;
  } fa;
  sf->add_option("--records", fa.records_path, "records.csv")->required();
  sf->add_option("--quantizer", fa.quantizer_path, "transitions file")->required();
  sf->add_option("--periods", fa.periods, "observed whole periods")->required();
  sf->add_flag("--thetas", fa.thetas, "write per-record parameters (sinefit_thetas.csv)");
  sf->add_flag("--emit-sequence", fa.emit_sequence,
               "write the reconstructed sequence (sequence.txt) for `estimate --sequence`");
  sf->callback([&] {
    run([&] {
      const CodeRecords records = read_records_csv(fa.records_path);
      const QuantizerModel q = load_transitions(fa.quantizer_path);
      const SineFitResult fit = fit_records(records, q, fa.periods);
      write_sine_fit_summary(fit, out_path(g, "sinefit.txt"));
      if (fa.thetas) write_sine_fit_thetas_csv(fit, out_path(g, "sinefit_thetas.csv"));
      if (fa.emit_sequence) write_sequence_file(fit.reconstructed, out_path(g, "sequence.txt"));
      std::cout << "A_hat=" << format_double(fit.amplitude)
                << " phi0_hat=" << format_double(fit.initial_phase)
                << " offset_hat=" << format_double(fit.offset) << "\n";
      return kExitOk;
    });
  });

  // ---- fit-gaussian ----
  auto* fg = app.add_subcommand("fit-gaussian", "fit a Gaussian CDF to an estimate file");
  struct {
    std::string estimate_path;
    std::string weights = "none";
    std::string output;
  } ga;
  fg->add_option("--estimate", ga.estimate_path, "estimate.csv")->required();
  fg->add_option("--weights", ga.weights, "none | inverse-variance")->capture_default_str();
  fg->add_option("-o,--output", ga.output, "rewritten estimate file (default: input path)");
  fg->callback([&] {
    run([&] {
      CdfEstimate estimate = read_estimate_csv(ga.estimate_path);
      GaussianFitOptions opts;
      if (ga.weights == "none") {
        opts.weighting = FitWeighting::none;
      } else if (ga.weights == "inverse-variance") {
        opts.weighting = FitWeighting::inverse_variance;
      } else {
        throw config_error("weights must be none or inverse-variance");
      }
      const GaussianCdfFit fit = fit_gaussian_cdf(estimate, opts);
      attach_fit(estimate, fit);
      const std::string path = ga.output.empty() ? ga.estimate_path : ga.output;
      write_estimate_csv(estimate, path);
      std::cout << "mu_hat=" << format_double(fit.mu)
                << " sigma_hat=" << format_double(fit.sigma)
                << " max_residual=" << format_double(fit.max_residual)
                << " converged=" << (fit.converged ? "true" : "false") << "\n";
      return fit.converged ? kExitOk : kExitUnconverged;
    });
  });

  // ---- servoloop ----
  auto* sl = app.add_subcommand("servoloop", "calibrate transition levels of a simulated device");
  struct {
    std::string quantizer_path;
    int bits = 8;
    double low = -1, high = 1, inl = 0;
    std::string noise_family = "gaussian";
    double noise_mu = 0;
    double noise_scale = 0;
    std::string targets;
    long long samples = 10000;
    double step = 0;
    double decay = 0.5;
    double tolerance = 0;
    int max_iterations = 200;
    bool emit_transitions = false;
  } va;
  sl->add_option("--quantizer", va.quantizer_path, "device transitions file (else --bits/--low/--high)");
  sl->add_option("--bits", va.bits, "device resolution")->capture_default_str();
  sl->add_option("--low", va.low, "device full-scale low (V)")->capture_default_str();
  sl->add_option("--high", va.high, "device full-scale high (V)")->capture_default_str();
  sl->add_option("--inl", va.inl, "perturb the simulated device transitions (V)");
  sl->add_option("--noise-family", va.noise_family, "gaussian | uniform | laplace")
      ->capture_default_str();
  sl->add_option("--noise-mu", va.noise_mu, "device input noise location (V)");
  sl->add_option("--noise-scale", va.noise_scale, "device input noise scale (V)")->required();
  sl->add_option("--targets", va.targets, "transition indices, e.g. 100,128 or 2043:2053")
      ->required();
  sl->add_option("--samples", va.samples, "samples per step (M)")->capture_default_str();
  sl->add_option("--step", va.step, "initial step (V); 0 = device step / 2");
  sl->add_option("--decay", va.decay, "step decay per reversal")->capture_default_str();
  sl->add_option("--tolerance", va.tolerance, "stop when the step falls below this (V)");
  sl->add_option("--max-iterations", va.max_iterations, "per-target cap")->capture_default_str();
  sl->add_flag("--emit-transitions", va.emit_transitions,
               "also write the calibrated levels as a transitions file");
  sl->callback([&] {
    run([&] {
      QuantizerModel device_q = va.quantizer_path.empty()
                                    ? make_uniform(va.bits, va.low, va.high)
                                    : load_transitions(va.quantizer_path);
      if (va.inl > 0) device_q = make_perturbed(device_q, va.inl, derive_seed(g.seed, 0xB2));
      NoiseModel noise;
      noise.family = noise_family_from_name(va.noise_family);
      noise.location = va.noise_mu;
      noise.scale = va.noise_scale;
      noise.seed = derive_seed(g.seed, 0xC3);
      SimulatedDcDevice device(device_q, noise, noise.seed);

      ServoloopConfig cfg;
      cfg.targets = parse_targets(va.targets);
      cfg.samples_per_step = va.samples;
      cfg.initial_step = va.step > 0 ? va.step : 0.5 * device_q.step();
      cfg.decay = va.decay;
      cfg.tolerance = va.tolerance > 0 ? va.tolerance : 1e-3 * device_q.step();
      cfg.max_iterations = va.max_iterations;
      for (int k : cfg.targets) cfg.start_levels.push_back(device_q.transition(k));

      const CalibrationResult result = calibrate_all(device, cfg);
      write_calibration_csv(result, out_path(g, "calibration.csv"));
      if (va.emit_transitions) {
        save_transitions(quantizer_from_calibration(result),
                         out_path(g, "calibrated_transitions.txt"));
      }
      bool all_converged = result.failures.empty();
      for (const auto& e : result.entries) all_converged = all_converged && e.converged;
      std::cout << "calibrated " << result.entries.size() << "/" << cfg.targets.size()
                << " transitions";
      if (result.line) {
        std::cout << ", max line deviation " << format_double(result.max_line_deviation);
      }
      std::cout << "\n";
      return all_converged ? kExitOk : kExitUnconverged;
    });
  });

  // ---- mc ----
  auto* mc = app.add_subcommand("mc", "run a full named or custom scenario");
  struct {
    std::string name = "custom";
  } ma;
  mc->add_option("scenario", ma.name, "fig2a | fig2b | fig2c | experiment | custom")
      ->capture_default_str();
  mc->callback([&] {
    run([&] {
      KeyValueConfig kv = load_config(g, app);
      if (mc->count("scenario") > 0 || !kv.has("scenario")) kv.set("scenario", ma.name);
      const ScenarioConfig cfg = scenario_from_config(kv);
      if (cfg.kind != ScenarioKind::experiment) warn_stimulus(cfg.stimulus);
      const ScenarioResult result = run_scenario(cfg);
      write_artifacts(result, cfg, g.out_dir);
      std::cerr << "artifacts in " << g.out_dir << "\n";
      return print_scenario_summary(result);
    });
  });

  // ---- replicate ----
  auto* rep = app.add_subcommand("replicate", "repeat a scenario with derived seeds");
  struct {
    int m = 2;
  } ra;
  rep->add_option("--m", ra.m, "number of replications")->required();
  rep->callback([&] {
    run([&] {
      KeyValueConfig kv = load_config(g, app);
      const ScenarioConfig cfg = scenario_from_config(kv);
      const ReplicationStats stats = run_replications(cfg, ra.m);
      write_replication_csv(stats, g.out_dir);
      double mu_mean = 0, sigma_mean = 0;
      for (double v : stats.mu_hat) mu_mean += v;
      for (double v : stats.sigma_hat) sigma_mean += v;
      mu_mean /= stats.mu_hat.size();
      sigma_mean /= stats.sigma_hat.size();
      std::cout << "replications=" << stats.replications << "\n";
      std::cout << "mean_mu_hat=" << format_double(mu_mean) << "\n";
      std::cout << "mean_sigma_hat=" << format_double(sigma_mean) << "\n";
      std::cerr << "artifacts in " << g.out_dir << "\n";
      return kExitOk;
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return exit_code;
}
