#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quantnoise/config.hpp"
#include "quantnoise/estimator.hpp"
#include "quantnoise/gaussian_fit.hpp"
#include "quantnoise/servoloop.hpp"
#include "quantnoise/signal.hpp"
#include "quantnoise/sine_fit.hpp"

namespace quantnoise {

enum class ScenarioKind { fig2a, fig2b, fig2c, experiment, custom };
enum class EstimationMode { known_s, sinefit_s };

ScenarioKind scenario_kind_from_name(const std::string& name);
std::string scenario_kind_name(ScenarioKind kind);

// One end-to-end run: simulate an acquisition, build the difference
// partition, sample the noise CDF, optionally bound the abscissa bias, fit a
// Gaussian CDF and derive the PDF.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::custom;

  // quantizer under test
  int bits = 8;
  double full_scale_low = -1;
  double full_scale_high = 1;
  double inl_bound = 0;  // 0 = ideal transitions

  Stimulus stimulus;  // sine or swept DC (ignored by the experiment pipeline)
  NoiseFamily noise_family = NoiseFamily::gaussian;
  double noise_location = 0;
  double noise_scale = 0;
  int records = 1;

  double tolerance = 0;  // partition grouping tolerance; <= 0 means step()*1e-9
  EstimationMode mode = EstimationMode::known_s;
  // Abscissa-bias bound: simulation can measure it against ground truth, a
  // blind caller must supply it.
  bool delta_eps_from_truth = true;
  std::optional<double> delta_eps_user;
  FitWeighting weighting = FitWeighting::none;

  std::uint64_t seed = 1;
  int jobs = 1;

  // swept-DC acquisition window (experiment pipeline)
  double sweep_halfwidth_steps = 4;  // +- this many quantization steps
  int sweep_levels = 160;
  int calibration_halfwidth = 5;  // transitions with nominal |T_k| <= this * step
  ServoloopConfig servo;          // targets/start levels filled per scenario
};

// The exact parameter sets behind the named scenarios.
ScenarioConfig named_scenario(ScenarioKind kind, std::uint64_t seed);

// The device under test (ideal or perturbed per config) and the acquisition
// plan, exactly as run_scenario would build them.
QuantizerModel scenario_quantizer(const ScenarioConfig& config);
StimulusPlan scenario_plan(const ScenarioConfig& config);

// Reads a scenario from key=value configuration; named scenarios take only
// seed/jobs/out overrides, custom requires the full parameter set.
ScenarioConfig scenario_from_config(const KeyValueConfig& kv);

struct ScenarioResult {
  CdfEstimate estimate;
  GaussianCdfFit fit;
  std::optional<ErrorBounds> bounds;
  std::optional<SineFitResult> sinefit;
  std::optional<CalibrationResult> calibration;
  double delta_eps = 0;
  std::vector<std::pair<double, double>> pdf;  // analytic, from the fitted model
  std::vector<double> true_sequence;           // ground-truth s_n
  std::vector<double> estimated_sequence;      // abscissa source actually used
  std::vector<double> true_transitions;        // ground-truth device levels
  double elapsed_seconds = 0;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

// Writes estimate.csv, bounds.csv (when present), pdf.csv, summary.txt and,
// when applicable, sinefit.txt / calibration.csv into `directory`. Partial
// artifacts are removed if any write fails. Artifacts are byte-deterministic
// in (config, seed) and independent of the job count.
void write_artifacts(const ScenarioResult& result, const ScenarioConfig& config,
                     const std::string& directory);

// Repeated runs with per-replication derived seeds. Per-point statistics are
// reported for known-sequence estimation, where the partition abscissas are
// replication-invariant; fit parameters are reported always.
struct ReplicationStats {
  int replications = 0;
  int records = 0;
  std::vector<double> x;
  std::vector<int> multiplicity;
  std::vector<double> mean_f;
  std::vector<double> var_f;  // sample variance across replications
  std::vector<double> mu_hat;
  std::vector<double> sigma_hat;
  std::vector<double> delta_eps;
};

ReplicationStats run_replications(const ScenarioConfig& config, int replications);

void write_replication_csv(const ReplicationStats& stats, const std::string& directory);

}  // namespace quantnoise
