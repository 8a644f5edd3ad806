#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "quantnoise/errors.hpp"
#include "quantnoise/math.hpp"
#include "quantnoise/scenario.hpp"

using namespace quantnoise;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("named scenarios embed the published parameters") {
  const ScenarioConfig a = named_scenario(ScenarioKind::fig2a, 1);
  CHECK(a.bits == 8);
  CHECK(a.full_scale_low == -1.0);
  CHECK(a.full_scale_high == 1.0);
  const double step = 2.0 / 256.0;
  const auto& sine = std::get<SineStimulus>(a.stimulus);
  CHECK(sine.amplitude == 5.37 * step);
  CHECK(sine.periods == 35);
  CHECK(sine.samples == 151);
  CHECK(sine.initial_phase == 11.0 * kPi / 2.0);
  CHECK(sine.offset == 0.0);
  CHECK(a.noise_scale == 0.25 * step);
  CHECK(a.noise_location == 0.0);
  CHECK(a.records == 1000);
  CHECK(a.mode == EstimationMode::known_s);

  const ScenarioConfig b = named_scenario(ScenarioKind::fig2b, 1);
  CHECK(b.mode == EstimationMode::sinefit_s);
  CHECK(b.noise_scale == 0.25 * step);
  const ScenarioConfig c = named_scenario(ScenarioKind::fig2c, 1);
  CHECK(c.noise_scale == 0.18 * step);

  const ScenarioConfig e = named_scenario(ScenarioKind::experiment, 1);
  CHECK(e.bits == 12);
  const double step12 = 20.0 / 4096.0;
  CHECK(step12 == doctest::Approx(0.0048828125).epsilon(0));
  CHECK(e.inl_bound == step12 / 4.0);
  CHECK(e.noise_location == -0.0214 * step12);
  CHECK(e.noise_scale == 0.1867 * step12);
  CHECK(e.records == 250000);
  CHECK(e.sweep_halfwidth_steps == 4.0);
  CHECK(e.servo.samples_per_step == 10000);
  // sweep grid step stays near the published 2.45e-4 V
  const double grid = 8.0 * step12 / (e.sweep_levels - 1);
  CHECK(grid == doctest::Approx(2.45e-4).epsilon(0.01));
}

TEST_CASE("scenario config parsing") {
  const auto kv = KeyValueConfig::from_text(R"(
# comment
scenario = custom
seed = 9
quantizer.bits = 6
quantizer.low = -0.5
quantizer.high = 0.5
stimulus.kind = sine
stimulus.amplitude = 0.05
stimulus.periods = 7
stimulus.samples = 31
stimulus.phase = 0.25
noise.family = laplace
noise.mu = 0.001
noise.scale = 0.004
records = 250
tau = 1e-12
estimation = known-s
)");
  const ScenarioConfig cfg = scenario_from_config(kv);
  CHECK(cfg.kind == ScenarioKind::custom);
  CHECK(cfg.seed == 9);
  CHECK(cfg.bits == 6);
  CHECK(std::get<SineStimulus>(cfg.stimulus).periods == 7);
  CHECK(cfg.noise_family == NoiseFamily::laplace);
  CHECK(cfg.records == 250);
  CHECK(cfg.tolerance == 1e-12);

  auto named = KeyValueConfig::from_text("scenario = fig2c\nseed = 4\n");
  CHECK(scenario_from_config(named).noise_scale == 0.18 * (2.0 / 256.0));
  CHECK(scenario_from_config(named).seed == 4);

  CHECK_THROWS_AS(scenario_from_config(KeyValueConfig::from_text("scenario = fig9\n")),
                  config_error);
  CHECK_THROWS_AS(scenario_from_config(KeyValueConfig::from_text("scenario = custom\n")),
                  config_error);
}

TEST_CASE("known-sequence scenario reproduces the fitted parameters") {
  ScenarioConfig cfg = named_scenario(ScenarioKind::fig2a, 20260809);
  const ScenarioResult result = run_scenario(cfg);
  const double step = 2.0 / 256.0;
  CHECK(result.fit.converged);
  CHECK(result.fit.sigma >= 0.24 * step);
  CHECK(result.fit.sigma <= 0.26 * step);
  CHECK(std::fabs(result.fit.mu) <= 0.01 * step);
  CHECK(!result.bounds.has_value());
  CHECK(result.estimate.points.size() > 10000);

  // estimation errors stay inside the binomial envelope wherever the
  // normal approximation has any resolution (count variance >= 25)
  const double sigma = cfg.noise_scale;
  for (const auto& p : result.estimate.points) {
    const double n_eff = static_cast<double>(result.estimate.records) * p.multiplicity;
    if (n_eff * p.f_hat * (1.0 - p.f_hat) < 25.0) continue;
    const double truth = normal_cdf(p.x / sigma);
    CHECK(std::fabs(p.f_hat - truth) <= 4.0 * std::sqrt(p.var_hat) + 1e-12);
  }
}

TEST_CASE("runs are deterministic in the seed and job count") {
  ScenarioConfig cfg = named_scenario(ScenarioKind::fig2b, 77);
  const ScenarioResult a = run_scenario(cfg);
  cfg.jobs = 4;
  const ScenarioResult b = run_scenario(cfg);
  REQUIRE(a.estimate.points.size() == b.estimate.points.size());
  for (std::size_t j = 0; j < a.estimate.points.size(); ++j) {
    CHECK(a.estimate.points[j].x == b.estimate.points[j].x);
    CHECK(a.estimate.points[j].count == b.estimate.points[j].count);
  }
  CHECK(a.fit.sigma == b.fit.sigma);
  CHECK(a.delta_eps == b.delta_eps);

  ScenarioConfig other = named_scenario(ScenarioKind::fig2b, 78);
  const ScenarioResult c = run_scenario(other);
  CHECK(a.fit.sigma != c.fit.sigma);
}

TEST_CASE("artifacts are self-consistent and byte-deterministic") {
  TempDir dir_a("qn_scenario_a");
  TempDir dir_b("qn_scenario_b");
  ScenarioConfig cfg = named_scenario(ScenarioKind::fig2b, 123);
  const ScenarioResult result = run_scenario(cfg);
  write_artifacts(result, cfg, dir_a.path.string());
  cfg.jobs = 3;
  write_artifacts(run_scenario(cfg), cfg, dir_b.path.string());

  for (const char* name : {"estimate.csv", "bounds.csv", "pdf.csv", "summary.txt",
                           "sinefit.txt"}) {
    CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
  }

  // re-fitting the emitted estimate reproduces the summary parameters
  const CdfEstimate back = read_estimate_csv((dir_a.path / "estimate.csv").string());
  const GaussianCdfFit refit = fit_gaussian_cdf(back);
  CHECK(refit.sigma == result.fit.sigma);
  CHECK(refit.mu == result.fit.mu);
}

TEST_CASE("sine-fit estimation widens with smaller noise") {
  ScenarioConfig b = named_scenario(ScenarioKind::fig2b, 5150);
  ScenarioConfig c = named_scenario(ScenarioKind::fig2c, 5150);
  const ScenarioResult rb = run_scenario(b);
  const ScenarioResult rc = run_scenario(c);
  REQUIRE(rb.bounds.has_value());
  REQUIRE(rc.bounds.has_value());
  CHECK(rb.delta_eps > 0);
  CHECK(rc.delta_eps > rb.delta_eps);
  REQUIRE(rb.sinefit.has_value());
  for (std::size_t i = 0; i < rb.bounds->x.size(); ++i) {
    CHECK(rb.bounds->lower[i] <= rb.bounds->upper[i]);
  }
}

TEST_CASE("replications derive distinct seeds and aggregate per point") {
  ScenarioConfig cfg = named_scenario(ScenarioKind::fig2a, 31);
  const auto& sine = std::get<SineStimulus>(cfg.stimulus);
  ScenarioConfig small = cfg;
  SineStimulus s = sine;
  s.samples = 31;
  s.periods = 7;
  small.stimulus = s;
  small.records = 200;

  const ReplicationStats stats = run_replications(small, 4);
  CHECK(stats.replications == 4);
  CHECK(stats.mu_hat.size() == 4);
  CHECK(stats.x.size() > 0);
  CHECK(stats.mean_f.size() == stats.x.size());
  CHECK(stats.sigma_hat[0] != stats.sigma_hat[1]);  // distinct derived seeds

  const ReplicationStats again = run_replications(small, 4);
  CHECK(again.sigma_hat == stats.sigma_hat);

  ScenarioConfig sf = named_scenario(ScenarioKind::fig2b, 31);
  SineStimulus s2 = std::get<SineStimulus>(sf.stimulus);
  s2.samples = 31;
  s2.periods = 7;
  sf.stimulus = s2;
  sf.records = 200;
  const ReplicationStats sf_stats = run_replications(sf, 2);
  CHECK(sf_stats.x.empty());  // abscissas move between replications
  CHECK(sf_stats.delta_eps[0] > 0);

  CHECK_THROWS_AS(run_replications(small, 1), config_error);
}

TEST_CASE("numeric pdf tracks the analytic density on a simulated run") {
  const ScenarioResult result = run_scenario(named_scenario(ScenarioKind::fig2a, 404));
  const double sigma = named_scenario(ScenarioKind::fig2a, 404).noise_scale;
  const int window = 5;
  const auto pdf = pdf_from_cdf(result.estimate, PdfMethod::central_difference, window);
  const auto& pts = result.estimate.points;
  const double max_slope = 0.242 / (sigma * sigma);  // steepest gaussian density slope
  std::size_t checked = 0;
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    const auto& [x, density] = pdf[i];
    if (std::fabs(x) > 2.0 * sigma) continue;
    const auto& lo = pts[i];
    const auto& hi = pts[i + 2 * window];
    const double span = hi.x - lo.x;
    // sampling noise of the difference quotient plus the averaging bias of a
    // centered difference across the window
    const double se = std::sqrt(lo.var_hat + hi.var_hat) / span;
    const double bias = 0.5 * span * max_slope;
    const double analytic = normal_pdf(x / sigma) / sigma;
    CHECK(std::fabs(density - analytic) <= 6.0 * se + bias);
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("scaled-down experiment pipeline recovers the injected noise") {
  ScenarioConfig cfg = named_scenario(ScenarioKind::experiment, 606);
  cfg.records = 20000;
  cfg.sweep_levels = 40;
  cfg.servo.samples_per_step = 4000;
  const ScenarioResult result = run_scenario(cfg);
  REQUIRE(result.calibration.has_value());
  REQUIRE(result.bounds.has_value());
  CHECK(result.calibration->failures.empty());
  REQUIRE(result.calibration->line.has_value());
  const double step = 20.0 / 4096.0;
  CHECK(result.calibration->max_line_deviation <= step / 4.0 + 0.05 * step);
  CHECK(result.fit.converged);
  CHECK(std::fabs(result.fit.mu - cfg.noise_location) <= 0.10 * cfg.noise_scale);
  CHECK(std::fabs(result.fit.sigma - cfg.noise_scale) <= 0.10 * cfg.noise_scale);
  CHECK(result.fit.max_residual <= 0.05);
  CHECK(result.delta_eps > 0);
  CHECK(result.delta_eps < 0.05 * step);
}

TEST_CASE("pipeline errors carry the stage name") {
  ScenarioConfig cfg = named_scenario(ScenarioKind::fig2a, 1);
  cfg.mode = EstimationMode::sinefit_s;
  cfg.stimulus = SweptDcStimulus{{0.0, 0.1}};
  CHECK_THROWS_AS(run_scenario(cfg), config_error);

  ScenarioConfig bad = named_scenario(ScenarioKind::fig2a, 1);
  bad.records = 0;
  CHECK_THROWS_AS(run_scenario(bad), config_error);
}
