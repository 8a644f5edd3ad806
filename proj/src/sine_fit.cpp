#include "quantnoise/sine_fit.hpp"

#include <cmath>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"
#include "quantnoise/math.hpp"

namespace quantnoise {

Matrix design_matrix(int periods, int samples) {
  if (samples < 3) throw fit_error("sine fit needs at least 3 samples");
  Matrix h(samples, 3);
  const double w = 2.0 * kPi * periods / samples;
  for (int n = 0; n < samples; ++n) {
    h.at(n, 0) = std::sin(w * n);
    h.at(n, 1) = std::cos(w * n);
    h.at(n, 2) = 1.0;
  }
  return h;
}

SineFitResult fit_records(const SampleMatrix& voltages, int periods) {
  const int n_samples = voltages.samples();
  const int n_records = voltages.records();
  const QrLeastSquares qr(design_matrix(periods, n_samples));
  if (qr.rank_deficient()) {
    throw fit_error("design matrix is rank deficient (periods = 0 mod samples?)");
  }

  SineFitResult fit;
  fit.per_record.reserve(static_cast<std::size_t>(n_records));
  std::vector<double> rhs(static_cast<std::size_t>(n_samples));
  std::array<double, 3> sum = {0, 0, 0};
  for (int r = 0; r < n_records; ++r) {
    for (int n = 0; n < n_samples; ++n) rhs[static_cast<std::size_t>(n)] = voltages.at(n, r);
    const std::vector<double> theta = qr.solve(rhs);
    fit.per_record.push_back({theta[0], theta[1], theta[2]});
    for (int i = 0; i < 3; ++i) sum[static_cast<std::size_t>(i)] += theta[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < 3; ++i) {
    fit.averaged[static_cast<std::size_t>(i)] = sum[static_cast<std::size_t>(i)] / n_records;
  }

  fit.amplitude = std::hypot(fit.averaged[0], fit.averaged[1]);
  fit.initial_phase = std::atan2(fit.averaged[1], fit.averaged[0]);
  if (fit.initial_phase <= -kPi) fit.initial_phase = kPi;  // keep phase in (-pi, pi]
  fit.offset = fit.averaged[2];

  fit.reconstructed.resize(static_cast<std::size_t>(n_samples));
  const double w = 2.0 * kPi * periods / n_samples;
  for (int n = 0; n < n_samples; ++n) {
    fit.reconstructed[static_cast<std::size_t>(n)] =
        fit.amplitude * std::sin(w * n + fit.initial_phase) + fit.offset;
  }
  return fit;
}

SampleMatrix codes_to_midpoint_voltages(const CodeRecords& records, const QuantizerModel& q) {
  if (records.num_codes() != q.num_codes() ||
      records.quantizer_fingerprint() != q.fingerprint()) {
    throw fit_error("records were not acquired with this quantizer");
  }
  const int codes = q.num_codes();
  std::vector<double> voltage_of(static_cast<std::size_t>(codes) + 1, 0.0);
  voltage_of[1] = q.transition(0);
  voltage_of[static_cast<std::size_t>(codes)] = q.transition(codes);
  for (int k = 2; k < codes; ++k) {
    voltage_of[static_cast<std::size_t>(k)] = 0.5 * (q.transition(k - 1) + q.transition(k));
  }
  SampleMatrix v(records.samples(), records.records());
  for (int r = 0; r < records.records(); ++r) {
    for (int n = 0; n < records.samples(); ++n) {
      v.at(n, r) = voltage_of[static_cast<std::size_t>(records.code(n, r))];
    }
  }
  return v;
}

SineFitResult fit_records(const CodeRecords& records, const QuantizerModel& q, int periods) {
  return fit_records(codes_to_midpoint_voltages(records, q), periods);
}

void write_sine_fit_summary(const SineFitResult& fit, const std::string& path) {
  auto out = open_output(path);
  out << "A_hat=" << format_double(fit.amplitude) << "\n";
  out << "phi0_hat=" << format_double(fit.initial_phase) << "\n";
  out << "offset_hat=" << format_double(fit.offset) << "\n";
  if (!out) throw io_error("write failed: " + path);
}

void write_sine_fit_thetas_csv(const SineFitResult& fit, const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-sinefit-thetas v1\n";
  out << "r,th1,th2,th3\n";
  for (std::size_t r = 0; r < fit.per_record.size(); ++r) {
    const auto& t = fit.per_record[r];
    out << r << ',' << format_double(t[0]) << ',' << format_double(t[1]) << ','
        << format_double(t[2]) << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace quantnoise
