#pragma once

#include <array>
#include <vector>

#include "quantnoise/linalg.hpp"
#include "quantnoise/quantizer.hpp"
#include "quantnoise/records.hpp"
#include "quantnoise/signal.hpp"

namespace quantnoise {

// Three-parameter least-squares sine fit at known frequency, solved per
// record and then averaged across records.
//
// Model per sample: y_n ~ th1*sin(w n) + th2*cos(w n) + th3, w = 2*pi*periods/samples.
// With s_n = A sin(w n + phi0) + C this means th1 = A cos(phi0),
// th2 = A sin(phi0), th3 = C, so the phase comes back through
// atan2(th2, th1). (A principal-branch arctan of th1/th2 would be
// quadrant-ambiguous; the reconstruction below is checked against the
// noiseless round trip instead.)
struct SineFitResult {
  std::vector<std::array<double, 3>> per_record;  // theta_hat per record
  std::array<double, 3> averaged = {0, 0, 0};     // mean over records
  double amplitude = 0;                           // >= 0
  double initial_phase = 0;                       // in (-pi, pi]
  double offset = 0;                              // averaged[2]
  std::vector<double> reconstructed;              // s_hat_n
};

// Rows n = 0..samples-1: [sin(2*pi*periods*n/samples), cos(...), 1].
Matrix design_matrix(int periods, int samples);

// Fits voltage-valued records (one column per record).
SineFitResult fit_records(const SampleMatrix& voltages, int periods);

// Representative voltage per code: bin midpoint for interior codes; the edge
// codes also capture saturated inputs, so they map to the outermost
// transition levels instead of a midpoint.
SampleMatrix codes_to_midpoint_voltages(const CodeRecords& records, const QuantizerModel& q);

// Convenience overload: map codes to voltages, then fit.
SineFitResult fit_records(const CodeRecords& records, const QuantizerModel& q, int periods);

void write_sine_fit_summary(const SineFitResult& fit, const std::string& path);
void write_sine_fit_thetas_csv(const SineFitResult& fit, const std::string& path);

}  // namespace quantnoise
