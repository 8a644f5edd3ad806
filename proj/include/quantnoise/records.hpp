#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "quantnoise/quantizer.hpp"
#include "quantnoise/signal.hpp"

namespace quantnoise {

// N x R matrix of quantizer output codes y(n,r) in 1..K, with fingerprints of
// the quantizer and stimulus it was acquired against. The fingerprints exist
// so a partition built against different hardware or a different sequence is
// rejected instead of silently combined.
class CodeRecords {
 public:
  CodeRecords(int samples, int records, int num_codes, std::uint64_t quantizer_fp,
              std::uint64_t stimulus_fp, std::vector<std::int32_t> codes = {});

  int samples() const { return samples_; }
  int records() const { return records_; }
  int num_codes() const { return num_codes_; }
  std::uint64_t quantizer_fingerprint() const { return quantizer_fp_; }
  std::uint64_t stimulus_fingerprint() const { return stimulus_fp_; }

  int code(int n, int r) const {
    return codes_[static_cast<std::size_t>(r) * samples_ + n];
  }
  void set_code(int n, int r, int code) {
    codes_[static_cast<std::size_t>(r) * samples_ + n] = static_cast<std::int32_t>(code);
  }

  // Reinterprets the records in a new code space (e.g. restricts a full
  // acquisition to a calibrated window of codes). Consumes *this.
  CodeRecords transform_codes(int new_num_codes, std::uint64_t new_quantizer_fp,
                              const std::function<int(int)>& map) &&;

 private:
  int samples_;
  int records_;
  int num_codes_;
  std::uint64_t quantizer_fp_;
  std::uint64_t stimulus_fp_;
  std::vector<std::int32_t> codes_;  // record-major
};

// Quantizes an already-synthesized sample matrix.
CodeRecords quantize_all(const SampleMatrix& x, const QuantizerModel& q,
                         std::uint64_t stimulus_fp);

// Fused synthesize + quantize; never materializes the voltage matrix, so it is
// the path for large acquisitions. Output is identical to
// quantize_all(synthesize(plan), q, ...) for any job count.
CodeRecords simulate_records(const StimulusPlan& plan, const QuantizerModel& q, int jobs = 1);

// CSV with columns n,r,y under a header carrying N, R, K and fingerprints.
void write_records_csv(const CodeRecords& records, const std::string& path);
CodeRecords read_records_csv(const std::string& path);

}  // namespace quantnoise
