#include "quantnoise/records.hpp"

#include <string>
#include <utility>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"
#include "quantnoise/parallel.hpp"

namespace quantnoise {

CodeRecords::CodeRecords(int samples, int records, int num_codes, std::uint64_t quantizer_fp,
                         std::uint64_t stimulus_fp, std::vector<std::int32_t> codes)
    : samples_(samples),
      records_(records),
      num_codes_(num_codes),
      quantizer_fp_(quantizer_fp),
      stimulus_fp_(stimulus_fp),
      codes_(std::move(codes)) {
  if (samples_ < 1 || records_ < 1 || num_codes_ < 2) {
    throw estimation_error("code records need N >= 1, R >= 1, K >= 2");
  }
  const std::size_t want = static_cast<std::size_t>(samples_) * records_;
  if (codes_.empty()) {
    codes_.assign(want, 1);
  } else if (codes_.size() != want) {
    throw estimation_error("code records: matrix size does not match declared N x R");
  } else {
    for (std::int32_t c : codes_) {
      if (c < 1 || c > num_codes_) {
        throw estimation_error("code records: code " + std::to_string(c) +
                               " outside 1.." + std::to_string(num_codes_));
      }
    }
  }
}

CodeRecords CodeRecords::transform_codes(int new_num_codes, std::uint64_t new_quantizer_fp,
                                         const std::function<int(int)>& map) && {
  for (auto& c : codes_) c = static_cast<std::int32_t>(map(c));
  return CodeRecords(samples_, records_, new_num_codes, new_quantizer_fp, stimulus_fp_,
                     std::move(codes_));
}

CodeRecords quantize_all(const SampleMatrix& x, const QuantizerModel& q,
                         std::uint64_t stimulus_fp) {
  CodeRecords rec(x.samples(), x.records(), q.num_codes(), q.fingerprint(), stimulus_fp);
  for (int r = 0; r < x.records(); ++r) {
    for (int n = 0; n < x.samples(); ++n) {
      rec.set_code(n, r, q.quantize(x.at(n, r)));
    }
  }
  return rec;
}

CodeRecords simulate_records(const StimulusPlan& plan, const QuantizerModel& q, int jobs) {
  validate_plan(plan);
  const std::vector<double> seq = render_sequence(plan.stimulus);
  const int n_samples = static_cast<int>(seq.size());
  CodeRecords rec(n_samples, plan.records, q.num_codes(), q.fingerprint(), fingerprint_of(seq));
  parallel_chunks(plan.records, jobs, [&](int r_begin, int r_end) {
    for (int r = r_begin; r < r_end; ++r) {
      RandomStream stream(derive_seed(plan.noise.seed, static_cast<std::uint64_t>(r)));
      for (int n = 0; n < n_samples; ++n) {
        const double x = seq[static_cast<std::size_t>(n)] + sample_noise(plan.noise, stream);
        rec.set_code(n, r, q.quantize(x));
      }
    }
  });
  return rec;
}

void write_records_csv(const CodeRecords& records, const std::string& path) {
  auto out = open_output(path);
  out << "# quantnoise-records v1 N=" << records.samples() << " R=" << records.records()
      << " K=" << records.num_codes()
      << " quantizer_fp=" << format_hex64(records.quantizer_fingerprint())
      << " stimulus_fp=" << format_hex64(records.stimulus_fingerprint()) << "\n";
  out << "n,r,y\n";
  for (int n = 0; n < records.samples(); ++n) {
    for (int r = 0; r < records.records(); ++r) {
      out << n << ',' << r << ',' << records.code(n, r) << "\n";
    }
  }
  if (!out) throw io_error("write failed: " + path);
}

CodeRecords read_records_csv(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# quantnoise-records v1", 0) != 0) {
    throw io_error("unrecognized records file header: " + path);
  }
  std::string tmp;
  auto need = [&](const char* key) {
    if (!header_value(line, key, tmp)) {
      throw io_error(std::string("records header missing ") + key + ": " + path);
    }
    return tmp;
  };
  const int n_samples = static_cast<int>(parse_int(need("N")));
  const int n_records = static_cast<int>(parse_int(need("R")));
  const int codes = static_cast<int>(parse_int(need("K")));
  const std::uint64_t qfp = parse_hex64(need("quantizer_fp"));
  const std::uint64_t sfp = parse_hex64(need("stimulus_fp"));

  CodeRecords rec(n_samples, n_records, codes, qfp, sfp);
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    auto s = trim(line);
    if (s.empty() || s.front() == '#' || s == "n,r,y") continue;
    auto cols = split(s, ',');
    if (cols.size() != 3) throw io_error("records row needs 3 columns: " + path);
    const int n = static_cast<int>(parse_int(cols[0]));
    const int r = static_cast<int>(parse_int(cols[1]));
    const int y = static_cast<int>(parse_int(cols[2]));
    if (n < 0 || n >= n_samples || r < 0 || r >= n_records) {
      throw io_error("records row index out of range: " + path);
    }
    if (y < 1 || y > codes) throw io_error("records code out of range: " + path);
    rec.set_code(n, r, y);
    ++seen;
  }
  if (seen != static_cast<std::size_t>(n_samples) * static_cast<std::size_t>(n_records)) {
    throw io_error("records file incomplete: " + path);
  }
  return rec;
}

}  // namespace quantnoise
