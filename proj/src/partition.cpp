#include "quantnoise/partition.hpp"

#include <algorithm>
#include <cmath>

#include "quantnoise/csv.hpp"
#include "quantnoise/errors.hpp"
#include "quantnoise/rng.hpp"

namespace quantnoise {

double default_tolerance(const QuantizerModel& q) { return q.step() * 1e-9; }

PartitionTable build_partition(const QuantizerModel& q, std::span<const double> sequence,
                               double tolerance) {
  if (sequence.empty()) throw partition_error("stimulus sequence is empty");
  if (!(tolerance >= 0) || !std::isfinite(tolerance)) {
    throw partition_error("grouping tolerance must be a finite non-negative voltage");
  }
  for (double s : sequence) {
    if (!std::isfinite(s)) throw partition_error("stimulus sequence must be finite");
  }

  const int n_samples = static_cast<int>(sequence.size());
  const int k_lo = 1;
  const int k_hi = q.num_codes() - 1;

  struct Entry {
    double diff;
    int n;
    int k;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(n_samples) * (k_hi - k_lo + 1));
  for (int k = k_lo; k <= k_hi; ++k) {
    const double t = q.transition(k);
    for (int n = 0; n < n_samples; ++n) {
      entries.push_back({t - sequence[static_cast<std::size_t>(n)], n, k});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.diff < b.diff; });

  PartitionTable part;
  part.tolerance = tolerance;
  part.k_lo = k_lo;
  part.k_hi = k_hi;
  part.samples = n_samples;
  part.quantizer_fp = q.fingerprint();
  part.stimulus_fp = fingerprint_of(sequence);

  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i + 1;
    while (j < entries.size() && entries[j].diff - entries[j - 1].diff <= tolerance) ++j;
    const double span = entries[j - 1].diff - entries[i].diff;
    if (tolerance > 0 && span > 10.0 * tolerance) {
      throw partition_error(
          "grouping tolerance " + format_double(tolerance) + " chained " +
          std::to_string(j - i) + " differences across a span of " + format_double(span) +
          "; reduce the tolerance so distinct sampling points are not merged");
    }
    PartitionGroup group;
    group.members.reserve(j - i);
    double sum = 0;
    for (std::size_t m = i; m < j; ++m) {
      sum += entries[m].diff;
      group.members.emplace_back(entries[m].n, entries[m].k);
    }
    group.x = sum / static_cast<double>(j - i);
    part.groups.push_back(std::move(group));
    i = j;
  }
  return part;
}

void write_partition_csv(const PartitionTable& part, const std::string& path,
                         const std::string& members_path) {
  auto out = open_output(path);
  out << "# quantnoise-partition v1 N=" << part.samples << " tau=" << format_double(part.tolerance)
      << " k_lo=" << part.k_lo << " k_hi=" << part.k_hi
      << " quantizer_fp=" << format_hex64(part.quantizer_fp)
      << " stimulus_fp=" << format_hex64(part.stimulus_fp) << "\n";
  out << "j,x_j,L_j\n";
  for (std::size_t j = 0; j < part.groups.size(); ++j) {
    out << j << ',' << format_double(part.groups[j].x) << ',' << part.groups[j].multiplicity()
        << "\n";
  }
  if (!out) throw io_error("write failed: " + path);

  if (!members_path.empty()) {
    auto mout = open_output(members_path);
    mout << "# quantnoise-partition-members v1\n";
    mout << "j,n,k\n";
    for (std::size_t j = 0; j < part.groups.size(); ++j) {
      for (const auto& [n, k] : part.groups[j].members) {
        mout << j << ',' << n << ',' << k << "\n";
      }
    }
    if (!mout) throw io_error("write failed: " + members_path);
  }
}

}  // namespace quantnoise
