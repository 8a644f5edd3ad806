#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quantnoise/quantizer.hpp"

namespace quantnoise {

// One group of (sample index n, transition index k) pairs whose differences
// T_k - s_n agree within the grouping tolerance. `x` is the group mean of the
// raw differences; the group's cardinality is members.size().
struct PartitionGroup {
  double x = 0;
  std::vector<std::pair<int, int>> members;  // (n, k)

  int multiplicity() const { return static_cast<int>(members.size()); }
};

// Ascending groups covering every usable (n, k) pair exactly once. Only
// interior transitions k = 1..K-1 are usable: the comparison y <= K is
// identically true once out-of-range inputs saturate, so k = K carries no
// information (and k = 0 is not a code comparison at all).
struct PartitionTable {
  std::vector<PartitionGroup> groups;
  double tolerance = 0;
  int k_lo = 1;
  int k_hi = 0;     // inclusive; K-1
  int samples = 0;  // N
  std::uint64_t quantizer_fp = 0;
  std::uint64_t stimulus_fp = 0;

  std::size_t size() const { return groups.size(); }
};

// Default grouping tolerance for exactly-known (simulated) inputs.
double default_tolerance(const QuantizerModel& q);

// Sorts all differences T_k - s_n (k interior) and merges neighbors within
// `tolerance` by single linkage. A merged chain that spans more than 10x the
// tolerance means the tolerance is swallowing genuinely distinct sampling
// points; that raises partition_error rather than returning a bad table.
PartitionTable build_partition(const QuantizerModel& q, std::span<const double> sequence,
                               double tolerance);

// CSV with columns j,x_j,L_j; when members_path is non-empty, also dumps the
// (n,k) membership as columns j,n,k.
void write_partition_csv(const PartitionTable& part, const std::string& path,
                         const std::string& members_path = "");

}  // namespace quantnoise
