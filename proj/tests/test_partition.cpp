#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "quantnoise/errors.hpp"
#include "quantnoise/math.hpp"
#include "quantnoise/partition.hpp"
#include "quantnoise/rng.hpp"
#include "quantnoise/signal.hpp"

using namespace quantnoise;

TEST_CASE("partition groups equal differences") {
  const QuantizerModel q({-1.0, 0.0, 0.5, 1.0, 2.0});  // usable thresholds 0, 0.5, 1
  const std::vector<double> s{0.0, 0.5};
  const PartitionTable part = build_partition(q, s, 0.0);
  REQUIRE(part.size() == 4);
  const std::vector<double> want_x{-0.5, 0.0, 0.5, 1.0};
  const std::vector<int> want_l{1, 2, 2, 1};
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(part.groups[j].x == want_x[j]);
    CHECK(part.groups[j].multiplicity() == want_l[j]);
  }
  CHECK(part.k_lo == 1);
  CHECK(part.k_hi == 3);
}

TEST_CASE("near-equal differences merge within the tolerance") {
  const QuantizerModel q({-10.0, 0.75, 10.0});
  const std::vector<double> s{0.25, 0.25 - 1e-12};  // differences 0.5 and 0.5 + 1e-12
  const PartitionTable part = build_partition(q, s, 1e-9);
  REQUIRE(part.size() == 1);
  CHECK(part.groups[0].multiplicity() == 2);
  CHECK(part.groups[0].x == doctest::Approx(0.5 + 5e-13).epsilon(1e-12));
}

TEST_CASE("coherent sine differences are distinct at zero tolerance") {
  const QuantizerModel q = make_uniform(8, -1.0, 1.0);
  SineStimulus sine{5.37 * q.step(), 35, 151, 11.0 * kPi / 2.0, 0.0};
  const auto s = render_sequence(sine);
  const PartitionTable part = build_partition(q, s, 0.0);
  CHECK(part.size() == 151u * 255u);
  // the phase pattern repeats values exactly in real arithmetic, so a small
  // tolerance folds those pairs together
  const PartitionTable merged = build_partition(q, s, default_tolerance(q));
  CHECK(merged.size() < part.size());
  std::size_t covered = 0;
  for (const auto& g : merged.groups) covered += g.members.size();
  CHECK(covered == 151u * 255u);
}

TEST_CASE("members stay within tolerance of the representative") {
  const QuantizerModel q = make_uniform(4, -1.0, 1.0);
  RandomStream rng(5);
  std::vector<double> s(23);
  for (auto& v : s) v = -1.1 + 2.2 * rng.uniform01();
  const double tau = q.step() * 1e-9;
  const PartitionTable part = build_partition(q, s, tau);
  double previous = -1e300;
  for (const auto& g : part.groups) {
    CHECK(g.x - previous > tau);
    previous = g.x;
    for (const auto& [n, k] : g.members) {
      CHECK(std::fabs(q.transition(k) - s[static_cast<std::size_t>(n)] - g.x) <= tau);
    }
  }
}

TEST_CASE("partition covers every usable pair exactly once") {
  const QuantizerModel q = make_uniform(3, 0.0, 1.0);
  RandomStream rng(17);
  std::vector<double> s(11);
  for (auto& v : s) v = rng.uniform01();
  const PartitionTable part = build_partition(q, s, 0.0);
  std::map<std::pair<int, int>, int> seen;
  std::size_t total = 0;
  for (const auto& g : part.groups) {
    for (const auto& m : g.members) {
      ++seen[m];
      ++total;
    }
  }
  CHECK(total == s.size() * static_cast<std::size_t>(q.num_codes() - 1));
  for (const auto& [pair, count] : seen) {
    CHECK(count == 1);
    CHECK(pair.second >= 1);
    CHECK(pair.second <= q.num_codes() - 1);
  }
}

TEST_CASE("permuting the sequence leaves the (x, L) multiset unchanged") {
  const QuantizerModel q = make_uniform(4, -0.5, 0.5);
  RandomStream rng(23);
  std::vector<double> s(9);
  for (auto& v : s) v = -0.6 + 1.2 * rng.uniform01();
  std::vector<double> shuffled = s;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[0], shuffled[4]);

  auto signature = [&](const PartitionTable& p) {
    std::vector<std::pair<double, int>> sig;
    for (const auto& g : p.groups) sig.emplace_back(g.x, g.multiplicity());
    return sig;
  };
  CHECK(signature(build_partition(q, s, 0.0)) == signature(build_partition(q, shuffled, 0.0)));
}

TEST_CASE("single swept level degenerates to one group per threshold") {
  const QuantizerModel q = make_uniform(4, -1.0, 1.0);
  const std::vector<double> s(6, 0.125);  // six repeats of one DC level
  const PartitionTable part = build_partition(q, s, 0.0);
  REQUIRE(part.size() == static_cast<std::size_t>(q.num_codes() - 1));
  for (const auto& g : part.groups) CHECK(g.multiplicity() == 6);
}

TEST_CASE("pathological tolerance chains are rejected") {
  const QuantizerModel q({-10.0, 0.0, 10.0});
  const double tau = 1e-6;
  std::vector<double> s(15);
  for (std::size_t n = 0; n < s.size(); ++n) {
    s[n] = static_cast<double>(n) * 0.9 * tau;  // differences chain 0.9*tau apart
  }
  CHECK_THROWS_AS(build_partition(q, s, tau), partition_error);
  CHECK_THROWS_WITH_AS(build_partition(q, s, tau),
                       doctest::Contains("reduce the tolerance"), partition_error);
}

TEST_CASE("partition input validation") {
  const QuantizerModel q({0.0, 1.0, 2.0});
  CHECK_THROWS_AS(build_partition(q, std::vector<double>{}, 0.0), partition_error);
  CHECK_THROWS_AS(build_partition(q, std::vector<double>{0.1}, -1.0), partition_error);
}
