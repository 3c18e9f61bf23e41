#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "dpplab/sampler.hpp"
#include "dpplab/stats.hpp"
#include "test_util.hpp"

using namespace dpplab;

namespace {

std::vector<std::int64_t> subset_counts(const SampleSet& s) {
  std::vector<std::int64_t> counts(std::size_t{1} << s.n_items, 0);
  for (Mask J : s.draws) ++counts[J];
  return counts;
}

double marginal(const SampleSet& s, int item) {
  std::int64_t hits = 0;
  for (Mask J : s.draws) {
    if (J & (Mask{1} << item)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(s.draws.size());
}

double pair_freq(const SampleSet& s, int i, int j) {
  Mask pair = (Mask{1} << i) | (Mask{1} << j);
  std::int64_t hits = 0;
  for (Mask J : s.draws) {
    if ((J & pair) == pair) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(s.draws.size());
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("exhaustive sampler matches the pmf table") {
  Kernel L = random_kernel(3, 17);
  SampleSet s = sample_exhaustive(L, 20000, 99);
  ChiSquareResult r = chi_square_gof(subset_counts(s), pmf_table(L).p, 20000);
  CHECK(r.p_value > 1e-3);
}

TEST_CASE("spectral sampler matches the pmf table and the oracle") {
  Kernel L = random_kernel(3, 23);
  SampleSet s = sample_spectral(L, 20000, 7);
  ChiSquareResult r = chi_square_gof(subset_counts(s), pmf_table(L).p, 20000);
  CHECK(r.p_value > 1e-3);
}

TEST_CASE("singleton marginals track diag K within three sigma") {
  const std::int64_t n = 100000;
  Kernel L = random_kernel(4, 31);
  Eigen::MatrixXd K = l_to_k(L).matrix();
  SampleSet spec = sample_spectral(L, n, 12);
  SampleSet exact = sample_exhaustive(L, n, 12);
  for (int i = 0; i < 4; ++i) {
    double p = K(i, i);
    double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(marginal(spec, i) - p) < 3.0 * sigma);
    CHECK(std::abs(marginal(exact, i) - p) < 4.0 * sigma);
    double via_minor = inclusion_prob(L, Mask{1} << i);
    CHECK(via_minor == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("empirical negative correlation") {
  const std::int64_t n = 100000;
  Kernel L = random_kernel(4, 31);
  SampleSet s = sample_spectral(L, n, 5);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      double pij = pair_freq(s, i, j);
      double margin =
          4.0 * std::sqrt(std::max(pij * (1.0 - pij), 1e-12) /
                          static_cast<double>(n));
      CHECK(pij <= marginal(s, i) * marginal(s, j) + margin);
    }
  }
}

TEST_CASE("draws are reproducible and order-free") {
  Kernel L = random_kernel(4, 2);
  SampleSet a = sample_spectral(L, 50, 77);
  SampleSet b = sample_spectral(L, 50, 77);
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    CHECK(a.draws[i] == b.draws[i]);
  }
  // draw d depends only on (seed, d), not on the requested count
  SampleSet prefix = sample_spectral(L, 10, 77);
  for (std::size_t i = 0; i < prefix.draws.size(); ++i) {
    CHECK(prefix.draws[i] == a.draws[i]);
  }
  SampleSet other = sample_spectral(L, 50, 78);
  bool all_same = true;
  for (std::size_t i = 0; i < other.draws.size(); ++i) {
    all_same = all_same && other.draws[i] == a.draws[i];
  }
  CHECK_FALSE(all_same);
}

TEST_CASE("sample files round trip, including empty sets") {
  // small kernel draws the empty set often
  Eigen::MatrixXd tiny = 0.1 * Eigen::MatrixXd::Identity(3, 3);
  Kernel L{tiny};
  SampleSet s = sample_spectral(L, 500, 3);
  bool saw_empty = false;
  for (Mask J : s.draws) saw_empty = saw_empty || J == 0;
  CHECK(saw_empty);

  testutil::ScratchDir dir("samples");
  save_samples(dir.file("s.txt"), s);
  SampleSet back = load_samples(dir.file("s.txt"));
  CHECK(back.n_items == s.n_items);
  CHECK(back.seed == s.seed);
  REQUIRE(back.draws.size() == s.draws.size());
  for (std::size_t i = 0; i < s.draws.size(); ++i) {
    CHECK(back.draws[i] == s.draws[i]);
  }

  CHECK_THROWS_AS(load_samples(dir.file("missing.txt")), IoError);
}

TEST_CASE("validation of sampler arguments") {
  Kernel L = random_kernel(2, 1);
  CHECK_THROWS_AS(sample_exhaustive(L, -1, 1), ValidationError);
  CHECK_THROWS_AS(sample_spectral(L, -5, 1), ValidationError);
  CHECK(sample_spectral(L, 0, 1).draws.empty());
}

}  // TEST_SUITE("sampler")
