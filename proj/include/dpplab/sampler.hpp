#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dpplab/kernel.hpp"

namespace dpplab {

inline constexpr double kGramSchmidtTol = 1e-12;

struct SampleSet {
  int n_items = 0;
  std::uint64_t seed = 0;
  std::vector<Mask> draws;
};

// Inverse-CDF over the full pmf table; the validation oracle.
SampleSet sample_exhaustive(const Kernel& L, std::int64_t count,
                            std::uint64_t seed);

// Spectral sampler: Bernoulli-select eigenvectors of L with odds lam/(1+lam),
// then pick items sequentially with Gram-Schmidt projection updates. Works at
// any N. Draw d consumes the stream (seed, d), so draws are order-free.
SampleSet sample_spectral(const Kernel& L, std::int64_t count,
                          std::uint64_t seed);

// Text format: "# dpplab samples n=<n> count=<c> seed=<s>" header, then one
// line of space-separated 0-based item indices per draw (empty line = empty
// set).
void save_samples(const std::filesystem::path& path, const SampleSet& s);
SampleSet load_samples(const std::filesystem::path& path);

}  // namespace dpplab
