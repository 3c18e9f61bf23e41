#include "dpplab/sampler.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "dpplab/matrix_io.hpp"
#include "dpplab/rng.hpp"
#include "dpplab/stats.hpp"

namespace dpplab {

SampleSet sample_exhaustive(const Kernel& L, std::int64_t count,
                            std::uint64_t seed) {
  if (count < 0) throw ValidationError("sample count must be >= 0");
  PmfTable table = pmf_table(L);
  std::vector<double> cdf(table.p.size());
  KahanSum acc;
  for (std::size_t i = 0; i < table.p.size(); ++i) {
    acc.add(table.p[i]);
    cdf[i] = acc.value();
  }
  cdf.back() = std::max(cdf.back(), 1.0);  // guard the final bin

  SampleSet s;
  s.n_items = L.size();
  s.seed = seed;
  s.draws.resize(static_cast<std::size_t>(count));
  for (std::int64_t d = 0; d < count; ++d) {
    StreamRng rng(seed, static_cast<std::uint64_t>(d));
    double u = rng.next_uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    s.draws[static_cast<std::size_t>(d)] =
        static_cast<Mask>(it - cdf.begin());
  }
  return s;
}

namespace {

Mask spectral_draw(const Eigen::VectorXd& lam, const Eigen::MatrixXd& vecs,
                   StreamRng& rng) {
  int n = static_cast<int>(lam.size());
  // Phase 1: eigenvector selection.
  std::vector<int> cols;
  for (int i = 0; i < n; ++i) {
    if (rng.next_uniform() < lam[i] / (1.0 + lam[i])) cols.push_back(i);
  }
  int k = static_cast<int>(cols.size());
  if (k == 0) return 0;
  Eigen::MatrixXd W(n, k);
  for (int c = 0; c < k; ++c) W.col(c) = vecs.col(cols[static_cast<std::size_t>(c)]);

  // Phase 2: sequential item selection.
  Mask out = 0;
  for (int remaining = k; remaining > 0; --remaining) {
    Eigen::VectorXd w = W.rowwise().squaredNorm();  // sums to `remaining`
    double total = w.sum();
    if (!(total > 0.0)) {
      throw NumericError("spectral sampler: vanishing selection weights");
    }
    double u = rng.next_uniform() * total;
    int item = n - 1;
    double run = 0.0;
    for (int a = 0; a < n; ++a) {
      run += w[a];
      if (u < run) {
        item = a;
        break;
      }
    }
    out |= Mask{1} << item;
    if (remaining == 1) break;

    // Eliminate the coordinate of the chosen item, then re-orthonormalize.
    int pivot = 0;
    W.row(item).cwiseAbs().maxCoeff(&pivot);
    if (std::abs(W(item, pivot)) < kGramSchmidtTol) {
      throw NumericError("spectral sampler: pivot breakdown");
    }
    for (int c = 0; c < W.cols(); ++c) {
      if (c == pivot) continue;
      W.col(c) -= (W(item, c) / W(item, pivot)) * W.col(pivot);
    }
    W.col(pivot) = W.col(W.cols() - 1);
    W.conservativeResize(Eigen::NoChange, W.cols() - 1);
    for (int c = 0; c < W.cols(); ++c) {
      for (int prev = 0; prev < c; ++prev) {
        W.col(c) -= W.col(prev).dot(W.col(c)) * W.col(prev);
      }
      double norm = W.col(c).norm();
      if (norm < kGramSchmidtTol) {
        throw NumericError("spectral sampler: Gram-Schmidt breakdown");
      }
      W.col(c) /= norm;
    }
  }
  return out;
}

}  // namespace

SampleSet sample_spectral(const Kernel& L, std::int64_t count,
                          std::uint64_t seed) {
  if (count < 0) throw ValidationError("sample count must be >= 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed in sample_spectral");
  }
  SampleSet s;
  s.n_items = L.size();
  s.seed = seed;
  s.draws.resize(static_cast<std::size_t>(count));
  for (std::int64_t d = 0; d < count; ++d) {
    StreamRng rng(seed, static_cast<std::uint64_t>(d));
    s.draws[static_cast<std::size_t>(d)] =
        spectral_draw(es.eigenvalues(), es.eigenvectors(), rng);
  }
  return s;
}

void save_samples(const std::filesystem::path& path, const SampleSet& s) {
  std::string out;
  out.reserve(s.draws.size() * 8 + 64);
  char header[96];
  std::snprintf(header, sizeof(header),
                "# dpplab samples n=%d count=%zu seed=%" PRIu64 "\n",
                s.n_items, s.draws.size(), s.seed);
  out += header;
  for (Mask draw : s.draws) {
    bool first = true;
    for (int i : subset_items(draw)) {
      if (!first) out += ' ';
      out += std::to_string(i);
      first = false;
    }
    out += '\n';
  }
  write_text_file(path, out);
}

SampleSet load_samples(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  SampleSet s;
  std::size_t count = 0;
  if (std::sscanf(line.c_str(), "# dpplab samples n=%d count=%zu seed=%" SCNu64,
                  &s.n_items, &count, &s.seed) != 3) {
    throw IoError(path.string() + ": bad sample header '" + line + "'");
  }
  check_ground_size(s.n_items);
  s.draws.reserve(count);
  while (std::getline(in, line)) {
    Mask J = 0;
    std::istringstream toks(line);
    int item;
    while (toks >> item) {
      if (item < 0 || item >= s.n_items) {
        throw IoError(path.string() + ": item index out of range: " +
                      std::to_string(item));
      }
      J |= Mask{1} << item;
    }
    s.draws.push_back(J);
  }
  if (s.draws.size() != count) {
    throw IoError(path.string() + ": header count " + std::to_string(count) +
                  " does not match " + std::to_string(s.draws.size()) +
                  " draws");
  }
  return s;
}

}  // namespace dpplab
