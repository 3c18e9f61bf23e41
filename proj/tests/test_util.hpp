#pragma once

#include <unistd.h>

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "dpplab/kernel.hpp"
#include "dpplab/rng.hpp"

namespace dpplab::testutil {

// Unit-Frobenius-norm random symmetric direction.
inline Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  StreamRng rng(seed, 0);
  Eigen::MatrixXd h(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) h(i, j) = h(j, i) = rng.next_normal();
  }
  h /= h.norm();
  return h;
}

// Per-subset trace statistics a[J][m] = Tr((L_J^{-1} H_J)^m) for m = 1..4,
// with the pmf table and the full-matrix analogues Tr(((I+L)^{-1} H)^m).
// The raw material for the combinatorial determinant identities.
struct SubsetTraces {
  std::vector<double> p;
  std::vector<std::array<double, 5>> a;  // index 0 unused
  std::array<double, 5> full{};

  template <typename F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) acc += p[j] * f(a[j]);
    return acc;
  }
  // E_p[f(a_J)] - f(a_full)
  template <typename F>
  double delta(F&& f) const {
    return expect(f) - f(full);
  }
};

inline SubsetTraces subset_traces(const Kernel& L, const Eigen::MatrixXd& H) {
  const int n = L.size();
  SubsetTraces out;
  PmfTable t = pmf_table(L);
  out.p = t.p;
  out.a.resize(t.p.size());
  for (Mask J = 0; J < t.p.size(); ++J) {
    std::array<double, 5> row{};
    if (J != 0) {
      Eigen::MatrixXd X =
          submatrix(L.matrix(), J).inverse() * submatrix(H, J);
      Eigen::MatrixXd P = X;
      for (int m = 1; m <= 4; ++m) {
        row[m] = P.trace();
        if (m < 4) P = P * X;
      }
    }
    out.a[J] = row;
  }
  Eigen::MatrixXd F =
      (Eigen::MatrixXd::Identity(n, n) + L.matrix()).inverse() * H;
  Eigen::MatrixXd P = F;
  for (int m = 1; m <= 4; ++m) {
    out.full[m] = P.trace();
    if (m < 4) P = P * F;
  }
  return out;
}

// Temp directory removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("dpplab_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path file(const std::string& name) const {
    return dir_ / name;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace dpplab::testutil
