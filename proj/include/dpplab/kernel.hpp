#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "dpplab/errors.hpp"
#include "dpplab/subset.hpp"

namespace dpplab {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kKernelEigFloor = 1e-10;   // smallest accepted eigenvalue of L
inline constexpr double kCorrelationMargin = 1e-12;  // distance of spec(K) from {0, 1}

// Symmetric positive definite N x N matrix parametrizing an L-ensemble.
// The public constructor validates; trusted() skips the spectral check for
// hot paths where the caller guarantees validity.
class Kernel {
 public:
  explicit Kernel(Eigen::MatrixXd m);

  static Kernel trusted(Eigen::MatrixXd m) {
    return Kernel(std::move(m), trusted_tag{});
  }

  int size() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  struct trusted_tag {};
  Kernel(Eigen::MatrixXd m, trusted_tag) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

// Symmetric matrix with spectrum strictly inside (0, 1); marginal kernel.
class CorrelationKernel {
 public:
  explicit CorrelationKernel(Eigen::MatrixXd m);

  static CorrelationKernel trusted(Eigen::MatrixXd m) {
    return CorrelationKernel(std::move(m), trusted_tag{});
  }

  int size() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  struct trusted_tag {};
  CorrelationKernel(Eigen::MatrixXd m, trusted_tag) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

// Symmetry gate shared by the wrapper types and the file loader: rejects if
// max |M - M^T| exceeds tol * max(1, max |M|), then averages.
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m, double tol = kSymmetryTol);

CorrelationKernel l_to_k(const Kernel& L);
Kernel k_to_l(const CorrelationKernel& K);

// Dense submatrix M_J; the empty subset gives a 0 x 0 matrix.
Eigen::MatrixXd submatrix(const Eigen::MatrixXd& M, Mask J);

// target(J, J) += scale * block, with block indexed like subset_items(J).
void add_embedded(Eigen::MatrixXd& target, Mask J, const Eigen::MatrixXd& block,
                  double scale = 1.0);

// det(M_J); det of the empty submatrix is 1.
double principal_minor(const Eigen::MatrixXd& M, Mask J);

// log det of a symmetric positive definite matrix (throws NumericError).
double log_det_spd(const Eigen::MatrixXd& M);

struct PmfTable {
  int n = 0;
  std::vector<double> p;  // indexed by subset mask, length 2^n
  double total() const;   // compensated sum; 1 up to roundoff
};

double pmf(const Kernel& L, Mask J);
PmfTable pmf_table(const Kernel& L);
double inclusion_prob(const Kernel& L, Mask J);
double pmf_via_k(const CorrelationKernel& K, Mask J);

// L = A A^T + ridge I with A standard normal; generic full-support kernel.
Kernel random_kernel(int n, std::uint64_t seed, double ridge = 1e-3);

}  // namespace dpplab
