#include "dpplab/kernel.hpp"

#include <cmath>
#include <string>

#include "dpplab/rng.hpp"
#include "dpplab/stats.hpp"

namespace dpplab {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) {
    throw ValidationError("matrix is not square: " + std::to_string(m.rows()) +
                          "x" + std::to_string(m.cols()));
  }
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  double dev = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (dev > tol * scale) {
    throw ValidationError("matrix asymmetry " + std::to_string(dev) +
                          " exceeds tolerance");
  }
  return 0.5 * (m + m.transpose());
}

Kernel::Kernel(Eigen::MatrixXd m) : m_(symmetrized(m)) {
  check_ground_size(static_cast<int>(m_.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed during kernel validation");
  }
  double lo = es.eigenvalues().minCoeff();
  if (!(lo > kKernelEigFloor)) {
    throw ValidationError("kernel must be positive definite; min eigenvalue " +
                          std::to_string(lo));
  }
}

CorrelationKernel::CorrelationKernel(Eigen::MatrixXd m) : m_(symmetrized(m)) {
  check_ground_size(static_cast<int>(m_.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError(
        "eigendecomposition failed during correlation kernel validation");
  }
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (!(lo > kCorrelationMargin) || !(hi < 1.0 - kCorrelationMargin)) {
    throw ValidationError(
        "correlation kernel spectrum must lie strictly inside (0,1); got [" +
        std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

CorrelationKernel l_to_k(const Kernel& L) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed in l_to_k");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  Eigen::VectorXd mapped =
      lam.array() / (1.0 + lam.array());  // in (0,1) for lam > 0
  Eigen::MatrixXd K =
      es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().transpose();
  return CorrelationKernel::trusted(0.5 * (K + K.transpose()));
}

Kernel k_to_l(const CorrelationKernel& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed in k_to_l");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  double lo = lam.minCoeff();
  double hi = lam.maxCoeff();
  if (!(lo > 0.0) || !(hi < 1.0)) {
    throw ValidationError("k_to_l needs spectrum inside (0,1); got [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  Eigen::VectorXd mapped = lam.array() / (1.0 - lam.array());
  Eigen::MatrixXd L =
      es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().transpose();
  return Kernel::trusted(0.5 * (L + L.transpose()));
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& M, Mask J) {
  std::vector<int> items = subset_items(J);
  int k = static_cast<int>(items.size());
  Eigen::MatrixXd out(k, k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) out(r, c) = M(items[r], items[c]);
  }
  return out;
}

void add_embedded(Eigen::MatrixXd& target, Mask J, const Eigen::MatrixXd& block,
                  double scale) {
  std::vector<int> items = subset_items(J);
  int k = static_cast<int>(items.size());
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      target(items[r], items[c]) += scale * block(r, c);
    }
  }
}

double principal_minor(const Eigen::MatrixXd& M, Mask J) {
  int k = subset_size(J);
  if (k == 0) return 1.0;
  if (k == 1) return M(std::countr_zero(J), std::countr_zero(J));
  return submatrix(M, J).determinant();
}

double log_det_spd(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw NumericError("Cholesky factorization failed (matrix not SPD)");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double PmfTable::total() const {
  KahanSum s;
  for (double x : p) s.add(x);
  return s.value();
}

double pmf(const Kernel& L, Mask J) {
  check_subset(J, L.size());
  double log_z = log_det_spd(Eigen::MatrixXd::Identity(L.size(), L.size()) +
                             L.matrix());
  return std::exp(log_det_spd(submatrix(L.matrix(), J)) - log_z);
}

PmfTable pmf_table(const Kernel& L) {
  int n = L.size();
  check_enumerable(n);
  double log_z =
      log_det_spd(Eigen::MatrixXd::Identity(n, n) + L.matrix());
  PmfTable t;
  t.n = n;
  t.p.resize(std::size_t{1} << n);
  for (Mask J = 0; J < t.p.size(); ++J) {
    t.p[J] = std::exp(log_det_spd(submatrix(L.matrix(), J)) - log_z);
  }
  return t;
}

double inclusion_prob(const Kernel& L, Mask J) {
  check_subset(J, L.size());
  if (J == 0) return 1.0;
  return principal_minor(l_to_k(L).matrix(), J);
}

double pmf_via_k(const CorrelationKernel& K, Mask J) {
  int n = K.size();
  check_subset(J, n);
  Eigen::MatrixXd M = K.matrix();
  for (int i = 0; i < n; ++i) {
    if ((J & (Mask{1} << i)) == 0) M(i, i) -= 1.0;
  }
  return std::abs(M.determinant());
}

Kernel random_kernel(int n, std::uint64_t seed, double ridge) {
  check_ground_size(n);
  StreamRng rng(seed, 0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = rng.next_normal();
  }
  Eigen::MatrixXd L = A * A.transpose() +
                      ridge * Eigen::MatrixXd::Identity(n, n);
  return Kernel(0.5 * (L + L.transpose()));
}

}  // namespace dpplab
