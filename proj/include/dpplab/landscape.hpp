#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dpplab/kernel.hpp"
#include "dpplab/structure.hpp"

namespace dpplab {

// Orthonormal basis of symmetric N x N matrices under the trace inner
// product: e_ii first (i ascending), then (e_ij + e_ji)/sqrt2 for i < j in
// lexicographic order. Dimension N(N+1)/2.
struct SymmetricBasis {
  explicit SymmetricBasis(int n);

  int n = 0;
  int dim = 0;
  std::vector<std::pair<int, int>> elems;  // (p, q) with p <= q

  Eigen::VectorXd coordinates(const Eigen::MatrixXd& H) const;
  Eigen::MatrixXd matrix(const Eigen::VectorXd& coords) const;
  Eigen::MatrixXd element(int a) const;
};

// d^2 Phi represented in the SymmetricBasis; also reused for its inverse
// (the asymptotic covariance), which has the same shape.
struct HessianOperator {
  int n = 0;
  Eigen::MatrixXd op;  // dim x dim, symmetric

  double quadratic_form(const Eigen::MatrixXd& H) const;
  Eigen::VectorXd eigenvalues() const;  // ascending
};

enum class Classification {
  GlobalMaxOrbit,
  Saddle,
  DegenerateMax,
  Inconclusive,
};
std::string to_string(Classification c);

struct CriticalPointReport {
  Eigen::MatrixXd kernel;
  double gradient_norm = 0.0;
  Eigen::VectorXd hessian_eigenvalues;  // ascending
  Classification classification = Classification::Inconclusive;
};

struct TridiagonalSpec {
  double a = 2.0;  // diagonal
  double b = 0.5;  // off-diagonal
  int n = 3;
};

struct CurvatureDecay {
  double closed_form = 0.0;
  double numeric_min = 0.0;
};

// Phi_{L*}(L) = sum_J p*_J log det(L_J) - log det(I + L).
double expected_loglik(const Kernel& L_star, const Kernel& L);

// Same objective through the correlation parametrization:
// sum_J p*_J log |det(K - I_{Jbar})|.
double expected_loglik_k(const Kernel& L_star, const CorrelationKernel& K);

// sum_J p*_J embed(L_J^{-1}) - (I+L)^{-1}; zero at L = L*.
Eigen::MatrixXd gradient(const Kernel& L_star, const Kernel& L);

// k-th directional derivative of Phi_{L*} at L along H, k in 1..4:
// (-1)^{k-1} (k-1)! (sum_J p*_J Tr((L_J^{-1}H_J)^k) - Tr(((I+L)^{-1}H)^k)).
double derivative_form(const Kernel& L_star, const Kernel& L,
                       const Eigen::MatrixXd& H, int k);

// -Var[Tr((L*_Z)^{-1} H_Z)] over the exact pmf (empty set contributes 0).
double hessian_quadratic_form(const Kernel& L_star, const Eigen::MatrixXd& H);

enum class HessianAssembly { Covariance, Polarization };

// d^2 Phi(L*) as an operator; Covariance assembles the score covariance
// directly, Polarization rebuilds it from the quadratic form (cross-check).
HessianOperator hessian_operator(
    const Kernel& L_star, HessianAssembly how = HessianAssembly::Covariance);

// d^2 Phi_{L*} at a general point L (p*_J frozen, matrices at L).
HessianOperator hessian_operator_at(const Kernel& L_star, const Kernel& L);

// d^4 Phi(L*)(H,H,H,H) for H in the Hessian null space:
// -3 Var[Tr(((L*_Z)^{-1} H_Z)^2)]. Zero iff H = 0.
double fourth_order_form(const Kernel& L_star, const Eigen::MatrixXd& H);

// Zero the cross-block entries of K* = l_to_k(L*) and convert back; a
// critical point of Phi_{L*} for every partition.
Kernel decoupling_kernel(const Kernel& L_star, const Partition& p);

CriticalPointReport classify_critical_point(const Kernel& L_star,
                                            const Kernel& L);

// max_i |K_ii - K*_ii|; requires L to be critical for Phi_{L*}.
double critical_diag_check(const Kernel& L_star, const Kernel& L);

Kernel tridiagonal_kernel(const TridiagonalSpec& spec);

// det of the tridiagonal kernel via u_k = a u_{k-1} - b^2 u_{k-2}.
double tridiagonal_det(const TridiagonalSpec& spec);

// closed_form: -d^2 Phi(L*)(H,H)/||H||_F^2 at H = e_1N + e_N1, equal to
// p(1-p) (2 b^{N-1}/u_N)^2 / 2 with p = pmf(L*, [N]).
// numeric_min: smallest eigenvalue of -hessian_operator(L*).
CurvatureDecay curvature_decay(const TridiagonalSpec& spec);

// (-d^2 Phi(L*))^{-1}; requires L* irreducible.
HessianOperator asymptotic_covariance(const Kernel& L_star);

struct FdOptions {
  double step = 0.0;       // 0 = per-order default
  bool richardson = true;  // one extrapolation level on the central stencil
};

// Finite-difference oracle for t -> Phi_{L*}(L + tH), order k in 1..4.
double fd_derivative_form(const Kernel& L_star, const Kernel& L,
                          const Eigen::MatrixXd& H, int k, FdOptions opt = {});

}  // namespace dpplab
