#include "dpplab/landscape.hpp"

#include <cmath>

#include "dpplab/stats.hpp"

namespace dpplab {

SymmetricBasis::SymmetricBasis(int n_) : n(n_), dim(n_ * (n_ + 1) / 2) {
  check_ground_size(n);
  elems.reserve(static_cast<std::size_t>(dim));
  for (int i = 0; i < n; ++i) elems.emplace_back(i, i);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) elems.emplace_back(i, j);
  }
}

Eigen::VectorXd SymmetricBasis::coordinates(const Eigen::MatrixXd& H) const {
  if (H.rows() != n || H.cols() != n) {
    throw ValidationError("direction has wrong dimensions for basis");
  }
  Eigen::VectorXd c(dim);
  constexpr double root2 = 1.4142135623730950488;
  for (int a = 0; a < dim; ++a) {
    auto [p, q] = elems[static_cast<std::size_t>(a)];
    c[a] = p == q ? H(p, p) : root2 * H(p, q);
  }
  return c;
}

Eigen::MatrixXd SymmetricBasis::matrix(const Eigen::VectorXd& coords) const {
  if (coords.size() != dim) {
    throw ValidationError("coordinate vector has wrong length for basis");
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  constexpr double inv_root2 = 0.70710678118654752440;
  for (int a = 0; a < dim; ++a) {
    auto [p, q] = elems[static_cast<std::size_t>(a)];
    if (p == q) {
      H(p, p) = coords[a];
    } else {
      H(p, q) = H(q, p) = inv_root2 * coords[a];
    }
  }
  return H;
}

Eigen::MatrixXd SymmetricBasis::element(int a) const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  c[a] = 1.0;
  return matrix(c);
}

double HessianOperator::quadratic_form(const Eigen::MatrixXd& H) const {
  SymmetricBasis basis(n);
  Eigen::VectorXd c = basis.coordinates(H);
  return c.dot(op * c);
}

Eigen::VectorXd HessianOperator::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("Hessian operator eigendecomposition failed");
  }
  return es.eigenvalues();
}

namespace {

// Phi on a raw matrix argument; NumericError if M leaves the SPD cone.
double phi_matrix(const PmfTable& star, const Eigen::MatrixXd& M) {
  int n = star.n;
  KahanSum acc;
  for (Mask J = 1; J < star.p.size(); ++J) {
    acc.add(star.p[J] * log_det_spd(submatrix(M, J)));
  }
  double log_z = log_det_spd(Eigen::MatrixXd::Identity(n, n) + M);
  return acc.value() - log_z;
}

// embed(M_J^{-1}) over all J, weighted by star probabilities.
Eigen::MatrixXd weighted_inverse_sum(const PmfTable& star,
                                     const Eigen::MatrixXd& M) {
  int n = star.n;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Mask J = 1; J < star.p.size(); ++J) {
    Eigen::MatrixXd sub = submatrix(M, J);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) {
      throw NumericError("principal submatrix not SPD in gradient sum");
    }
    add_embedded(out, J,
                 llt.solve(Eigen::MatrixXd::Identity(sub.rows(), sub.rows())),
                 star.p[J]);
  }
  return out;
}

double trace_power(const Eigen::MatrixXd& X, int k) {
  switch (k) {
    case 1:
      return X.trace();
    case 2:
      return (X * X).trace();
    case 3:
      return (X * X * X).trace();
    case 4: {
      Eigen::MatrixXd X2 = X * X;
      return (X2 * X2).trace();
    }
    default:
      throw ValidationError("trace power order must be in 1..4");
  }
}

// Tr((M_J^{-1} H_J)^k); the empty subset contributes 0.
double subset_trace_stat(const Eigen::MatrixXd& M, const Eigen::MatrixXd& H,
                         Mask J, int k) {
  if (J == 0) return 0.0;
  Eigen::MatrixXd sub = submatrix(M, J);
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) {
    throw NumericError("principal submatrix not SPD in trace statistic");
  }
  return trace_power(llt.solve(submatrix(H, J)), k);
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& M) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw NumericError("matrix not SPD in inverse");
  }
  return llt.solve(Eigen::MatrixXd::Identity(M.rows(), M.rows()));
}

// Tr(M E_a M E_b) for symmetric M and orthonormal basis elements indexed by
// (p,q) and (r,s): with E = c (e_pq + e_qp), the value is
// 2 c_a c_b (M_qr M_ps + M_qs M_pr).
double basis_pair_trace(const Eigen::MatrixXd& M, int p, int q, int r, int s) {
  double c = (p == q ? 0.5 : 0.70710678118654752440) *
             (r == s ? 0.5 : 0.70710678118654752440);
  return 2.0 * c * (M(q, r) * M(p, s) + M(q, s) * M(p, r));
}

}  // namespace

double expected_loglik(const Kernel& L_star, const Kernel& L) {
  if (L_star.size() != L.size()) {
    throw ValidationError("kernels differ in size");
  }
  return phi_matrix(pmf_table(L_star), L.matrix());
}

double expected_loglik_k(const Kernel& L_star, const CorrelationKernel& K) {
  if (L_star.size() != K.size()) {
    throw ValidationError("kernels differ in size");
  }
  PmfTable star = pmf_table(L_star);
  int n = star.n;
  KahanSum acc;
  for (Mask J = 0; J < star.p.size(); ++J) {
    Eigen::MatrixXd M = K.matrix();
    for (int i = 0; i < n; ++i) {
      if ((J & (Mask{1} << i)) == 0) M(i, i) -= 1.0;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    double log_abs = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = std::abs(lu.matrixLU()(i, i));
      if (d == 0.0) throw NumericError("singular K - I_Jbar matrix");
      log_abs += std::log(d);
    }
    acc.add(star.p[J] * log_abs);
  }
  return acc.value();
}

Eigen::MatrixXd gradient(const Kernel& L_star, const Kernel& L) {
  if (L_star.size() != L.size()) {
    throw ValidationError("kernels differ in size");
  }
  int n = L.size();
  PmfTable star = pmf_table(L_star);
  return weighted_inverse_sum(star, L.matrix()) -
         inverse_spd(Eigen::MatrixXd::Identity(n, n) + L.matrix());
}

double derivative_form(const Kernel& L_star, const Kernel& L,
                       const Eigen::MatrixXd& H, int k) {
  if (k < 1 || k > 4) throw ValidationError("derivative order must be in 1..4");
  if (L_star.size() != L.size() || H.rows() != L.size() ||
      H.cols() != L.size()) {
    throw ValidationError("size mismatch in derivative_form");
  }
  int n = L.size();
  PmfTable star = pmf_table(L_star);
  KahanSum acc;
  for (Mask J = 1; J < star.p.size(); ++J) {
    acc.add(star.p[J] * subset_trace_stat(L.matrix(), H, J, k));
  }
  Eigen::MatrixXd W =
      inverse_spd(Eigen::MatrixXd::Identity(n, n) + L.matrix());
  double full_term = trace_power(Eigen::MatrixXd(W * H), k);
  double factorial = k == 4 ? 6.0 : (k == 3 ? 2.0 : 1.0);
  double sign = (k % 2 == 1) ? 1.0 : -1.0;
  return sign * factorial * (acc.value() - full_term);
}

double hessian_quadratic_form(const Kernel& L_star, const Eigen::MatrixXd& H) {
  if (H.rows() != L_star.size() || H.cols() != L_star.size()) {
    throw ValidationError("size mismatch in hessian_quadratic_form");
  }
  PmfTable star = pmf_table(L_star);
  KahanSum m1, m2;
  for (Mask J = 0; J < star.p.size(); ++J) {
    double t = subset_trace_stat(L_star.matrix(), H, J, 1);
    m1.add(star.p[J] * t);
    m2.add(star.p[J] * t * t);
  }
  double mu = m1.value();
  return -(m2.value() - mu * mu);
}

HessianOperator hessian_operator(const Kernel& L_star, HessianAssembly how) {
  int n = L_star.size();
  SymmetricBasis basis(n);
  HessianOperator out;
  out.n = n;

  if (how == HessianAssembly::Polarization) {
    // B(E_a, E_b) = (q(E_a + E_b) - q(E_a) - q(E_b)) / 2
    Eigen::VectorXd diag_q(basis.dim);
    for (int a = 0; a < basis.dim; ++a) {
      diag_q[a] = hessian_quadratic_form(L_star, basis.element(a));
    }
    out.op.resize(basis.dim, basis.dim);
    for (int a = 0; a < basis.dim; ++a) {
      out.op(a, a) = diag_q[a];
      for (int b = a + 1; b < basis.dim; ++b) {
        double q_ab = hessian_quadratic_form(
            L_star, basis.element(a) + basis.element(b));
        out.op(a, b) = out.op(b, a) = 0.5 * (q_ab - diag_q[a] - diag_q[b]);
      }
    }
    return out;
  }

  // Covariance form: v_J[a] = Tr(embed(L*_J^{-1}) E_a); the operator is
  // -(E[v v^T] - E[v] E[v]^T).
  PmfTable star = pmf_table(L_star);
  Eigen::VectorXd mean_v = Eigen::VectorXd::Zero(basis.dim);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(basis.dim, basis.dim);
  constexpr double root2 = 1.4142135623730950488;
  for (Mask J = 1; J < star.p.size(); ++J) {
    Eigen::MatrixXd inv_j = Eigen::MatrixXd::Zero(n, n);
    add_embedded(inv_j, J, inverse_spd(submatrix(L_star.matrix(), J)));
    Eigen::VectorXd v(basis.dim);
    for (int a = 0; a < basis.dim; ++a) {
      auto [p, q] = basis.elems[static_cast<std::size_t>(a)];
      v[a] = p == q ? inv_j(p, p) : root2 * inv_j(p, q);
    }
    mean_v += star.p[J] * v;
    second += star.p[J] * (v * v.transpose());
  }
  out.op = -(second - mean_v * mean_v.transpose());
  out.op = 0.5 * (out.op + out.op.transpose());
  return out;
}

HessianOperator hessian_operator_at(const Kernel& L_star, const Kernel& L) {
  if (L_star.size() != L.size()) {
    throw ValidationError("kernels differ in size");
  }
  int n = L.size();
  SymmetricBasis basis(n);
  PmfTable star = pmf_table(L_star);

  // B = -(sum_J p*_J G(embed(L_J^{-1})) - G((I+L)^{-1})) where
  // G(M)_ab = Tr(M E_a M E_b).
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(basis.dim, basis.dim);
  auto add_term = [&](const Eigen::MatrixXd& M, double w) {
    for (int a = 0; a < basis.dim; ++a) {
      auto [p, q] = basis.elems[static_cast<std::size_t>(a)];
      for (int b = a; b < basis.dim; ++b) {
        auto [r, s] = basis.elems[static_cast<std::size_t>(b)];
        double t = w * basis_pair_trace(M, p, q, r, s);
        acc(a, b) += t;
        if (b != a) acc(b, a) += t;
      }
    }
  };
  for (Mask J = 1; J < star.p.size(); ++J) {
    Eigen::MatrixXd inv_j = Eigen::MatrixXd::Zero(n, n);
    add_embedded(inv_j, J, inverse_spd(submatrix(L.matrix(), J)));
    add_term(inv_j, star.p[J]);
  }
  add_term(inverse_spd(Eigen::MatrixXd::Identity(n, n) + L.matrix()), -1.0);

  HessianOperator out;
  out.n = n;
  out.op = -acc;
  return out;
}

double fourth_order_form(const Kernel& L_star, const Eigen::MatrixXd& H) {
  if (!in_null_space(H, L_star, 1e-10)) {
    throw ValidationError(
        "fourth_order_form needs a direction in the Hessian null space");
  }
  PmfTable star = pmf_table(L_star);
  KahanSum m1, m2;
  for (Mask J = 0; J < star.p.size(); ++J) {
    double t = subset_trace_stat(L_star.matrix(), H, J, 2);
    m1.add(star.p[J] * t);
    m2.add(star.p[J] * t * t);
  }
  double mu = m1.value();
  return -3.0 * (m2.value() - mu * mu);
}

Kernel decoupling_kernel(const Kernel& L_star, const Partition& p) {
  if (p.n != L_star.size()) {
    throw ValidationError("partition does not match kernel size");
  }
  Eigen::MatrixXd K = l_to_k(L_star).matrix();
  int n = p.n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p.block_of(i) != p.block_of(j)) K(i, j) = 0.0;
    }
  }
  return k_to_l(CorrelationKernel(K));
}

CriticalPointReport classify_critical_point(const Kernel& L_star,
                                            const Kernel& L) {
  CriticalPointReport rep;
  rep.kernel = L.matrix();
  rep.gradient_norm = gradient(L_star, L).norm();
  rep.hessian_eigenvalues = hessian_operator_at(L_star, L).eigenvalues();

  double g_tol = 1e-7 * (1.0 + L.matrix().norm());
  double eig_scale = rep.hessian_eigenvalues.cwiseAbs().maxCoeff();
  double e_tol = 1e-8 * std::max(eig_scale, 1e-300);

  if (loss(L, L_star) < g_tol) {
    rep.classification = Classification::GlobalMaxOrbit;
    return rep;
  }
  if (rep.gradient_norm >= g_tol) {
    rep.classification = Classification::Inconclusive;
    return rep;
  }
  bool has_pos = (rep.hessian_eigenvalues.array() > e_tol).any();
  bool has_neg = (rep.hessian_eigenvalues.array() < -e_tol).any();
  bool has_null = (rep.hessian_eigenvalues.array().abs() <= e_tol).any();
  if (has_pos && has_neg) {
    rep.classification = Classification::Saddle;
  } else if (!has_pos && has_null) {
    rep.classification = Classification::DegenerateMax;
  } else {
    rep.classification = Classification::Inconclusive;
  }
  return rep;
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::GlobalMaxOrbit:
      return "global-max-orbit";
    case Classification::Saddle:
      return "saddle";
    case Classification::DegenerateMax:
      return "degenerate-max";
    case Classification::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

double critical_diag_check(const Kernel& L_star, const Kernel& L) {
  double gn = gradient(L_star, L).norm();
  double g_tol = 1e-7 * (1.0 + L.matrix().norm());
  if (gn >= g_tol) {
    throw ValidationError("critical_diag_check: gradient norm " +
                          std::to_string(gn) + " is not critical");
  }
  Eigen::VectorXd d_star = l_to_k(L_star).matrix().diagonal();
  Eigen::VectorXd d = l_to_k(L).matrix().diagonal();
  return (d - d_star).cwiseAbs().maxCoeff();
}

Kernel tridiagonal_kernel(const TridiagonalSpec& spec) {
  check_ground_size(spec.n);
  if (!(spec.a > 0.0) || !(spec.a * spec.a > 4.0 * spec.b * spec.b)) {
    throw ValidationError("tridiagonal spec needs a > 0 and a^2 > 4 b^2");
  }
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(spec.n, spec.n);
  for (int i = 0; i < spec.n; ++i) {
    L(i, i) = spec.a;
    if (i + 1 < spec.n) L(i, i + 1) = L(i + 1, i) = spec.b;
  }
  return Kernel(L);
}

double tridiagonal_det(const TridiagonalSpec& spec) {
  double prev = 1.0;     // u_0
  double cur = spec.a;   // u_1
  for (int k = 2; k <= spec.n; ++k) {
    double next = spec.a * cur - spec.b * spec.b * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

CurvatureDecay curvature_decay(const TridiagonalSpec& spec) {
  if (spec.n < 2) {
    throw ValidationError("curvature decay needs n >= 2");
  }
  check_enumerable(spec.n);
  Kernel L = tridiagonal_kernel(spec);
  double p = pmf(L, full_mask(spec.n));
  double t = 2.0 * std::pow(spec.b, spec.n - 1) / tridiagonal_det(spec);
  CurvatureDecay out;
  out.closed_form = 0.5 * p * (1.0 - p) * t * t;
  out.numeric_min = -hessian_operator(L).eigenvalues().maxCoeff();
  return out;
}

HessianOperator asymptotic_covariance(const Kernel& L_star) {
  if (blocks(L_star).size() != 1) {
    throw ValidationError(
        "asymptotic covariance needs an irreducible kernel (singular Hessian "
        "otherwise)");
  }
  HessianOperator hess = hessian_operator(L_star);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-hess.op);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed in asymptotic_covariance");
  }
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw NumericError("negative Hessian is numerically singular");
  }
  HessianOperator out;
  out.n = L_star.size();
  out.op = es.eigenvectors() *
           es.eigenvalues().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
  out.op = 0.5 * (out.op + out.op.transpose());
  return out;
}

double fd_derivative_form(const Kernel& L_star, const Kernel& L,
                          const Eigen::MatrixXd& H, int k, FdOptions opt) {
  if (k < 1 || k > 4) throw ValidationError("fd order must be in 1..4");
  PmfTable star = pmf_table(L_star);
  Eigen::MatrixXd H_sym = symmetrized(H);

  double h = opt.step;
  if (h == 0.0) {
    constexpr double defaults[] = {1e-4, 2e-3, 2e-2, 5e-2};
    h = defaults[k - 1];
  }
  // Keep every stencil point inside the SPD cone with a margin.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.matrix(),
                                                    Eigen::EigenvaluesOnly);
  double lam_min = es.eigenvalues().minCoeff();
  double h_norm = H_sym.operatorNorm();
  if (h_norm > 0.0) {
    double h_max = 0.25 * lam_min / h_norm / 2.0;  // widest stencil uses 2h
    h = std::min(h, h_max);
  }

  auto f = [&](double t) {
    return phi_matrix(star, Eigen::MatrixXd(L.matrix() + t * H_sym));
  };
  auto stencil = [&](double s) {
    switch (k) {
      case 1:
        return (f(s) - f(-s)) / (2.0 * s);
      case 2:
        return (f(s) - 2.0 * f(0.0) + f(-s)) / (s * s);
      case 3:
        return (f(2.0 * s) - 2.0 * f(s) + 2.0 * f(-s) - f(-2.0 * s)) /
               (2.0 * s * s * s);
      default:
        return (f(2.0 * s) - 4.0 * f(s) + 6.0 * f(0.0) - 4.0 * f(-s) +
                f(-2.0 * s)) /
               (s * s * s * s);
    }
  };
  if (!opt.richardson) return stencil(h);
  // Central stencils have O(h^2) error; one Richardson level removes it.
  return (4.0 * stencil(0.5 * h) - stencil(h)) / 3.0;
}

}  // namespace dpplab
