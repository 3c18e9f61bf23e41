#include "dpplab/mle.hpp"

#include <cmath>
#include <limits>

#include "dpplab/rng.hpp"
#include "dpplab/stats.hpp"
#include "json.hpp"

namespace dpplab {

double EmpiricalCounts::frequency(Mask J) const {
  auto it = counts.find(J);
  if (it == counts.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(n_samples);
}

EmpiricalCounts empirical_counts(const SampleSet& s) {
  if (s.draws.empty()) {
    throw ValidationError("empirical counts need a nonempty sample");
  }
  EmpiricalCounts c;
  c.n_items = s.n_items;
  c.n_samples = static_cast<std::int64_t>(s.draws.size());
  for (Mask draw : s.draws) {
    check_subset(draw, s.n_items);
    ++c.counts[draw];
  }
  return c;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct WeightedSubsets {
  int n = 0;
  std::vector<std::pair<Mask, double>> items;  // (subset, weight)
};

WeightedSubsets from_counts(const EmpiricalCounts& c) {
  WeightedSubsets w;
  w.n = c.n_items;
  w.items.reserve(c.counts.size());
  for (const auto& [J, cnt] : c.counts) {
    w.items.emplace_back(
        J, static_cast<double>(cnt) / static_cast<double>(c.n_samples));
  }
  return w;
}

WeightedSubsets from_pmf(const PmfTable& t) {
  WeightedSubsets w;
  w.n = t.n;
  w.items.reserve(t.p.size());
  for (Mask J = 0; J < t.p.size(); ++J) w.items.emplace_back(J, t.p[J]);
  return w;
}

// -inf when M leaves the SPD cone; the line search backs off on that.
double objective(const WeightedSubsets& w, const Eigen::MatrixXd& M) {
  KahanSum acc;
  for (const auto& [J, weight] : w.items) {
    if (J == 0) continue;
    Eigen::MatrixXd sub = submatrix(M, J);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) return kNegInf;
    acc.add(weight * 2.0 *
            llt.matrixL().toDenseMatrix().diagonal().array().log().sum());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(
      Eigen::MatrixXd(Eigen::MatrixXd::Identity(M.rows(), M.rows()) + M));
  if (llt.info() != Eigen::Success) return kNegInf;
  return acc.value() -
         2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd objective_grad(const WeightedSubsets& w,
                               const Eigen::MatrixXd& M) {
  int n = static_cast<int>(M.rows());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [J, weight] : w.items) {
    if (J == 0) continue;
    Eigen::MatrixXd sub = submatrix(M, J);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) {
      throw NumericError("observed principal submatrix is not SPD");
    }
    add_embedded(g, J,
                 llt.solve(Eigen::MatrixXd::Identity(sub.rows(), sub.rows())),
                 weight);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(
      Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n) + M));
  if (llt.info() != Eigen::Success) {
    throw NumericError("I + L is not SPD");
  }
  g -= llt.solve(Eigen::MatrixXd::Identity(n, n));
  return g;
}

// Divided difference of exp on the eigenvalue pair; the chain rule through
// L = exp(S) is G_S = U (DD o (U^T G_L U)) U^T.
double exp_divided_difference(double x, double y) {
  double scale = std::max({std::abs(x), std::abs(y), 1.0});
  if (std::abs(x - y) < 1e-10 * scale) return std::exp(0.5 * (x + y));
  return (std::exp(x) - std::exp(y)) / (x - y);
}

struct RestartOutcome {
  Eigen::MatrixXd L;
  double loglik = kNegInf;
  double grad_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

RestartOutcome run_restart(const WeightedSubsets& w, const FitConfig& cfg,
                           const Eigen::MatrixXd& S0) {
  int n = w.n;
  Eigen::MatrixXd S = S0;
  RestartOutcome out;
  double step = 1.0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    out.iterations = iter + 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) {
      throw NumericError("eigendecomposition of S failed in the optimizer");
    }
    const Eigen::MatrixXd& U = es.eigenvectors();
    Eigen::VectorXd lam = es.eigenvalues();
    Eigen::MatrixXd L =
        U * lam.array().exp().matrix().asDiagonal() * U.transpose();
    L = 0.5 * (L + L.transpose());

    double phi = objective(w, L);
    Eigen::MatrixXd g_l = objective_grad(w, L);
    out.L = L;
    out.loglik = phi;
    out.grad_norm = g_l.norm();
    if (out.grad_norm <= cfg.grad_tol) {
      out.converged = true;
      return out;
    }

    Eigen::MatrixXd core = U.transpose() * g_l * U;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        core(i, j) *= exp_divided_difference(lam[i], lam[j]);
      }
    }
    Eigen::MatrixXd g_s = U * core * U.transpose();
    g_s = 0.5 * (g_s + g_s.transpose());
    double g_s_sq = g_s.squaredNorm();

    step = std::min(step * 2.0, 1e4);
    bool accepted = false;
    while (step >= 1e-16) {
      Eigen::MatrixXd S_try = S + step * g_s;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_try(S_try);
      if (es_try.info() == Eigen::Success) {
        Eigen::MatrixXd L_try = es_try.eigenvectors() *
                                es_try.eigenvalues().array().exp().matrix().asDiagonal() *
                                es_try.eigenvectors().transpose();
        double phi_try = objective(w, Eigen::MatrixXd(0.5 * (L_try + L_try.transpose())));
        if (phi_try >= phi + cfg.armijo * step * g_s_sq) {
          S = S_try;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) return out;  // line search stagnated below machine scale
  }
  return out;
}

FitResult maximize(const WeightedSubsets& w, const FitConfig& cfg) {
  if (cfg.restarts < 1) throw ValidationError("restarts must be >= 1");
  if (!(cfg.grad_tol > 0.0)) throw ValidationError("grad_tol must be > 0");
  check_enumerable(w.n);

  int n = w.n;
  FitResult result;
  for (int r = 0; r < cfg.restarts; ++r) {
    Eigen::MatrixXd S0 = Eigen::MatrixXd::Zero(n, n);
    if (r > 0) {
      StreamRng rng(cfg.seed, static_cast<std::uint64_t>(r));
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          S0(i, j) = S0(j, i) = cfg.init_scale * rng.next_normal();
        }
      }
    }
    RestartOutcome outcome = run_restart(w, cfg, S0);
    RestartTrace trace;
    trace.restart = r;
    trace.loglik = outcome.loglik;
    trace.grad_norm = outcome.grad_norm;
    trace.iterations = outcome.iterations;
    trace.converged = outcome.converged;
    result.restarts.push_back(trace);

    if (result.restarts.size() == 1 || outcome.loglik > result.loglik) {
      result.kernel = outcome.L;
      result.loglik = outcome.loglik;
      result.grad_norm = outcome.grad_norm;
      result.converged = outcome.converged;
      result.best_restart = r;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(result.kernel,
                                                    Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  result.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return result;
}

}  // namespace

double empirical_loglik(const EmpiricalCounts& c, const Kernel& L) {
  if (c.n_items != L.size()) {
    throw ValidationError("counts and kernel differ in ground size");
  }
  return objective(from_counts(c), L.matrix());
}

Eigen::MatrixXd empirical_grad(const EmpiricalCounts& c, const Kernel& L) {
  if (c.n_items != L.size()) {
    throw ValidationError("counts and kernel differ in ground size");
  }
  return objective_grad(from_counts(c), L.matrix());
}

Eigen::VectorXd moment_diag(const EmpiricalCounts& c) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(c.n_items);
  for (const auto& [J, cnt] : c.counts) {
    for (int i : subset_items(J)) f[i] += static_cast<double>(cnt);
  }
  return f / static_cast<double>(c.n_samples);
}

FitResult fit_mle(const EmpiricalCounts& c, const FitConfig& cfg) {
  FitResult r = maximize(from_counts(c), cfg);
  r.empty_set_observed = c.counts.count(0) > 0;
  return r;
}

FitResult fit_expected(const Kernel& L_star, const FitConfig& cfg) {
  return maximize(from_pmf(pmf_table(L_star)), cfg);
}

FitResult fit_expected_from(const Kernel& L_star, const Eigen::MatrixXd& S0,
                            const FitConfig& cfg) {
  WeightedSubsets w = from_pmf(pmf_table(L_star));
  RestartOutcome outcome = run_restart(w, cfg, symmetrized(S0));
  FitResult result;
  result.kernel = outcome.L;
  result.loglik = outcome.loglik;
  result.grad_norm = outcome.grad_norm;
  result.converged = outcome.converged;
  RestartTrace trace;
  trace.loglik = outcome.loglik;
  trace.grad_norm = outcome.grad_norm;
  trace.iterations = outcome.iterations;
  trace.converged = outcome.converged;
  result.restarts.push_back(trace);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(result.kernel,
                                                    Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  result.condition = lo > 0.0 ? es.eigenvalues().maxCoeff() / lo
                              : std::numeric_limits<double>::infinity();
  return result;
}

std::string fit_result_to_json(const FitResult& r) {
  nlohmann::json j;
  j["n"] = static_cast<int>(r.kernel.rows());
  std::vector<double> data;
  for (Eigen::Index i = 0; i < r.kernel.rows(); ++i) {
    for (Eigen::Index k = 0; k < r.kernel.cols(); ++k) {
      data.push_back(r.kernel(i, k));
    }
  }
  j["kernel"] = {{"n", static_cast<int>(r.kernel.rows())}, {"data", data}};
  j["loglik"] = r.loglik;
  j["grad_norm"] = r.grad_norm;
  j["converged"] = r.converged;
  j["best_restart"] = r.best_restart;
  j["condition"] = r.condition;
  j["empty_set_observed"] = r.empty_set_observed;
  j["restarts"] = nlohmann::json::array();
  for (const RestartTrace& t : r.restarts) {
    j["restarts"].push_back({{"restart", t.restart},
                             {"loglik", t.loglik},
                             {"grad_norm", t.grad_norm},
                             {"iterations", t.iterations},
                             {"converged", t.converged}});
  }
  return j.dump(2) + "\n";
}

}  // namespace dpplab
