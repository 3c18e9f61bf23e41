#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dpplab/kernel.hpp"
#include "dpplab/sampler.hpp"

namespace dpplab {

struct EmpiricalCounts {
  int n_items = 0;
  std::int64_t n_samples = 0;
  std::map<Mask, std::int64_t> counts;

  // count/n_samples, exactly; 0 for unobserved subsets.
  double frequency(Mask J) const;
};

EmpiricalCounts empirical_counts(const SampleSet& s);

// Phi-hat(L) = sum over observed J of p-hat_J log det(L_J) - log det(I+L).
double empirical_loglik(const EmpiricalCounts& c, const Kernel& L);

// sum over observed J of p-hat_J embed(L_J^{-1}) - (I+L)^{-1}.
Eigen::MatrixXd empirical_grad(const EmpiricalCounts& c, const Kernel& L);

// Method-of-moments diagonal: per-item empirical inclusion frequency.
Eigen::VectorXd moment_diag(const EmpiricalCounts& c);

struct FitConfig {
  int restarts = 4;
  int max_iters = 5000;
  double grad_tol = 1e-7;   // on ||empirical_grad||_F
  double armijo = 1e-4;
  double init_scale = 0.5;  // stddev of random restart entries of S
  std::uint64_t seed = 0;
};

struct RestartTrace {
  int restart = 0;
  double loglik = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitResult {
  Eigen::MatrixXd kernel;  // best restart's L = exp(S)
  double loglik = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  int best_restart = 0;
  double condition = 0.0;  // spectral condition number of the fitted kernel
  bool empty_set_observed = true;
  std::vector<RestartTrace> restarts;
};

// Multi-restart gradient ascent over L = exp(S), S symmetric; backtracking
// line search keeps Phi-hat non-decreasing within each restart.
FitResult fit_mle(const EmpiricalCounts& c, const FitConfig& cfg);

// Same optimizer on the population objective Phi_{L*} (weights = exact pmf).
FitResult fit_expected(const Kernel& L_star, const FitConfig& cfg);

// Single ascent from the explicit start L = exp(S0) on the population
// objective; cfg.restarts is ignored. Used by the conjecture sweep.
FitResult fit_expected_from(const Kernel& L_star, const Eigen::MatrixXd& S0,
                            const FitConfig& cfg);

std::string fit_result_to_json(const FitResult& r);

}  // namespace dpplab
