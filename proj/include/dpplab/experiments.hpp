#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dpplab/landscape.hpp"
#include "dpplab/mle.hpp"
#include "dpplab/stats.hpp"

namespace dpplab {

inline constexpr const char* kVersion = "0.1.0";

struct KernelSpec {
  enum class Type { Matrix, Tridiagonal, Random };
  Type type = Type::Random;
  Eigen::MatrixXd matrix;         // Type::Matrix
  TridiagonalSpec tridiagonal;    // Type::Tridiagonal
  int n = 3;                      // Type::Random
  std::uint64_t seed = 1;         // Type::Random
  double ridge = 1e-3;            // Type::Random

  Kernel build() const;
};

// One config file drives every experiment; unknown keys are rejected so
// typos fail loudly. Schema documented in the README.
struct ExperimentConfig {
  std::string experiment;  // rates | saddles | curvature | conjecture
  KernelSpec kernel;
  std::vector<std::int64_t> sample_sizes = {1000, 10000, 100000};
  int trials = 100;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty = compute only, write nothing
  FitConfig fit;
  int n_min = 3;           // curvature sweep range
  int n_max = 10;
  int sweep_restarts = 50;   // conjecture
  double match_tol = 1e-3;   // conjecture catalog matching
  int threads = 1;

  static ExperimentConfig load(const std::filesystem::path& path);
  void validate() const;
  std::string to_json_string() const;
};

struct RateRow {
  std::int64_t n = 0;
  int trial = 0;
  std::uint64_t trial_seed = 0;
  bool converged = false;
  double loss_total = 0.0;
  double loss_within = 0.0;
  double loss_cross = 0.0;
  double loglik_fit = 0.0;
  double loglik_truth = 0.0;  // Phi-hat at the true kernel, same data
  double grad_norm = 0.0;
};

struct RateMeans {
  std::int64_t n = 0;
  int used = 0;
  int excluded = 0;  // non-converged fits, kept out of the slope
  double mean_total = 0.0;
  double mean_within = 0.0;
  double mean_cross = 0.0;
};

struct RateReport {
  Partition partition;
  std::vector<RateRow> rows;
  std::vector<RateMeans> means;
  LineFit slope_total;
  LineFit slope_within;
  LineFit slope_cross;
  bool has_cross = false;
};

RateReport run_rate_experiment(const ExperimentConfig& cfg);

struct SaddleRow {
  Partition partition;
  double grad_norm = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  double diag_dev = 0.0;
  Classification classification = Classification::Inconclusive;
};

struct SaddleReport {
  std::vector<SaddleRow> rows;
  int saddles = 0;
  int max_orbit = 0;
  int degenerate = 0;
  int inconclusive = 0;
};

SaddleReport run_saddle_experiment(const ExperimentConfig& cfg);

struct CurvatureRow {
  int n = 0;
  CurvatureDecay decay;
};

struct CurvatureReport {
  std::vector<CurvatureRow> rows;
  LineFit fit;  // log(numeric_min) vs N
};

CurvatureReport run_curvature_experiment(const ExperimentConfig& cfg);

struct ConjectureRow {
  int restart = 0;
  std::uint64_t restart_seed = 0;
  bool converged = false;
  double loglik = 0.0;
  double grad_norm = 0.0;
  int matched_partition = -1;  // index into all_partitions(N), -1 = none
  double match_loss = 0.0;
  double diag_dev = 0.0;
};

struct ConjectureReport {
  std::vector<ConjectureRow> rows;
  int converged_count = 0;
  int unmatched = 0;  // converged points beyond match_tol of every decoupling
  bool consistent = false;
};

ConjectureReport run_conjecture_sweep(const ExperimentConfig& cfg);

// Orbit-aware loss restricted to the diagonal blocks of p (within) and to
// their complement (cross), each minimized over canonical signs.
std::pair<double, double> split_loss(const Eigen::MatrixXd& L_hat,
                                     const Eigen::MatrixXd& L_star,
                                     const Partition& p);

}  // namespace dpplab
