#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dpplab/experiments.hpp"
#include "dpplab/matrix_io.hpp"
#include "dpplab/rng.hpp"
#include "dpplab/sampler.hpp"

namespace {

using namespace dpplab;

Kernel load_kernel(const std::string& path) {
  return Kernel(load_matrix_json(path));
}

void apply_overrides(ExperimentConfig& cfg, const std::string& out_dir,
                     std::int64_t seed) {
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
}

int run_sample(const std::string& kernel_path, std::int64_t count,
               std::uint64_t seed, const std::string& method,
               const std::string& out) {
  Kernel L = load_kernel(kernel_path);
  SampleSet s = method == "exhaustive" ? sample_exhaustive(L, count, seed)
                                       : sample_spectral(L, count, seed);
  save_samples(out, s);
  std::printf("wrote %zu draws (n=%d, method=%s) to %s\n", s.draws.size(),
              s.n_items, method.c_str(), out.c_str());
  return 0;
}

int run_pmf(const std::string& kernel_path, const std::string& subset,
            const std::string& out) {
  Kernel L = load_kernel(kernel_path);
  if (!subset.empty()) {
    Mask J = subset_from_string(subset, L.size());
    std::printf("P[Z=%s] = %s\n", subset_to_string(J).c_str(),
                format_double(pmf(L, J)).c_str());
    return 0;
  }
  PmfTable t = pmf_table(L);
  if (!out.empty()) {
    save_pmf_csv(out, t);
    std::printf("wrote %zu probabilities to %s (total %s)\n", t.p.size(),
                out.c_str(), format_double(t.total()).c_str());
  } else {
    for (Mask J = 0; J < t.p.size(); ++J) {
      std::printf("%s %s\n", subset_to_string(J).c_str(),
                  format_double(t.p[J]).c_str());
    }
    std::printf("total %s\n", format_double(t.total()).c_str());
  }
  return 0;
}

int run_loglik(const std::string& kernel_path, const std::string& samples_path,
               const std::string& true_kernel_path) {
  Kernel L = load_kernel(kernel_path);
  if (!samples_path.empty()) {
    EmpiricalCounts c = empirical_counts(load_samples(samples_path));
    std::printf("empirical loglik = %s\n",
                format_double(empirical_loglik(c, L)).c_str());
  } else {
    Kernel truth = load_kernel(true_kernel_path);
    std::printf("expected loglik = %s\n",
                format_double(expected_loglik(truth, L)).c_str());
  }
  return 0;
}

int run_gradcheck(const std::string& true_kernel_path,
                  const std::string& kernel_path, std::uint64_t dir_seed,
                  double step) {
  Kernel truth = load_kernel(true_kernel_path);
  Kernel L = load_kernel(kernel_path);
  int n = L.size();

  // Order 1: full analytic gradient against entrywise finite differences.
  Eigen::MatrixXd g = gradient(truth, L);
  SymmetricBasis basis(n);
  double worst = 0.0;
  for (int a = 0; a < basis.dim; ++a) {
    Eigen::MatrixXd e = basis.element(a);
    double fd = fd_derivative_form(truth, L, e, 1, FdOptions{step, true});
    double an = (g.transpose() * e).trace();
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }
  std::printf("k=1 max relative gradient error = %s (|grad| = %s)\n",
              format_double(worst).c_str(), format_double(g.norm()).c_str());

  // Orders 2..4: directional along a seeded random unit direction.
  StreamRng rng(dir_seed, 0);
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) H(i, j) = H(j, i) = rng.next_normal();
  }
  H /= H.norm();
  for (int k = 2; k <= 4; ++k) {
    double an = derivative_form(truth, L, H, k);
    double fd = fd_derivative_form(truth, L, H, k, FdOptions{step, true});
    double rel = std::abs(fd - an) / std::max(1.0, std::abs(an));
    std::printf("k=%d analytic %s  fd %s  rel err %s\n", k,
                format_double(an).c_str(), format_double(fd).c_str(),
                format_double(rel).c_str());
  }
  return 0;
}

int run_hessian(const std::string& kernel_path, const std::string& at_path,
                const std::string& out) {
  Kernel L_star = load_kernel(kernel_path);
  HessianOperator h = at_path.empty()
                          ? hessian_operator(L_star)
                          : hessian_operator_at(L_star, load_kernel(at_path));
  Eigen::VectorXd eigs = h.eigenvalues();
  double scale = eigs.cwiseAbs().maxCoeff();
  int null_dim = 0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    if (std::abs(eigs[i]) < 1e-8 * std::max(scale, 1e-300)) ++null_dim;
  }
  std::string body = "{\n  \"dim\": " + std::to_string(eigs.size()) +
                     ",\n  \"null_dim\": " + std::to_string(null_dim) +
                     ",\n  \"eigenvalues\": [";
  for (Eigen::Index i = 0; i < eigs.size(); ++i) {
    body += (i ? ", " : "") + format_double(eigs[i]);
  }
  body += "]\n}\n";
  if (!out.empty()) {
    write_text_file(out, body);
    std::printf("wrote %s\n", out.c_str());
  } else {
    std::fputs(body.c_str(), stdout);
  }
  return 0;
}

int run_fit(const std::string& samples_path, const std::string& true_path,
            FitConfig fit_cfg, const std::string& out) {
  EmpiricalCounts c = empirical_counts(load_samples(samples_path));
  FitResult r = fit_mle(c, fit_cfg);
  std::string body = fit_result_to_json(r);
  if (!out.empty()) {
    write_text_file(out, body);
    std::printf("converged=%d loglik=%s grad_norm=%s -> %s\n",
                r.converged ? 1 : 0, format_double(r.loglik).c_str(),
                format_double(r.grad_norm).c_str(), out.c_str());
  } else {
    std::fputs(body.c_str(), stdout);
  }
  if (!true_path.empty()) {
    Kernel truth = load_kernel(true_path);
    std::printf("loss vs truth = %s\n",
                format_double(loss(Kernel::trusted(r.kernel), truth)).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dpplab: a numerical laboratory for discrete determinantal point "
      "processes"};
  app.set_version_flag("--version", std::string("dpplab ") + kVersion);
  app.require_subcommand(1);

  // sample
  std::string s_kernel, s_out = "samples.txt", s_method = "spectral";
  std::int64_t s_count = 1000;
  std::uint64_t s_seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Draw subsets from DPP(L)");
  sample_cmd->add_option("--kernel", s_kernel, "kernel JSON file")->required();
  sample_cmd->add_option("--count", s_count, "number of draws");
  sample_cmd->add_option("--seed", s_seed, "RNG seed");
  sample_cmd->add_option("--method", s_method, "spectral or exhaustive")
      ->check(CLI::IsMember({"spectral", "exhaustive"}));
  sample_cmd->add_option("--out", s_out, "output sample file");

  // pmf
  std::string p_kernel, p_subset, p_out;
  auto* pmf_cmd = app.add_subcommand("pmf", "Exact subset probabilities");
  pmf_cmd->add_option("--kernel", p_kernel, "kernel JSON file")->required();
  pmf_cmd->add_option("--subset", p_subset,
                      "single subset, e.g. \"{0,2}\" (default: full table)");
  pmf_cmd->add_option("--out", p_out, "write full table as CSV");

  // loglik
  std::string ll_kernel, ll_samples, ll_true;
  auto* ll_cmd = app.add_subcommand(
      "loglik", "Log-likelihood of a kernel against samples or a true kernel");
  ll_cmd->add_option("--kernel", ll_kernel, "kernel JSON file")->required();
  auto* ll_s = ll_cmd->add_option("--samples", ll_samples, "sample file");
  auto* ll_t =
      ll_cmd->add_option("--true-kernel", ll_true, "true kernel JSON file");
  ll_s->excludes(ll_t);

  // gradcheck
  std::string gc_true, gc_kernel;
  std::uint64_t gc_dir_seed = 0;
  double gc_step = 0.0;
  auto* gc_cmd = app.add_subcommand(
      "gradcheck", "Analytic derivatives vs central finite differences");
  gc_cmd->add_option("--true-kernel", gc_true, "true kernel JSON file")
      ->required();
  gc_cmd->add_option("--kernel", gc_kernel, "evaluation point JSON file")
      ->required();
  gc_cmd->add_option("--dir-seed", gc_dir_seed, "direction seed");
  gc_cmd->add_option("--step", gc_step, "step size (0 = per-order default)");

  // hessian
  std::string h_kernel, h_at, h_out;
  auto* h_cmd = app.add_subcommand(
      "hessian", "Spectrum of the expected log-likelihood Hessian");
  h_cmd->add_option("--kernel", h_kernel, "true kernel JSON file")->required();
  h_cmd->add_option("--at", h_at, "evaluate at this kernel instead of truth");
  h_cmd->add_option("--out", h_out, "write JSON report");

  // fit
  std::string f_samples, f_true, f_out;
  FitConfig f_cfg;
  auto* f_cmd = app.add_subcommand("fit", "Maximum likelihood estimation");
  f_cmd->add_option("--samples", f_samples, "sample file")->required();
  f_cmd->add_option("--restarts", f_cfg.restarts, "optimizer restarts");
  f_cmd->add_option("--max-iters", f_cfg.max_iters, "iteration cap");
  f_cmd->add_option("--grad-tol", f_cfg.grad_tol, "gradient norm tolerance");
  f_cmd->add_option("--seed", f_cfg.seed, "restart seed");
  f_cmd->add_option("--true-kernel", f_true, "report loss against this kernel");
  f_cmd->add_option("--out", f_out, "write fit JSON");

  // experiment commands: config file + overrides
  struct ExpArgs {
    std::string config;
    std::string out_dir;
    std::int64_t seed = -1;
  };
  ExpArgs rates_args, saddle_args, curv_args, conj_args;
  auto add_experiment = [&](const char* name, const char* desc,
                            ExpArgs& args) {
    auto* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--config", args.config, "experiment config JSON")
        ->required();
    cmd->add_option("--out-dir", args.out_dir, "override output directory");
    cmd->add_option("--seed", args.seed, "override master seed");
    return cmd;
  };
  auto* rates_cmd = add_experiment(
      "rates", "Monte Carlo convergence-rate study", rates_args);
  auto* saddles_cmd = add_experiment(
      "saddles", "Decoupling catalog: classify every partition", saddle_args);
  auto* curv_cmd = add_experiment(
      "curvature", "Tridiagonal curvature-decay sweep", curv_args);
  auto* conj_cmd = add_experiment(
      "conjecture", "Random-restart critical point sweep", conj_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample_cmd->parsed()) {
      return run_sample(s_kernel, s_count, s_seed, s_method, s_out);
    }
    if (pmf_cmd->parsed()) return run_pmf(p_kernel, p_subset, p_out);
    if (ll_cmd->parsed()) {
      if (ll_samples.empty() && ll_true.empty()) {
        std::fprintf(stderr, "loglik needs --samples or --true-kernel\n");
        return 1;
      }
      return run_loglik(ll_kernel, ll_samples, ll_true);
    }
    if (gc_cmd->parsed()) {
      return run_gradcheck(gc_true, gc_kernel, gc_dir_seed, gc_step);
    }
    if (h_cmd->parsed()) return run_hessian(h_kernel, h_at, h_out);
    if (f_cmd->parsed()) return run_fit(f_samples, f_true, f_cfg, f_out);

    if (rates_cmd->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::load(rates_args.config);
      apply_overrides(cfg, rates_args.out_dir, rates_args.seed);
      RateReport r = run_rate_experiment(cfg);
      std::printf("within-block slope %s (stderr %s)\n",
                  format_double(r.slope_within.slope).c_str(),
                  format_double(r.slope_within.slope_stderr).c_str());
      if (r.has_cross) {
        std::printf("cross-block slope %s (stderr %s)\n",
                    format_double(r.slope_cross.slope).c_str(),
                    format_double(r.slope_cross.slope_stderr).c_str());
      }
      return 0;
    }
    if (saddles_cmd->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::load(saddle_args.config);
      apply_overrides(cfg, saddle_args.out_dir, saddle_args.seed);
      SaddleReport r = run_saddle_experiment(cfg);
      std::printf("%zu partitions: %d max-orbit, %d saddles, %d degenerate, "
                  "%d inconclusive\n",
                  r.rows.size(), r.max_orbit, r.saddles, r.degenerate,
                  r.inconclusive);
      return 0;
    }
    if (curv_cmd->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::load(curv_args.config);
      apply_overrides(cfg, curv_args.out_dir, curv_args.seed);
      CurvatureReport r = run_curvature_experiment(cfg);
      std::printf("log(numeric_min) slope %s, R^2 %s\n",
                  format_double(r.fit.slope).c_str(),
                  format_double(r.fit.r_squared).c_str());
      return 0;
    }
    if (conj_cmd->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::load(conj_args.config);
      apply_overrides(cfg, conj_args.out_dir, conj_args.seed);
      ConjectureReport r = run_conjecture_sweep(cfg);
      std::printf("%d converged, %d unmatched -> %s\n", r.converged_count,
                  r.unmatched,
                  r.consistent ? "consistent with decoupling catalog"
                               : "UNMATCHED CRITICAL POINTS");
      return 0;
    }
  } catch (const dpplab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
