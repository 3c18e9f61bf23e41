#include "dpplab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "dpplab/matrix_io.hpp"
#include "dpplab/rng.hpp"
#include "json.hpp"

namespace dpplab {

namespace {

using nlohmann::json;

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count);  // drain remaining work
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  std::size_t n_workers = std::min<std::size_t>(
      static_cast<std::size_t>(threads), count);
  pool.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

json kernel_spec_to_json(const KernelSpec& spec) {
  json j;
  switch (spec.type) {
    case KernelSpec::Type::Matrix: {
      j["type"] = "matrix";
      j["n"] = static_cast<int>(spec.matrix.rows());
      std::vector<double> data;
      for (Eigen::Index r = 0; r < spec.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < spec.matrix.cols(); ++c) {
          data.push_back(spec.matrix(r, c));
        }
      }
      j["data"] = data;
      break;
    }
    case KernelSpec::Type::Tridiagonal:
      j["type"] = "tridiagonal";
      j["a"] = spec.tridiagonal.a;
      j["b"] = spec.tridiagonal.b;
      j["n"] = spec.tridiagonal.n;
      break;
    case KernelSpec::Type::Random:
      j["type"] = "random";
      j["n"] = spec.n;
      j["seed"] = spec.seed;
      j["ridge"] = spec.ridge;
      break;
  }
  return j;
}

void reject_unknown_keys(const json& j, std::vector<std::string> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw IoError("unknown key \"" + key + "\" in " + where);
    }
  }
}

KernelSpec kernel_spec_from_json(const json& j,
                                 const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("type")) {
    throw IoError("kernel spec must be an object with a \"type\"");
  }
  std::string type = j.at("type").get<std::string>();
  KernelSpec spec;
  if (type == "matrix") {
    reject_unknown_keys(j, {"type", "n", "data", "path"}, "kernel spec");
    spec.type = KernelSpec::Type::Matrix;
    if (j.contains("path")) {
      std::filesystem::path p = j.at("path").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      spec.matrix = load_matrix_json(p);
    } else {
      int n = j.at("n").get<int>();
      const auto& data = j.at("data");
      if (!data.is_array() || data.size() != static_cast<std::size_t>(n) *
                                                 static_cast<std::size_t>(n)) {
        throw IoError("kernel spec \"data\" must hold n*n numbers");
      }
      spec.matrix.resize(n, n);
      std::size_t idx = 0;
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          spec.matrix(r, c) = data.at(idx++).get<double>();
        }
      }
      spec.matrix = symmetrized(spec.matrix);
    }
  } else if (type == "tridiagonal") {
    reject_unknown_keys(j, {"type", "a", "b", "n"}, "kernel spec");
    spec.type = KernelSpec::Type::Tridiagonal;
    spec.tridiagonal.a = j.at("a").get<double>();
    spec.tridiagonal.b = j.at("b").get<double>();
    spec.tridiagonal.n = j.at("n").get<int>();
  } else if (type == "random") {
    reject_unknown_keys(j, {"type", "n", "seed", "ridge"}, "kernel spec");
    spec.type = KernelSpec::Type::Random;
    spec.n = j.at("n").get<int>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ridge")) spec.ridge = j.at("ridge").get<double>();
  } else {
    throw IoError("kernel spec type must be matrix, tridiagonal, or random");
  }
  return spec;
}

json fit_config_to_json(const FitConfig& f) {
  return json{{"restarts", f.restarts},     {"max_iters", f.max_iters},
              {"grad_tol", f.grad_tol},     {"armijo", f.armijo},
              {"init_scale", f.init_scale}, {"seed", f.seed}};
}

FitConfig fit_config_from_json(const json& j) {
  reject_unknown_keys(
      j, {"restarts", "max_iters", "grad_tol", "armijo", "init_scale", "seed"},
      "fit config");
  FitConfig f;
  if (j.contains("restarts")) f.restarts = j.at("restarts").get<int>();
  if (j.contains("max_iters")) f.max_iters = j.at("max_iters").get<int>();
  if (j.contains("grad_tol")) f.grad_tol = j.at("grad_tol").get<double>();
  if (j.contains("armijo")) f.armijo = j.at("armijo").get<double>();
  if (j.contains("init_scale")) f.init_scale = j.at("init_scale").get<double>();
  if (j.contains("seed")) f.seed = j.at("seed").get<std::uint64_t>();
  return f;
}

// Shared manifest writer; wall time is reported but outside the determinism
// guarantee.
void write_manifest(const ExperimentConfig& cfg, double wall_ms,
                    json extra) {
  if (cfg.out_dir.empty()) return;
  json m;
  m["tool"] = "dpplab";
  m["version"] = kVersion;
  m["experiment"] = cfg.experiment;
  m["config"] = json::parse(cfg.to_json_string());
  m["seed"] = cfg.seed;
  m["wall_ms"] = wall_ms;
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_text_file(cfg.out_dir / "manifest.json", m.dump(2) + "\n");
}

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

}  // namespace

Kernel KernelSpec::build() const {
  switch (type) {
    case Type::Matrix:
      return Kernel(matrix);
    case Type::Tridiagonal:
      return tridiagonal_kernel(tridiagonal);
    case Type::Random:
      return random_kernel(n, seed, ridge);
  }
  throw ValidationError("unreachable kernel spec type");
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError("bad JSON in " + path.string() + ": " + e.what());
  }
  reject_unknown_keys(j,
                      {"experiment", "kernel", "sample_sizes", "trials",
                       "seed", "out_dir", "fit", "curvature", "conjecture",
                       "threads"},
                      path.string());
  ExperimentConfig cfg;
  if (!j.contains("experiment") || !j.contains("kernel")) {
    throw IoError(path.string() + ": \"experiment\" and \"kernel\" required");
  }
  cfg.experiment = j.at("experiment").get<std::string>();
  std::filesystem::path base =
      path.has_parent_path() ? path.parent_path() : ".";
  cfg.kernel = kernel_spec_from_json(j.at("kernel"), base);
  if (j.contains("sample_sizes")) {
    cfg.sample_sizes = j.at("sample_sizes").get<std::vector<std::int64_t>>();
  }
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out_dir")) {
    std::filesystem::path out = j.at("out_dir").get<std::string>();
    cfg.out_dir = out.is_relative() ? base / out : out;
  }
  if (j.contains("fit")) cfg.fit = fit_config_from_json(j.at("fit"));
  if (j.contains("curvature")) {
    const auto& c = j.at("curvature");
    reject_unknown_keys(c, {"n_min", "n_max"}, "curvature config");
    if (c.contains("n_min")) cfg.n_min = c.at("n_min").get<int>();
    if (c.contains("n_max")) cfg.n_max = c.at("n_max").get<int>();
  }
  if (j.contains("conjecture")) {
    const auto& c = j.at("conjecture");
    reject_unknown_keys(c, {"restarts", "match_tol"}, "conjecture config");
    if (c.contains("restarts")) cfg.sweep_restarts = c.at("restarts").get<int>();
    if (c.contains("match_tol")) cfg.match_tol = c.at("match_tol").get<double>();
  }
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (experiment != "rates" && experiment != "saddles" &&
      experiment != "curvature" && experiment != "conjecture") {
    throw ValidationError("experiment must be rates, saddles, curvature, or "
                          "conjecture; got \"" + experiment + "\"");
  }
  if (trials < 1) throw ValidationError("trials must be >= 1");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  if (sample_sizes.empty()) {
    throw ValidationError("sample_sizes must not be empty");
  }
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 1 ||
        (i > 0 && sample_sizes[i] <= sample_sizes[i - 1])) {
      throw ValidationError("sample_sizes must be strictly increasing and >= 1");
    }
  }
  if (n_min < 2 || n_max < n_min) {
    throw ValidationError("curvature range needs 2 <= n_min <= n_max");
  }
  if (sweep_restarts < 1) throw ValidationError("conjecture restarts must be >= 1");
  if (!(match_tol > 0.0)) throw ValidationError("match_tol must be > 0");
}

std::string ExperimentConfig::to_json_string() const {
  json j;
  j["experiment"] = experiment;
  j["kernel"] = kernel_spec_to_json(kernel);
  j["sample_sizes"] = sample_sizes;
  j["trials"] = trials;
  j["seed"] = seed;
  j["out_dir"] = out_dir.string();
  j["fit"] = fit_config_to_json(fit);
  j["curvature"] = {{"n_min", n_min}, {"n_max", n_max}};
  j["conjecture"] = {{"restarts", sweep_restarts}, {"match_tol", match_tol}};
  j["threads"] = threads;
  return j.dump();
}

std::pair<double, double> split_loss(const Eigen::MatrixXd& L_hat,
                                     const Eigen::MatrixXd& L_star,
                                     const Partition& p) {
  int n = p.n;
  if (L_hat.rows() != n || L_star.rows() != n) {
    throw ValidationError("split_loss: size mismatch");
  }
  double best_within = std::numeric_limits<double>::infinity();
  double best_cross = std::numeric_limits<double>::infinity();
  for (const SignMatrix& d : canonical_signs(n)) {
    Eigen::MatrixXd diff = L_hat - d.conjugate(L_star);
    double within = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double sq = diff(i, j) * diff(i, j);
        if (p.block_of(i) == p.block_of(j)) {
          within += sq;
        } else {
          cross += sq;
        }
      }
    }
    best_within = std::min(best_within, std::sqrt(within));
    best_cross = std::min(best_cross, std::sqrt(cross));
  }
  return {best_within, best_cross};
}

RateReport run_rate_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Stopwatch watch;
  Kernel L_star = cfg.kernel.build();
  RateReport report;
  report.partition = blocks(L_star);
  report.has_cross = report.partition.size() > 1;

  std::size_t n_sizes = cfg.sample_sizes.size();
  std::size_t total = n_sizes * static_cast<std::size_t>(cfg.trials);
  report.rows.resize(total);
  parallel_for(total, cfg.threads, [&](std::size_t idx) {
    std::size_t si = idx / static_cast<std::size_t>(cfg.trials);
    int trial = static_cast<int>(idx % static_cast<std::size_t>(cfg.trials));
    std::int64_t n = cfg.sample_sizes[si];
    RateRow row;
    row.n = n;
    row.trial = trial;
    row.trial_seed = derive_stream(cfg.seed, static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(trial));
    SampleSet sample = sample_exhaustive(L_star, n, row.trial_seed);
    EmpiricalCounts counts = empirical_counts(sample);
    FitConfig fit_cfg = cfg.fit;
    fit_cfg.seed = derive_stream(row.trial_seed, 0x715);
    FitResult fit = fit_mle(counts, fit_cfg);
    Kernel fitted = Kernel::trusted(fit.kernel);
    row.converged = fit.converged;
    row.loss_total = loss(fitted, L_star);
    auto [within, cross] = split_loss(fit.kernel, L_star.matrix(),
                                      report.partition);
    row.loss_within = within;
    row.loss_cross = cross;
    row.loglik_fit = fit.loglik;
    row.loglik_truth = empirical_loglik(counts, L_star);
    row.grad_norm = fit.grad_norm;
    report.rows[idx] = row;
  });

  std::vector<double> log_n, log_total, log_within, log_cross;
  for (std::size_t si = 0; si < n_sizes; ++si) {
    RateMeans m;
    m.n = cfg.sample_sizes[si];
    KahanSum st, sw, sc;
    for (int t = 0; t < cfg.trials; ++t) {
      const RateRow& row =
          report.rows[si * static_cast<std::size_t>(cfg.trials) +
                      static_cast<std::size_t>(t)];
      if (!row.converged) {
        ++m.excluded;
        continue;
      }
      ++m.used;
      st.add(row.loss_total);
      sw.add(row.loss_within);
      sc.add(row.loss_cross);
    }
    if (m.used > 0) {
      m.mean_total = st.value() / m.used;
      m.mean_within = sw.value() / m.used;
      m.mean_cross = sc.value() / m.used;
      log_n.push_back(std::log(static_cast<double>(m.n)));
      log_total.push_back(std::log(m.mean_total));
      log_within.push_back(std::log(m.mean_within));
      if (report.has_cross) log_cross.push_back(std::log(m.mean_cross));
    }
    report.means.push_back(m);
  }
  if (log_n.size() < 2) {
    throw NumericError("rate experiment: fewer than 2 sample sizes with "
                       "converged fits");
  }
  report.slope_total = fit_line(log_n, log_total);
  report.slope_within = fit_line(log_n, log_within);
  if (report.has_cross) report.slope_cross = fit_line(log_n, log_cross);

  if (!cfg.out_dir.empty()) {
    std::string csv =
        "n,trial,seed,converged,loss_total,loss_within,loss_cross,loglik_fit,"
        "loglik_truth,grad_norm\n";
    for (const RateRow& r : report.rows) {
      csv += std::to_string(r.n) + "," + std::to_string(r.trial) + "," +
             std::to_string(r.trial_seed) + "," +
             (r.converged ? "1" : "0") + "," + format_double(r.loss_total) +
             "," + format_double(r.loss_within) + "," +
             format_double(r.loss_cross) + "," + format_double(r.loglik_fit) +
             "," + format_double(r.loglik_truth) + "," +
             format_double(r.grad_norm) + "\n";
    }
    write_text_file(cfg.out_dir / "rates.csv", csv);

    auto slope_json = [](const LineFit& f) {
      return json{{"slope", f.slope},
                  {"intercept", f.intercept},
                  {"r_squared", f.r_squared},
                  {"slope_stderr", f.slope_stderr}};
    };
    json summary;
    summary["partition"] = json::parse(partition_to_json(report.partition));
    summary["means"] = json::array();
    for (const RateMeans& m : report.means) {
      summary["means"].push_back({{"n", m.n},
                                  {"used", m.used},
                                  {"excluded", m.excluded},
                                  {"mean_total", m.mean_total},
                                  {"mean_within", m.mean_within},
                                  {"mean_cross", m.mean_cross}});
    }
    summary["slope_total"] = slope_json(report.slope_total);
    summary["slope_within"] = slope_json(report.slope_within);
    if (report.has_cross) {
      summary["slope_cross"] = slope_json(report.slope_cross);
    }
    write_text_file(cfg.out_dir / "rates_summary.json",
                    summary.dump(2) + "\n");

    auto write_fig = [&](const std::string& name, auto select) {
      std::string tsv;
      for (const RateMeans& m : report.means) {
        if (m.used == 0) continue;
        tsv += std::to_string(m.n) + "\t" + format_double(select(m)) + "\n";
      }
      write_text_file(cfg.out_dir / name, tsv);
    };
    write_fig("fig_rate_total.tsv",
              [](const RateMeans& m) { return m.mean_total; });
    write_fig("fig_rate_within.tsv",
              [](const RateMeans& m) { return m.mean_within; });
    if (report.has_cross) {
      write_fig("fig_rate_cross.tsv",
                [](const RateMeans& m) { return m.mean_cross; });
    }

    json seeds = json::array();
    for (const RateRow& r : report.rows) {
      seeds.push_back({{"n", r.n}, {"trial", r.trial}, {"seed", r.trial_seed}});
    }
    write_manifest(cfg, watch.elapsed_ms(), json{{"trial_seeds", seeds}});
  }
  return report;
}

SaddleReport run_saddle_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Stopwatch watch;
  Kernel L_star = cfg.kernel.build();
  if (L_star.size() > 6) {
    throw CapacityError("saddle experiment capped at N=6 (Bell growth)");
  }
  SaddleReport report;
  for (const Partition& p : all_partitions(L_star.size())) {
    Kernel decoupled = decoupling_kernel(L_star, p);
    CriticalPointReport crit = classify_critical_point(L_star, decoupled);
    SaddleRow row;
    row.partition = p;
    row.grad_norm = crit.gradient_norm;
    row.eig_min = crit.hessian_eigenvalues.minCoeff();
    row.eig_max = crit.hessian_eigenvalues.maxCoeff();
    row.diag_dev = critical_diag_check(L_star, decoupled);
    row.classification = crit.classification;
    switch (crit.classification) {
      case Classification::Saddle: ++report.saddles; break;
      case Classification::GlobalMaxOrbit: ++report.max_orbit; break;
      case Classification::DegenerateMax: ++report.degenerate; break;
      case Classification::Inconclusive: ++report.inconclusive; break;
    }
    report.rows.push_back(std::move(row));
  }

  if (!cfg.out_dir.empty()) {
    std::string csv =
        "partition,grad_norm,eig_min,eig_max,classification,diag_dev\n";
    json rows_json = json::array();
    for (const SaddleRow& r : report.rows) {
      std::string pj = partition_to_json(r.partition);
      csv += "\"" + pj + "\"," + format_double(r.grad_norm) + "," +
             format_double(r.eig_min) + "," + format_double(r.eig_max) + "," +
             to_string(r.classification) + "," + format_double(r.diag_dev) +
             "\n";
      rows_json.push_back({{"partition", json::parse(pj)},
                           {"grad_norm", r.grad_norm},
                           {"eig_min", r.eig_min},
                           {"eig_max", r.eig_max},
                           {"classification", to_string(r.classification)},
                           {"diag_dev", r.diag_dev}});
    }
    write_text_file(cfg.out_dir / "saddles.csv", csv);
    json summary;
    summary["rows"] = rows_json;
    summary["saddles"] = report.saddles;
    summary["max_orbit"] = report.max_orbit;
    summary["degenerate"] = report.degenerate;
    summary["inconclusive"] = report.inconclusive;
    write_text_file(cfg.out_dir / "saddles.json", summary.dump(2) + "\n");
    write_manifest(cfg, watch.elapsed_ms(), json::object());
  }
  return report;
}

CurvatureReport run_curvature_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Stopwatch watch;
  if (cfg.kernel.type != KernelSpec::Type::Tridiagonal) {
    throw ValidationError("curvature experiment needs a tridiagonal kernel");
  }
  CurvatureReport report;
  std::vector<double> ns, log_numeric;
  for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
    TridiagonalSpec spec = cfg.kernel.tridiagonal;
    spec.n = n;
    CurvatureRow row;
    row.n = n;
    row.decay = curvature_decay(spec);
    report.rows.push_back(row);
    if (row.decay.numeric_min > 0.0) {
      ns.push_back(static_cast<double>(n));
      log_numeric.push_back(std::log(row.decay.numeric_min));
    }
  }
  if (ns.size() >= 2) report.fit = fit_line(ns, log_numeric);

  if (!cfg.out_dir.empty()) {
    std::string csv = "n,closed_form,numeric_min,log_closed,log_numeric\n";
    std::string tsv;
    for (const CurvatureRow& r : report.rows) {
      csv += std::to_string(r.n) + "," + format_double(r.decay.closed_form) +
             "," + format_double(r.decay.numeric_min) + "," +
             format_double(std::log(r.decay.closed_form)) + "," +
             format_double(std::log(r.decay.numeric_min)) + "\n";
      tsv += std::to_string(r.n) + "\t" + format_double(r.decay.numeric_min) +
             "\n";
    }
    write_text_file(cfg.out_dir / "curvature.csv", csv);
    write_text_file(cfg.out_dir / "fig_curvature.tsv", tsv);
    json summary;
    summary["slope"] = report.fit.slope;
    summary["intercept"] = report.fit.intercept;
    summary["r_squared"] = report.fit.r_squared;
    summary["slope_stderr"] = report.fit.slope_stderr;
    write_text_file(cfg.out_dir / "curvature.json", summary.dump(2) + "\n");
    write_manifest(cfg, watch.elapsed_ms(), json::object());
  }
  return report;
}

ConjectureReport run_conjecture_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  Stopwatch watch;
  Kernel L_star = cfg.kernel.build();
  int n = L_star.size();
  if (n > 4) {
    throw CapacityError("conjecture sweep capped at N=4");
  }
  std::vector<Partition> partitions = all_partitions(n);
  std::vector<Kernel> catalog;
  catalog.reserve(partitions.size());
  for (const Partition& p : partitions) {
    catalog.push_back(decoupling_kernel(L_star, p));
  }

  ConjectureReport report;
  report.rows.resize(static_cast<std::size_t>(cfg.sweep_restarts));
  parallel_for(
      static_cast<std::size_t>(cfg.sweep_restarts), cfg.threads,
      [&](std::size_t idx) {
        int r = static_cast<int>(idx);
        ConjectureRow row;
        row.restart = r;
        row.restart_seed = derive_stream(cfg.seed, 0xc0, static_cast<std::uint64_t>(r));
        Eigen::MatrixXd S0;
        if (r == 0) {
          // Restart 0 from the truth: log(L*) via eigendecomposition.
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L_star.matrix());
          S0 = es.eigenvectors() *
               es.eigenvalues().array().log().matrix().asDiagonal() *
               es.eigenvectors().transpose();
          S0 = 0.5 * (S0 + S0.transpose());
        } else {
          StreamRng rng(row.restart_seed, 0);
          S0.setZero(n, n);
          for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
              S0(i, j) = S0(j, i) = cfg.fit.init_scale * rng.next_normal();
            }
          }
        }
        FitResult fit = fit_expected_from(L_star, S0, cfg.fit);
        row.converged = fit.converged;
        row.loglik = fit.loglik;
        row.grad_norm = fit.grad_norm;
        if (fit.converged) {
          Kernel fitted = Kernel::trusted(fit.kernel);
          row.match_loss = std::numeric_limits<double>::infinity();
          for (std::size_t c = 0; c < catalog.size(); ++c) {
            double l = loss(fitted, catalog[c]);
            if (l < row.match_loss) {
              row.match_loss = l;
              row.matched_partition = static_cast<int>(c);
            }
          }
          if (row.match_loss > cfg.match_tol) row.matched_partition = -1;
          row.diag_dev = critical_diag_check(L_star, fitted);
        }
        report.rows[idx] = row;
      });

  for (const ConjectureRow& row : report.rows) {
    if (row.converged) {
      ++report.converged_count;
      if (row.matched_partition < 0) ++report.unmatched;
    }
  }
  report.consistent = report.converged_count > 0 && report.unmatched == 0;

  if (!cfg.out_dir.empty()) {
    std::string csv =
        "restart,seed,converged,loglik,grad_norm,matched_partition,match_loss,"
        "diag_dev\n";
    for (const ConjectureRow& r : report.rows) {
      csv += std::to_string(r.restart) + "," + std::to_string(r.restart_seed) +
             "," + (r.converged ? "1" : "0") + "," + format_double(r.loglik) +
             "," + format_double(r.grad_norm) + "," +
             std::to_string(r.matched_partition) + "," +
             format_double(r.match_loss) + "," + format_double(r.diag_dev) +
             "\n";
    }
    write_text_file(cfg.out_dir / "conjecture.csv", csv);
    json summary;
    summary["partitions"] = json::array();
    for (const Partition& p : partitions) {
      summary["partitions"].push_back(json::parse(partition_to_json(p)));
    }
    summary["restarts"] = cfg.sweep_restarts;
    summary["converged"] = report.converged_count;
    summary["unmatched"] = report.unmatched;
    summary["consistent_with_conjecture"] = report.consistent;
    write_text_file(cfg.out_dir / "conjecture.json", summary.dump(2) + "\n");
    write_manifest(cfg, watch.elapsed_ms(), json::object());
  }
  return report;
}

}  // namespace dpplab
