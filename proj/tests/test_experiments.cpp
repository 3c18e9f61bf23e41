#include <filesystem>

#include "doctest.h"
#include "dpplab/experiments.hpp"
#include "dpplab/matrix_io.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace dpplab;

namespace {

void write_config(const std::filesystem::path& path, const std::string& body) {
  write_text_file(path, body);
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("config parsing, path resolution and unknown keys") {
  testutil::ScratchDir dir("cfg");
  save_matrix_json(dir.file("L.json"), random_kernel(2, 1).matrix());

  write_config(dir.file("good.json"), R"({
    "experiment": "rates",
    "kernel": {"type": "matrix", "path": "L.json"},
    "sample_sizes": [100, 200],
    "trials": 3,
    "seed": 17,
    "out_dir": "out",
    "fit": {"restarts": 2, "max_iters": 100},
    "threads": 1
  })");
  ExperimentConfig cfg = ExperimentConfig::load(dir.file("good.json"));
  CHECK(cfg.experiment == "rates");
  CHECK(cfg.kernel.type == KernelSpec::Type::Matrix);
  CHECK(cfg.kernel.matrix.rows() == 2);  // relative path resolved
  CHECK(cfg.sample_sizes == std::vector<std::int64_t>{100, 200});
  CHECK(cfg.trials == 3);
  CHECK(cfg.seed == 17);
  CHECK(cfg.out_dir == dir.file("out"));
  CHECK(cfg.fit.restarts == 2);
  CHECK(cfg.fit.max_iters == 100);
  CHECK(cfg.fit.grad_tol == 1e-7);  // untouched default

  write_config(dir.file("typo.json"), R"({
    "experiment": "rates",
    "kernel": {"type": "random", "n": 3},
    "trails": 5
  })");
  CHECK_THROWS_AS(ExperimentConfig::load(dir.file("typo.json")), IoError);

  write_config(dir.file("badexp.json"), R"({
    "experiment": "volcano",
    "kernel": {"type": "random", "n": 3}
  })");
  CHECK_THROWS_AS(ExperimentConfig::load(dir.file("badexp.json")),
                  ValidationError);

  write_config(dir.file("badsizes.json"), R"({
    "experiment": "rates",
    "kernel": {"type": "random", "n": 3},
    "sample_sizes": [100, 100]
  })");
  CHECK_THROWS_AS(ExperimentConfig::load(dir.file("badsizes.json")),
                  ValidationError);

  write_config(dir.file("badfit.json"), R"({
    "experiment": "rates",
    "kernel": {"type": "random", "n": 3},
    "fit": {"momentum": 0.9}
  })");
  CHECK_THROWS_AS(ExperimentConfig::load(dir.file("badfit.json")), IoError);

  // config echo round trips through JSON
  nlohmann::json echo = nlohmann::json::parse(cfg.to_json_string());
  CHECK(echo["experiment"] == "rates");
  CHECK(echo["trials"] == 3);
}

TEST_CASE("kernel specs build the advertised kernels") {
  KernelSpec tri;
  tri.type = KernelSpec::Type::Tridiagonal;
  tri.tridiagonal = TridiagonalSpec{2.0, 0.5, 4};
  Kernel L = tri.build();
  CHECK(L.size() == 4);
  CHECK(L.matrix()(2, 3) == 0.5);

  KernelSpec rnd;
  rnd.type = KernelSpec::Type::Random;
  rnd.n = 3;
  rnd.seed = 5;
  CHECK((rnd.build().matrix() - random_kernel(3, 5).matrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("split loss separates within and cross blocks") {
  Partition p = Partition::of_masks(4, {0b0011, 0b1100});
  Kernel L_star = random_block_kernel(p, 8, 0.5);
  auto [w0, c0] = split_loss(L_star.matrix(), L_star.matrix(), p);
  CHECK(w0 == 0.0);
  CHECK(c0 == 0.0);

  Eigen::MatrixXd bumped = L_star.matrix();
  bumped(0, 3) += 0.25;
  bumped(3, 0) += 0.25;
  auto [w1, c1] = split_loss(bumped, L_star.matrix(), p);
  CHECK(w1 < 1e-12);
  CHECK(c1 == doctest::Approx(0.25 * std::sqrt(2.0)).epsilon(1e-10));

  bumped(1, 1) += 0.5;
  auto [w2, c2] = split_loss(bumped, L_star.matrix(), p);
  CHECK(w2 == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("saddle experiment classifies the whole catalog") {
  testutil::ScratchDir dir("saddle");
  ExperimentConfig cfg;
  cfg.experiment = "saddles";
  cfg.kernel.type = KernelSpec::Type::Random;
  cfg.kernel.n = 3;
  cfg.kernel.seed = 2;
  cfg.kernel.ridge = 0.5;
  cfg.out_dir = dir.file("out");
  SaddleReport rep = run_saddle_experiment(cfg);
  CHECK(rep.rows.size() == 5);  // Bell(3)
  CHECK(rep.max_orbit == 1);
  CHECK(rep.saddles == 4);
  CHECK(rep.inconclusive == 0);
  for (const SaddleRow& row : rep.rows) {
    CHECK(row.grad_norm < 1e-8);
    CHECK(row.diag_dev < 1e-10);
  }
  CHECK(std::filesystem::exists(dir.file("out") / "saddles.csv"));
  CHECK(std::filesystem::exists(dir.file("out") / "saddles.json"));
  CHECK(std::filesystem::exists(dir.file("out") / "manifest.json"));

  nlohmann::json manifest = nlohmann::json::parse(
      read_text_file(dir.file("out") / "manifest.json"));
  CHECK(manifest["tool"] == "dpplab");
  CHECK(manifest["experiment"] == "saddles");
  CHECK(manifest.contains("wall_ms"));
  CHECK(manifest["config"]["kernel"]["type"] == "random");
}

TEST_CASE("curvature experiment fits a decaying line") {
  testutil::ScratchDir dir("curv");
  ExperimentConfig cfg;
  cfg.experiment = "curvature";
  cfg.kernel.type = KernelSpec::Type::Tridiagonal;
  cfg.kernel.tridiagonal = TridiagonalSpec{2.0, 0.5, 3};
  cfg.n_min = 3;
  cfg.n_max = 6;
  cfg.out_dir = dir.file("out");
  CurvatureReport rep = run_curvature_experiment(cfg);
  CHECK(rep.rows.size() == 4);
  CHECK(rep.fit.slope < 0.0);
  CHECK(rep.fit.r_squared > 0.9);
  for (const CurvatureRow& row : rep.rows) {
    CHECK(row.decay.numeric_min <= row.decay.closed_form + 1e-12);
  }
  CHECK(std::filesystem::exists(dir.file("out") / "curvature.csv"));
  CHECK(std::filesystem::exists(dir.file("out") / "fig_curvature.tsv"));

  ExperimentConfig wrong = cfg;
  wrong.kernel.type = KernelSpec::Type::Random;
  CHECK_THROWS_AS(run_curvature_experiment(wrong), ValidationError);
}

TEST_CASE("rate experiment produces slopes and deterministic rows") {
  ExperimentConfig cfg;
  cfg.experiment = "rates";
  cfg.kernel.type = KernelSpec::Type::Random;
  cfg.kernel.n = 2;
  cfg.kernel.seed = 6;
  cfg.kernel.ridge = 0.5;
  cfg.sample_sizes = {300, 1200};
  cfg.trials = 4;
  cfg.seed = 5;
  cfg.fit.restarts = 1;
  cfg.fit.max_iters = 2000;
  RateReport rep = run_rate_experiment(cfg);
  CHECK(rep.rows.size() == 8);
  CHECK_FALSE(rep.has_cross);
  CHECK(rep.means.size() == 2);
  CHECK(rep.means[0].used + rep.means[0].excluded == 4);
  CHECK(rep.slope_within.slope < 0.0);  // loss shrinks with n

  RateReport again = run_rate_experiment(cfg);
  REQUIRE(again.rows.size() == rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(again.rows[i].loss_total == rep.rows[i].loss_total);
    CHECK(again.rows[i].trial_seed == rep.rows[i].trial_seed);
  }
}

TEST_CASE("rate experiment on a reducible kernel reports the cross slope") {
  testutil::ScratchDir dir("rates");
  ExperimentConfig cfg;
  cfg.experiment = "rates";
  cfg.kernel.type = KernelSpec::Type::Matrix;
  cfg.kernel.matrix =
      random_block_kernel(Partition::of_masks(3, {0b011, 0b100}), 9, 0.5)
          .matrix();
  cfg.sample_sizes = {200, 800};
  cfg.trials = 3;
  cfg.seed = 12;
  cfg.fit.restarts = 1;
  cfg.fit.max_iters = 2000;
  cfg.out_dir = dir.file("out");
  RateReport rep = run_rate_experiment(cfg);
  CHECK(rep.has_cross);
  CHECK(rep.partition.size() == 2);
  CHECK(std::filesystem::exists(dir.file("out") / "rates.csv"));
  CHECK(std::filesystem::exists(dir.file("out") / "rates_summary.json"));
  CHECK(std::filesystem::exists(dir.file("out") / "fig_rate_cross.tsv"));

  nlohmann::json summary = nlohmann::json::parse(
      read_text_file(dir.file("out") / "rates_summary.json"));
  CHECK(summary.contains("slope_cross"));
  CHECK(summary["means"].size() == 2);
}

TEST_CASE("conjecture sweep matches every converged point to the catalog") {
  testutil::ScratchDir dir("conj");
  ExperimentConfig cfg;
  cfg.experiment = "conjecture";
  cfg.kernel.type = KernelSpec::Type::Matrix;
  cfg.kernel.matrix = [] {
    Eigen::MatrixXd m(2, 2);
    m << 2, 1, 1, 2;
    return m;
  }();
  cfg.sweep_restarts = 4;
  cfg.seed = 3;
  cfg.out_dir = dir.file("out");
  ConjectureReport rep = run_conjecture_sweep(cfg);
  CHECK(rep.rows.size() == 4);
  CHECK(rep.rows[0].converged);  // restart 0 starts at the truth
  CHECK(rep.rows[0].matched_partition == 0);  // whole partition comes first
  CHECK(rep.converged_count > 0);
  CHECK(rep.unmatched == 0);
  CHECK(rep.consistent);
  CHECK(std::filesystem::exists(dir.file("out") / "conjecture.csv"));
  CHECK(std::filesystem::exists(dir.file("out") / "conjecture.json"));
}

}  // TEST_SUITE("experiments")
