#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpplab/experiments.hpp"
#include "dpplab/sampler.hpp"

namespace py = pybind11;
using namespace dpplab;

namespace {

Kernel as_kernel(const Eigen::MatrixXd& m) { return Kernel(m); }

std::vector<std::vector<int>> draws_to_lists(const SampleSet& s) {
  std::vector<std::vector<int>> out;
  out.reserve(s.draws.size());
  for (Mask J : s.draws) out.push_back(subset_items(J));
  return out;
}

EmpiricalCounts counts_from_lists(const std::vector<std::vector<int>>& draws,
                                  int n) {
  SampleSet s;
  s.n_items = n;
  s.draws.reserve(draws.size());
  for (const auto& items : draws) s.draws.push_back(mask_from_items(items, n));
  return empirical_counts(s);
}

py::dict fit_to_dict(const FitResult& r) {
  py::dict d;
  d["kernel"] = r.kernel;
  d["loglik"] = r.loglik;
  d["grad_norm"] = r.grad_norm;
  d["converged"] = r.converged;
  d["best_restart"] = r.best_restart;
  d["condition"] = r.condition;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dpplab core bindings";
  m.attr("__version__") = kVersion;

  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<CapacityError>(m, "CapacityError");

  m.def("l_to_k",
        [](const Eigen::MatrixXd& L) { return l_to_k(as_kernel(L)).matrix(); },
        py::arg("L"), "Correlation kernel K = L(I+L)^-1");
  m.def("k_to_l",
        [](const Eigen::MatrixXd& K) {
          return k_to_l(CorrelationKernel(K)).matrix();
        },
        py::arg("K"), "Likelihood kernel L = K(I-K)^-1");

  m.def("pmf",
        [](const Eigen::MatrixXd& L, const std::vector<int>& subset) {
          Kernel k = as_kernel(L);
          return pmf(k, mask_from_items(subset, k.size()));
        },
        py::arg("L"), py::arg("subset"), "P[Z = subset] under DPP(L)");
  m.def("pmf_table",
        [](const Eigen::MatrixXd& L) { return pmf_table(as_kernel(L)).p; },
        py::arg("L"), "All 2^n subset probabilities, indexed by bitmask");
  m.def("inclusion_prob",
        [](const Eigen::MatrixXd& L, const std::vector<int>& subset) {
          Kernel k = as_kernel(L);
          return inclusion_prob(k, mask_from_items(subset, k.size()));
        },
        py::arg("L"), py::arg("subset"), "P[subset in Z] = det K_subset");

  m.def("sample",
        [](const Eigen::MatrixXd& L, std::int64_t count, std::uint64_t seed) {
          return draws_to_lists(sample_spectral(as_kernel(L), count, seed));
        },
        py::arg("L"), py::arg("count"), py::arg("seed") = 0,
        "Draw subsets via the spectral sampler");

  m.def("expected_loglik",
        [](const Eigen::MatrixXd& L_star, const Eigen::MatrixXd& L) {
          return expected_loglik(as_kernel(L_star), as_kernel(L));
        },
        py::arg("L_star"), py::arg("L"));
  m.def("gradient",
        [](const Eigen::MatrixXd& L_star, const Eigen::MatrixXd& L) {
          return gradient(as_kernel(L_star), as_kernel(L));
        },
        py::arg("L_star"), py::arg("L"));
  m.def("derivative_form",
        [](const Eigen::MatrixXd& L_star, const Eigen::MatrixXd& L,
           const Eigen::MatrixXd& H, int k) {
          return derivative_form(as_kernel(L_star), as_kernel(L), H, k);
        },
        py::arg("L_star"), py::arg("L"), py::arg("H"), py::arg("k"),
        "k-th directional derivative of the expected log-likelihood");
  m.def("hessian_eigenvalues",
        [](const Eigen::MatrixXd& L_star) {
          return hessian_operator(as_kernel(L_star)).eigenvalues();
        },
        py::arg("L_star"));

  m.def("loss",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
          return loss(as_kernel(A), as_kernel(B));
        },
        py::arg("A"), py::arg("B"),
        "min over sign flips of the Frobenius distance");
  m.def("degree_of_identifiability",
        [](const Eigen::MatrixXd& L) {
          return degree_of_identifiability(as_kernel(L));
        },
        py::arg("L"));

  m.def("tridiagonal_kernel",
        [](double a, double b, int n) {
          return tridiagonal_kernel(TridiagonalSpec{a, b, n}).matrix();
        },
        py::arg("a"), py::arg("b"), py::arg("n"));
  m.def("random_block_kernel",
        [](const std::vector<std::vector<int>>& parts, std::uint64_t seed) {
          int n = 0;
          for (const auto& p : parts) n += static_cast<int>(p.size());
          std::vector<Mask> masks;
          for (const auto& p : parts) masks.push_back(mask_from_items(p, n));
          return random_block_kernel(Partition::of_masks(n, masks), seed)
              .matrix();
        },
        py::arg("parts"), py::arg("seed") = 0);

  m.def("fit",
        [](const std::vector<std::vector<int>>& draws, int n, int restarts,
           std::uint64_t seed) {
          FitConfig cfg;
          cfg.restarts = restarts;
          cfg.seed = seed;
          return fit_to_dict(fit_mle(counts_from_lists(draws, n), cfg));
        },
        py::arg("draws"), py::arg("n"), py::arg("restarts") = 4,
        py::arg("seed") = 0, "Maximum likelihood fit from observed subsets");
}
