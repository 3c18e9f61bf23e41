#include "dpplab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dpplab/rng.hpp"
#include "json.hpp"

namespace dpplab {

Partition Partition::of_masks(int n, std::vector<Mask> parts) {
  check_ground_size(n);
  Mask seen = 0;
  for (Mask part : parts) {
    if (part == 0) throw ValidationError("partition contains an empty block");
    check_subset(part, n);
    if ((seen & part) != 0) {
      throw ValidationError("partition blocks overlap");
    }
    seen |= part;
  }
  if (seen != full_mask(n)) {
    throw ValidationError("partition does not cover the ground set");
  }
  std::sort(parts.begin(), parts.end(), [](Mask a, Mask b) {
    return std::countr_zero(a) < std::countr_zero(b);
  });
  Partition p;
  p.n = n;
  p.parts = std::move(parts);
  return p;
}

Partition Partition::singletons(int n) {
  std::vector<Mask> parts;
  for (int i = 0; i < n; ++i) parts.push_back(Mask{1} << i);
  return of_masks(n, std::move(parts));
}

Partition Partition::whole(int n) { return of_masks(n, {full_mask(n)}); }

int Partition::block_of(int item) const {
  for (std::size_t b = 0; b < parts.size(); ++b) {
    if (parts[b] & (Mask{1} << item)) return static_cast<int>(b);
  }
  throw ValidationError("item " + std::to_string(item) + " not in partition");
}

Eigen::MatrixXd SignMatrix::conjugate(const Eigen::MatrixXd& m) const {
  int n = static_cast<int>(m.rows());
  if (static_cast<int>(signs.size()) != n) {
    throw ValidationError("sign vector length does not match matrix");
  }
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out(i, j) = static_cast<double>(signs[i] * signs[j]) * m(i, j);
    }
  }
  return out;
}

DeterminantalGraph determinantal_graph(const Kernel& L, double zero_tol) {
  if (zero_tol < 0.0) throw ValidationError("zero_tol must be >= 0");
  DeterminantalGraph g;
  g.n = L.size();
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (std::abs(L.matrix()(i, j)) > zero_tol) g.edges.emplace_back(i, j);
    }
  }
  return g;
}

Partition blocks(const Kernel& L) {
  int n = L.size();
  DeterminantalGraph g = determinantal_graph(L);
  std::vector<int> root(n);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (auto [i, j] : g.edges) root[find(i)] = find(j);
  std::vector<Mask> comp(n, 0);
  for (int i = 0; i < n; ++i) comp[static_cast<std::size_t>(find(i))] |= Mask{1} << i;
  std::vector<Mask> parts;
  for (Mask m : comp) {
    if (m != 0) parts.push_back(m);
  }
  return Partition::of_masks(n, std::move(parts));
}

std::uint64_t degree_of_identifiability(const Kernel& L) {
  std::size_t k = blocks(L).size();
  return std::uint64_t{1} << (static_cast<std::size_t>(L.size()) - k);
}

std::vector<SignMatrix> canonical_signs(int n) {
  check_enumerable(n);
  std::vector<SignMatrix> out;
  out.reserve(std::size_t{1} << (n - 1));
  for (Mask bits = 0; bits < (Mask{1} << (n - 1)); ++bits) {
    SignMatrix d;
    d.signs.resize(static_cast<std::size_t>(n), 1);
    for (int i = 1; i < n; ++i) {
      if (bits & (Mask{1} << (i - 1))) d.signs[static_cast<std::size_t>(i)] = -1;
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Kernel> sign_orbit(const Kernel& L) {
  int n = L.size();
  std::vector<Kernel> orbit;
  for (const SignMatrix& d : canonical_signs(n)) {
    Eigen::MatrixXd candidate = d.conjugate(L.matrix());
    bool fresh = true;
    for (const Kernel& seen : orbit) {
      if ((candidate - seen.matrix()).cwiseAbs().maxCoeff() <= 1e-12) {
        fresh = false;
        break;
      }
    }
    if (fresh) orbit.push_back(Kernel::trusted(std::move(candidate)));
  }
  return orbit;
}

double loss(const Kernel& L_hat, const Kernel& L_star) {
  if (L_hat.size() != L_star.size()) {
    throw ValidationError("loss: kernels differ in size");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const SignMatrix& d : canonical_signs(L_star.size())) {
    best = std::min(best,
                    (L_hat.matrix() - d.conjugate(L_star.matrix())).norm());
  }
  return best;
}

NullSpaceBasis null_space_basis(const Kernel& L_star) {
  int n = L_star.size();
  Partition p = blocks(L_star);
  NullSpaceBasis basis;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (p.block_of(i) == p.block_of(j)) continue;
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      h(i, j) = h(j, i) = 1.0;
      basis.push_back(std::move(h));
    }
  }
  return basis;
}

bool in_null_space(const Eigen::MatrixXd& H, const Kernel& L_star, double tol) {
  int n = L_star.size();
  if (H.rows() != n || H.cols() != n) {
    throw ValidationError("direction has wrong dimensions");
  }
  Partition p = blocks(L_star);
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (p.block_of(i) == p.block_of(j) &&
          std::abs(H(i, j)) > tol * scale) {
        return false;
      }
    }
  }
  return true;
}

std::vector<NullPiece> decompose_null_direction(const Eigen::MatrixXd& H,
                                                const Kernel& L_star) {
  int n = L_star.size();
  Eigen::MatrixXd Hs = symmetrized(H);  // rejects asymmetric input
  if (!in_null_space(Hs, L_star)) {
    throw ValidationError(
        "direction is not in the Hessian null space of this kernel");
  }
  Partition p = blocks(L_star);
  std::vector<NullPiece> pieces;
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (std::size_t b = a + 1; b < p.size(); ++b) {
      Eigen::MatrixXd piece = Eigen::MatrixXd::Zero(n, n);
      double weight = 0.0;
      for (int i : subset_items(p.parts[a])) {
        for (int j : subset_items(p.parts[b])) {
          piece(i, j) = piece(j, i) = Hs(i, j);
          weight += std::abs(Hs(i, j));
        }
      }
      if (weight == 0.0) continue;
      SignMatrix d;
      d.signs.resize(static_cast<std::size_t>(n), -1);
      for (int j : subset_items(p.parts[b])) d.signs[static_cast<std::size_t>(j)] = 1;
      pieces.push_back(NullPiece{std::move(piece), std::move(d)});
    }
  }
  return pieces;
}

std::vector<Partition> all_partitions(int n) {
  check_ground_size(n);
  if (n > 6) {
    throw CapacityError("partition enumeration capped at N=6, got N=" +
                        std::to_string(n));
  }
  std::vector<Partition> out;
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  // Restricted growth strings: assign[0] = 0, assign[i] <= max(prefix) + 1.
  auto emit = [&] {
    int k = *std::max_element(assign.begin(), assign.end()) + 1;
    std::vector<Mask> parts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      parts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] |= Mask{1} << i;
    }
    out.push_back(Partition::of_masks(n, std::move(parts)));
  };
  auto rec = [&](auto&& self, int i, int prefix_max) -> void {
    if (i == n) {
      emit();
      return;
    }
    for (int v = 0; v <= prefix_max + 1; ++v) {
      assign[static_cast<std::size_t>(i)] = v;
      self(self, i + 1, std::max(prefix_max, v));
    }
  };
  rec(rec, 1, 0);
  return out;
}

std::string partition_to_json(const Partition& p) {
  nlohmann::json j = nlohmann::json::array();
  for (Mask part : p.parts) j.push_back(subset_items(part));
  return j.dump();
}

Partition partition_from_json(const std::string& text, int n) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad partition JSON: ") + e.what());
  }
  if (!j.is_array()) throw IoError("partition JSON must be a list of lists");
  std::vector<Mask> parts;
  for (const auto& block : j) {
    if (!block.is_array()) throw IoError("partition JSON must be a list of lists");
    parts.push_back(mask_from_items(block.get<std::vector<int>>(), n));
  }
  return Partition::of_masks(n, std::move(parts));
}

Kernel random_block_kernel(const Partition& p, std::uint64_t seed,
                           double ridge) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p.n, p.n);
  for (std::size_t b = 0; b < p.size(); ++b) {
    int nb = subset_size(p.parts[b]);
    Kernel block = random_kernel(nb, derive_stream(seed, b), ridge);
    add_embedded(L, p.parts[b], block.matrix());
  }
  return Kernel(L);
}

}  // namespace dpplab
