#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "dpplab/kernel.hpp"

namespace dpplab {

inline constexpr double kGraphZeroTol = 1e-12;

// Vertices [N], edges where |L_ij| exceeds the zero threshold (i < j).
struct DeterminantalGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // lexicographic, i < j
};

// Disjoint cover of [N]; canonical order is increasing minimum element.
struct Partition {
  int n = 0;
  std::vector<Mask> parts;

  static Partition of_masks(int n, std::vector<Mask> parts);
  static Partition singletons(int n);
  static Partition whole(int n);

  std::size_t size() const { return parts.size(); }
  int block_of(int item) const;
  bool operator==(const Partition&) const = default;
};

// Diagonal +-1 conjugation; canonical representatives fix signs[0] = +1.
struct SignMatrix {
  std::vector<int> signs;
  Eigen::MatrixXd conjugate(const Eigen::MatrixXd& m) const;  // D m D
};

DeterminantalGraph determinantal_graph(const Kernel& L,
                                       double zero_tol = kGraphZeroTol);
Partition blocks(const Kernel& L);

// 2^{N-k} for k connected components; also the size of the sign orbit.
std::uint64_t degree_of_identifiability(const Kernel& L);

// All 2^{n-1} canonical sign matrices (first sign +1).
std::vector<SignMatrix> canonical_signs(int n);

// Distinct {DLD}, deduplicated entrywise within 1e-12.
std::vector<Kernel> sign_orbit(const Kernel& L);

// min over canonical D of ||L_hat - D L_star D||_F (exact brute force).
double loss(const Kernel& L_hat, const Kernel& L_star);

// Unnormalized directions e_ij + e_ji for i, j in distinct blocks (i < j),
// lexicographic; empty iff L_star is irreducible.
using NullSpaceBasis = std::vector<Eigen::MatrixXd>;
NullSpaceBasis null_space_basis(const Kernel& L_star);

// H vanishes on all same-block pairs including the diagonal.
bool in_null_space(const Eigen::MatrixXd& H, const Kernel& L_star,
                   double tol = kGraphZeroTol);

struct NullPiece {
  Eigen::MatrixXd matrix;  // cross-block slice of H, symmetric
  SignMatrix sign;         // D with D piece D = -piece and D L* D = L*
};

// Split H in the Hessian null space into its block-pair slices.
std::vector<NullPiece> decompose_null_direction(const Eigen::MatrixXd& H,
                                                const Kernel& L_star);

// All set partitions of [n] as restricted-growth strings in lexicographic
// order; n capped at 6 (Bell number growth).
std::vector<Partition> all_partitions(int n);

// JSON list of lists of 0-based indices.
std::string partition_to_json(const Partition& p);
Partition partition_from_json(const std::string& text, int n);

// Block-diagonal random kernel: independent random_kernel per block embedded
// on the partition's support.
Kernel random_block_kernel(const Partition& p, std::uint64_t seed,
                           double ridge = 1e-3);

}  // namespace dpplab
