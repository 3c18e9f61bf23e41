#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "dpplab/kernel.hpp"

namespace dpplab {

// Round-trip formatting for CSV/TSV output (%.17g).
std::string format_double(double x);

// JSON object { "n": N, "data": [N*N row-major numbers] }.
// Symmetry is validated on load (tolerance 1e-12) and averaged away.
Eigen::MatrixXd load_matrix_json(const std::filesystem::path& path);
void save_matrix_json(const std::filesystem::path& path,
                      const Eigen::MatrixXd& m);

// CSV with header "mask,probability", one row per subset mask.
void save_pmf_csv(const std::filesystem::path& path, const PmfTable& table);
PmfTable load_pmf_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace dpplab
