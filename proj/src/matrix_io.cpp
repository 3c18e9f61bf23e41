#include "dpplab/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dpplab {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

Eigen::MatrixXd load_matrix_json(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad JSON in " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("data")) {
    throw IoError(path.string() + ": expected object with \"n\" and \"data\"");
  }
  int n = j.at("n").get<int>();
  check_ground_size(n);
  const auto& data = j.at("data");
  if (!data.is_array() ||
      data.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw IoError(path.string() + ": \"data\" must hold n*n numbers");
  }
  Eigen::MatrixXd m(n, n);
  std::size_t idx = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = data.at(idx++).get<double>();
  }
  return symmetrized(m);  // throws ValidationError on asymmetry
}

void save_matrix_json(const std::filesystem::path& path,
                      const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["n"] = static_cast<int>(m.rows());
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = data;
  write_text_file(path, j.dump(2) + "\n");
}

void save_pmf_csv(const std::filesystem::path& path, const PmfTable& table) {
  std::string out = "mask,probability\n";
  for (Mask J = 0; J < table.p.size(); ++J) {
    out += std::to_string(J) + "," + format_double(table.p[J]) + "\n";
  }
  write_text_file(path, out);
}

PmfTable load_pmf_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("mask,probability", 0) != 0) {
    throw IoError(path.string() + ": missing pmf CSV header");
  }
  std::vector<double> probs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError(path.string() + ": malformed row '" + line + "'");
    }
    if (std::stoull(line.substr(0, comma)) != row) {
      throw IoError(path.string() + ": masks must be consecutive from 0");
    }
    probs.push_back(std::stod(line.substr(comma + 1)));
    ++row;
  }
  int n = 0;
  while ((std::size_t{1} << n) < probs.size()) ++n;
  if ((std::size_t{1} << n) != probs.size()) {
    throw IoError(path.string() + ": row count is not a power of two");
  }
  PmfTable t;
  t.n = n;
  t.p = std::move(probs);
  return t;
}

}  // namespace dpplab
