#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "geovote/geometry.hpp"
#include "geovote/rng.hpp"
#include "geovote/verification.hpp"

namespace geovote::testing {

inline std::vector<ScoreVector> random_rows(Rng& rng, std::size_t m, std::size_t p) {
  std::vector<ScoreVector> rows;
  rows.reserve(m);
  for (std::size_t j = 0; j < m; ++j) rows.push_back(random_score_vector(rng, p));
  return rows;
}

inline std::vector<double> one_hot(std::size_t p, std::size_t k) {
  std::vector<double> v(p, 0.0);
  v[k] = 1.0;
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace geovote::testing
