#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "kmp/types.hpp"

namespace kmp::test {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  return m;
}

inline Matrix random_spd(Index n, std::uint64_t seed) {
  const Matrix g = random_matrix(n, n, seed);
  return g * g.transpose() + static_cast<double>(n) * 1e-1 * Matrix::Identity(n, n);
}

inline std::filesystem::path temp_dir() {
  const char* base = std::getenv("KMP_TEST_TMP");
  std::filesystem::path dir = base ? std::filesystem::path(base) : std::filesystem::temp_directory_path();
  dir /= "kmp_test_files";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace kmp::test
