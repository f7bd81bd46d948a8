#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "oracles.hpp"
#include "skelchaos/linalg.hpp"

namespace test {

inline oracle::Mat to_mat(const skelchaos::Matrix& m) {
  oracle::Mat out = oracle::zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline std::vector<double> to_vec(const skelchaos::Vector& v) { return {v.data(), v.data() + v.size()}; }

inline skelchaos::Vector from_vec(const std::vector<double>& v) {
  return Eigen::Map<const skelchaos::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline skelchaos::Matrix random_matrix(std::mt19937_64& gen, Eigen::Index r, Eigen::Index c, double lo = -1.0,
                                       double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  skelchaos::Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(gen);
  return m;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("skelchaos-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace test
