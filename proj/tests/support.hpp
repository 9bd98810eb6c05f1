#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <doctest.h>

#include "metamine/metric_learning.hpp"

namespace testing {

inline metamine::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  metamine::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline bool non_increasing(const metamine::TrainTrace& trace) {
  for (std::size_t k = 1; k < trace.objective.size(); ++k) {
    if (trace.objective[k] > trace.objective[k - 1]) return false;
  }
  return true;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("metamine_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline metamine::DescriptorTable table(const metamine::Matrix& features, metamine::EntityKind kind,
                                       const std::string& prefix) {
  metamine::DescriptorTable t;
  t.kind = kind;
  t.features = features;
  for (Eigen::Index i = 0; i < features.rows(); ++i) t.entity_ids.push_back(prefix + std::to_string(i));
  for (Eigen::Index j = 0; j < features.cols(); ++j) t.feature_names.push_back("f" + std::to_string(j));
  return t;
}

}  // namespace testing
