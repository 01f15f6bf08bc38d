#pragma once

#include <cstdint>
#include <vector>

#include "nrq/dataio.hpp"

namespace nrq::synthetic {

struct MixtureSpec {
  Eigen::Index samples = 1000;
  Eigen::Index dim = 16;
  int classes = 10;
  double center_scale = 1.0;  // std-dev of component centers per coordinate
  double noise = 0.5;         // within-component std-dev
  std::uint64_t seed = 0;
};

struct LabeledData {
  FeatureMatrix features;  // raw, not centered
  std::vector<std::uint32_t> labels;
};

/// Isotropic Gaussian mixture; sample i belongs to class i mod classes.
LabeledData gaussian_mixture(const MixtureSpec& mix);

/// Four-component 2-D mixture used for the toy visualisation.
LabeledData toy2d(Eigen::Index points, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> queries;   // ascending sample indices
  std::vector<std::size_t> database;  // the rest, ascending
};

/// Samples round(fraction·|class|) queries from each class (at least one
/// when the class has two or more members), seeded.
Split per_class_split(const std::vector<std::uint32_t>& labels, double fraction,
                      std::uint64_t seed);
/// Samples round(fraction·n) queries uniformly, seeded.
Split uniform_split(std::size_t n, double fraction, std::uint64_t seed);

FeatureMatrix select_rows(const FeatureMatrix& features, const std::vector<std::size_t>& rows);

}  // namespace nrq::synthetic
