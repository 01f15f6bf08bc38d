#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "nrq/codes.hpp"
#include "nrq/linalg.hpp"

namespace nrq {

struct HashModel;

/// n×D sample matrix plus the column mean that has been subtracted from it.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Throws DataError on an empty matrix or a non-finite entry.
  explicit FeatureMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  Eigen::Index rows() const noexcept { return data_.rows(); }
  Eigen::Index dim() const noexcept { return data_.cols(); }
  bool centered() const noexcept { return centered_; }
  /// Total mean subtracted so far (all zeros for raw data).
  const Vector& mean() const noexcept { return mean_; }

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.centered_ == b.centered_ && a.data_.rows() == b.data_.rows() &&
           a.data_.cols() == b.data_.cols() && a.data_ == b.data_ && a.mean_ == b.mean_;
  }

 private:
  friend FeatureMatrix center(const FeatureMatrix&);
  friend FeatureMatrix apply_center(const FeatureMatrix&, const Vector&);

  Matrix data_;
  Vector mean_;
  bool centered_ = false;
};

/// Per-sample sorted, de-duplicated class ids.
using LabelSet = std::vector<std::vector<std::uint32_t>>;

enum class FeatureFormat { binary, csv };

/// Picks csv for a ".csv" extension, binary otherwise.
FeatureFormat guess_feature_format(const std::filesystem::path& path);

FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format);
/// Binary output narrows to 32-bit floats; csv output is shortest round-trip decimal.
void save_features(const std::filesystem::path& path, const FeatureMatrix& features,
                   FeatureFormat format);

/// Subtracts column means. Throws UsageError if the input is already centered.
FeatureMatrix center(const FeatureMatrix& features);
/// Subtracts `mean` (length D) and accumulates it into the recorded mean.
FeatureMatrix apply_center(const FeatureMatrix& features, const Vector& mean);

LabelSet load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const LabelSet& labels);
/// Wraps single-label ids into singleton sets.
LabelSet single_labels(const std::vector<std::uint32_t>& ids);

PackedCodes load_codes(const std::filesystem::path& path);
void save_codes(const std::filesystem::path& path, const PackedCodes& codes);

HashModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const HashModel& model);

// In-memory forms of the binary formats.
std::vector<std::uint8_t> serialize_model(const HashModel& model);
HashModel deserialize_model(std::span<const std::uint8_t> bytes);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace nrq
