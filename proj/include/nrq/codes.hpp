#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "nrq/linalg.hpp"

namespace nrq {

/// n×K matrix whose every entry is exactly -1 or +1.
class BinaryCodeMatrix {
 public:
  using Storage = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

  BinaryCodeMatrix() = default;
  /// Throws DataError if any entry is outside {-1, +1}.
  explicit BinaryCodeMatrix(Storage codes);

  /// Entrywise sign with sgn(0) = +1.
  static BinaryCodeMatrix sign_of(const Matrix& values);

  Eigen::Index rows() const noexcept { return codes_.rows(); }
  Eigen::Index bits() const noexcept { return codes_.cols(); }
  std::int8_t operator()(Eigen::Index i, Eigen::Index j) const { return codes_(i, j); }
  const Storage& codes() const noexcept { return codes_; }
  Matrix to_real() const { return codes_.cast<double>(); }

  friend bool operator==(const BinaryCodeMatrix& a, const BinaryCodeMatrix& b) {
    return a.codes_.rows() == b.codes_.rows() && a.codes_.cols() == b.codes_.cols() &&
           a.codes_ == b.codes_;
  }

 private:
  Storage codes_;
};

/// Packed sign codes: bit j of a row lives in byte j/8 at position j%8 (LSB first);
/// a set bit encodes +1. Padding bits of the last byte are always zero.
class PackedCodes {
 public:
  PackedCodes() = default;
  /// Throws DataError if the byte count does not match n·ceil(K/8) or padding bits are set.
  PackedCodes(std::size_t n, std::size_t bits, std::vector<std::uint8_t> bytes);

  static std::size_t stride_for(std::size_t bits) noexcept { return (bits + 7) / 8; }

  std::size_t size() const noexcept { return n_; }
  std::size_t bits() const noexcept { return bits_; }
  std::size_t stride() const noexcept { return stride_for(bits_); }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return {bytes_.data() + i * stride(), stride()};
  }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  friend bool operator==(const PackedCodes&, const PackedCodes&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t bits_ = 0;
  std::vector<std::uint8_t> bytes_;
};

PackedCodes pack_codes(const BinaryCodeMatrix& codes);
BinaryCodeMatrix unpack_codes(const PackedCodes& packed);

}  // namespace nrq
