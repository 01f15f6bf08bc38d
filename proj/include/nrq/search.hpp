#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nrq/codes.hpp"

namespace nrq::search {

/// Number of differing bits among the first `bits` positions. Throws
/// DataError if either code is not ceil(bits/8) bytes long.
int hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, std::size_t bits);

class CodeDatabase {
 public:
  /// ids default to 0..n-1.
  explicit CodeDatabase(PackedCodes codes);
  /// Throws DataError unless ids are unique and one per code.
  CodeDatabase(PackedCodes codes, std::vector<std::int64_t> ids);

  const PackedCodes& codes() const noexcept { return codes_; }
  const std::vector<std::int64_t>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t bits() const noexcept { return codes_.bits(); }

 private:
  PackedCodes codes_;
  std::vector<std::int64_t> ids_;
};

struct RankedEntry {
  std::int64_t id;
  int distance;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Ascending distance, ties by ascending id.
using RankedList = std::vector<RankedEntry>;

/// Ranks the whole database against one query code (exact linear scan).
RankedList rank_all(std::span<const std::uint8_t> query, std::size_t bits, const CodeDatabase& db);

}  // namespace nrq::search
