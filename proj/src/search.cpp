#include "nrq/search.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>
#include <unordered_set>

#include "nrq/error.hpp"

namespace nrq::search {

int hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, std::size_t bits) {
  const std::size_t stride = PackedCodes::stride_for(bits);
  if (bits == 0 || a.size() != stride || b.size() != stride) {
    throw DataError("code length mismatch: " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()) + " bytes for " + std::to_string(bits) + "-bit codes");
  }
  int count = 0;
  std::size_t i = 0;
  for (; i + 8 <= stride; i += 8) {
    std::uint64_t wa = 0;
    std::uint64_t wb = 0;
    std::memcpy(&wa, a.data() + i, 8);
    std::memcpy(&wb, b.data() + i, 8);
    count += std::popcount(wa ^ wb);
  }
  for (; i < stride; ++i) {
    unsigned diff = a[i] ^ b[i];
    if (i == stride - 1 && bits % 8 != 0) diff &= (1u << (bits % 8)) - 1u;
    count += std::popcount(diff);
  }
  return count;
}

CodeDatabase::CodeDatabase(PackedCodes codes) : codes_(std::move(codes)) {
  ids_.resize(codes_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = static_cast<std::int64_t>(i);
}

CodeDatabase::CodeDatabase(PackedCodes codes, std::vector<std::int64_t> ids)
    : codes_(std::move(codes)), ids_(std::move(ids)) {
  if (ids_.size() != codes_.size()) {
    throw DataError("database has " + std::to_string(codes_.size()) + " codes but " +
                    std::to_string(ids_.size()) + " ids");
  }
  std::unordered_set<std::int64_t> seen(ids_.begin(), ids_.end());
  if (seen.size() != ids_.size()) throw DataError("database ids are not unique");
}

RankedList rank_all(std::span<const std::uint8_t> query, std::size_t bits, const CodeDatabase& db) {
  if (bits != db.bits()) {
    throw DataError("query has " + std::to_string(bits) + "-bit codes, database has " +
                    std::to_string(db.bits()));
  }
  RankedList out(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    out[i] = {db.ids()[i], hamming(query, db.codes().row(i), bits)};
  }
  std::sort(out.begin(), out.end(), [](const RankedEntry& x, const RankedEntry& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.id < y.id;
  });
  return out;
}

}  // namespace nrq::search
