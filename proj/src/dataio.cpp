#include "nrq/dataio.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "nrq/error.hpp"
#include "nrq/hashcore.hpp"

namespace nrq {

namespace {

constexpr std::array<char, 4> kFeatureMagic{'B', 'H', 'F', '1'};
constexpr std::array<char, 4> kCodeMagic{'B', 'H', 'C', '1'};
constexpr std::array<char, 4> kModelMagic{'B', 'H', 'M', '1'};

std::string magic_string(const std::array<char, 4>& m) { return std::string(m.begin(), m.end()); }

class ByteWriter {
 public:
  void magic(const std::array<char, 4>& m) {
    for (char c : m) out_.push_back(static_cast<std::uint8_t>(c));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void require(std::size_t count, const char* what) const {
    if (remaining() < count) {
      throw FormatError(std::string("truncated file: expected ") + what, FormatError::Unit::byte,
                        data_.size());
    }
  }

  std::array<char, 4> magic() {
    require(4, "4-byte magic");
    std::array<char, 4> m{};
    for (auto& c : m) c = static_cast<char>(data_[pos_++]);
    return m;
  }
  std::uint8_t u8(const char* what) {
    require(1, what);
    return data_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    require(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    require(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_++]} << (8 * i);
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::span<const std::uint8_t> bytes(std::size_t count, const char* what) {
    require(count, what);
    auto s = data_.subspan(pos_, count);
    pos_ += count;
    return s;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void expect_magic(ByteReader& in, const std::array<char, 4>& expected) {
  const auto got = in.magic();
  if (got == expected) return;
  const bool same_family = std::equal(got.begin(), got.begin() + 3, expected.begin());
  if (same_family) {
    throw FormatError("version mismatch: file has format '" + magic_string(got) +
                          "', this build reads '" + magic_string(expected) + "'",
                      FormatError::Unit::byte, 3);
  }
  throw FormatError("bad magic: expected '" + magic_string(expected) + "'", FormatError::Unit::byte,
                    0);
}

void expect_end(const ByteReader& in) {
  if (in.remaining() != 0) {
    throw FormatError("unexpected trailing bytes after payload", FormatError::Unit::byte,
                      in.offset());
  }
}

std::uint32_t checked_u32(Eigen::Index v, const char* what) {
  if (v < 0 || static_cast<std::uint64_t>(v) > 0xFFFFFFFFu) {
    throw DataError(std::string(what) + " does not fit the 32-bit header field");
  }
  return static_cast<std::uint32_t>(v);
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

// ---- FeatureMatrix ---------------------------------------------------------

FeatureMatrix::FeatureMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw DataError("feature matrix must have at least one row and one column");
  }
  if (!data_.allFinite()) throw DataError("feature matrix contains a non-finite value");
  mean_ = Vector::Zero(data_.cols());
}

FeatureMatrix center(const FeatureMatrix& features) {
  if (features.centered()) throw UsageError("features are already centered");
  const Vector mean = features.data().colwise().mean().transpose();
  return apply_center(features, mean);
}

FeatureMatrix apply_center(const FeatureMatrix& features, const Vector& mean) {
  if (mean.size() != features.dim()) {
    throw DataError("centering mean has length " + std::to_string(mean.size()) +
                    " but features have dimension " + std::to_string(features.dim()));
  }
  if (!mean.allFinite()) throw DataError("centering mean contains a non-finite value");
  FeatureMatrix out = features;
  out.data_.rowwise() -= mean.transpose();
  out.mean_ = features.mean_ + mean;
  out.centered_ = true;
  return out;
}

// ---- feature files ---------------------------------------------------------

FeatureFormat guess_feature_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FeatureFormat::csv : FeatureFormat::binary;
}

namespace {

FeatureMatrix parse_feature_binary(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  expect_magic(in, kFeatureMagic);
  const std::uint32_t n = in.u32("u32 sample count");
  const std::uint32_t d = in.u32("u32 dimension");
  if (n == 0 || d == 0) {
    throw FormatError("header declares an empty matrix (n=" + std::to_string(n) +
                          ", D=" + std::to_string(d) + ")",
                      FormatError::Unit::byte, 4);
  }
  const std::uint64_t payload = std::uint64_t{n} * d * 4;
  if (in.remaining() < payload) {
    throw FormatError("payload truncated: header declares n=" + std::to_string(n) +
                          ", D=" + std::to_string(d) + " (" + std::to_string(payload) +
                          " bytes) but only " + std::to_string(in.remaining()) + " follow",
                      FormatError::Unit::byte, bytes.size());
  }
  if (in.remaining() > payload) {
    throw FormatError("payload longer than header dimensions n=" + std::to_string(n) +
                          ", D=" + std::to_string(d),
                      FormatError::Unit::byte, 12 + payload);
  }
  Matrix data(n, d);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      const std::size_t at = in.offset();
      const float v = in.f32("float");
      if (!std::isfinite(v)) throw FormatError("non-finite feature value", FormatError::Unit::byte, at);
      data(i, j) = v;
    }
  }
  return FeatureMatrix(std::move(data));
}

FeatureMatrix parse_feature_csv(std::string_view text) {
  std::vector<double> values;
  Eigen::Index cols = -1;
  Eigen::Index rows = 0;
  std::uint64_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim_cr(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    Eigen::Index count = 0;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      std::string_view field = line.substr(pos, comma == std::string_view::npos ? line.size() - pos
                                                                                : comma - pos);
      double v = 0.0;
      const auto* first = field.data();
      const auto* last = field.data() + field.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (field.empty() || ec != std::errc() || ptr != last) {
        throw FormatError("cannot parse '" + std::string(field) + "' as a number",
                          FormatError::Unit::line, line_no);
      }
      if (!std::isfinite(v)) throw FormatError("non-finite feature value", FormatError::Unit::line, line_no);
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError("ragged row: expected " + std::to_string(cols) + " values, found " +
                            std::to_string(count),
                        FormatError::Unit::line, line_no);
    }
    ++rows;
  }
  if (rows == 0) throw FormatError("csv file contains no rows", FormatError::Unit::line, line_no);
  Matrix data(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) data(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return FeatureMatrix(std::move(data));
}

}  // namespace

FeatureMatrix load_features(const std::filesystem::path& path, FeatureFormat format) {
  const auto bytes = read_file(path);
  try {
    if (format == FeatureFormat::binary) return parse_feature_binary(bytes);
    return parse_feature_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const FormatError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& features,
                   FeatureFormat format) {
  const Matrix& m = features.data();
  if (format == FeatureFormat::binary) {
    ByteWriter out;
    out.magic(kFeatureMagic);
    out.u32(checked_u32(m.rows(), "sample count"));
    out.u32(checked_u32(m.cols(), "dimension"));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out.f32(static_cast<float>(m(i, j)));
    }
    write_bytes(path, out.take());
    return;
  }
  std::string text;
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) text.push_back(',');
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, m(i, j));
      text.append(buf, ptr);
    }
    text.push_back('\n');
  }
  write_file_atomic(path, text);
}

// ---- labels ----------------------------------------------------------------

LabelSet load_labels(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  LabelSet labels;
  std::uint64_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim_cr(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) {
      throw DataError(path.string() + ": " +
                      FormatError("empty label line", FormatError::Unit::line, line_no).what());
    }
    std::vector<std::uint32_t> ids;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      std::string_view field = line.substr(pos, comma == std::string_view::npos ? line.size() - pos
                                                                                : comma - pos);
      std::uint32_t id = 0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), id);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(path.string() + ": " +
                        FormatError("cannot parse '" + std::string(field) + "' as a class id",
                                    FormatError::Unit::line, line_no)
                            .what());
      }
      ids.push_back(id);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    labels.push_back(std::move(ids));
  }
  if (labels.empty()) throw DataError(path.string() + ": label file is empty");
  return labels;
}

void save_labels(const std::filesystem::path& path, const LabelSet& labels) {
  std::string text;
  for (const auto& set : labels) {
    if (set.empty()) throw DataError("cannot save an empty label set");
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i) text.push_back(',');
      text += std::to_string(set[i]);
    }
    text.push_back('\n');
  }
  write_file_atomic(path, text);
}

LabelSet single_labels(const std::vector<std::uint32_t>& ids) {
  LabelSet out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back({id});
  return out;
}

// ---- binary codes ----------------------------------------------------------

BinaryCodeMatrix::BinaryCodeMatrix(Storage codes) : codes_(std::move(codes)) {
  for (Eigen::Index j = 0; j < codes_.cols(); ++j) {
    for (Eigen::Index i = 0; i < codes_.rows(); ++i) {
      const auto c = codes_(i, j);
      if (c != 1 && c != -1) {
        throw DataError("code entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is " +
                        std::to_string(int{c}) + ", expected -1 or +1");
      }
    }
  }
}

BinaryCodeMatrix BinaryCodeMatrix::sign_of(const Matrix& values) {
  BinaryCodeMatrix out;
  out.codes_ = values.unaryExpr([](double v) -> std::int8_t { return v >= 0.0 ? 1 : -1; });
  return out;
}

PackedCodes::PackedCodes(std::size_t n, std::size_t bits, std::vector<std::uint8_t> bytes)
    : n_(n), bits_(bits), bytes_(std::move(bytes)) {
  if (bits_ == 0) throw DataError("code length must be at least one bit");
  if (bytes_.size() != n_ * stride()) {
    throw DataError("packed code buffer has " + std::to_string(bytes_.size()) + " bytes, expected " +
                    std::to_string(n_ * stride()));
  }
  if (bits_ % 8 != 0) {
    const auto pad_mask = static_cast<std::uint8_t>(0xFFu << (bits_ % 8));
    for (std::size_t i = 0; i < n_; ++i) {
      if (bytes_[i * stride() + stride() - 1] & pad_mask) {
        throw DataError("padding bits set in packed code " + std::to_string(i));
      }
    }
  }
}

PackedCodes pack_codes(const BinaryCodeMatrix& codes) {
  const auto n = static_cast<std::size_t>(codes.rows());
  const auto k = static_cast<std::size_t>(codes.bits());
  const std::size_t stride = PackedCodes::stride_for(k);
  std::vector<std::uint8_t> bytes(n * stride, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (codes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0) {
        bytes[i * stride + j / 8] |= static_cast<std::uint8_t>(1u << (j % 8));
      }
    }
  }
  return PackedCodes(n, k, std::move(bytes));
}

BinaryCodeMatrix unpack_codes(const PackedCodes& packed) {
  BinaryCodeMatrix::Storage out(static_cast<Eigen::Index>(packed.size()),
                                static_cast<Eigen::Index>(packed.bits()));
  for (std::size_t i = 0; i < packed.size(); ++i) {
    const auto row = packed.row(i);
    for (std::size_t j = 0; j < packed.bits(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (row[j / 8] >> (j % 8)) & 1u ? 1 : -1;
    }
  }
  return BinaryCodeMatrix(std::move(out));
}

PackedCodes load_codes(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    ByteReader in(bytes);
    expect_magic(in, kCodeMagic);
    const std::uint32_t n = in.u32("u32 sample count");
    const std::uint32_t k = in.u32("u32 code length");
    if (k == 0) throw FormatError("header declares zero-bit codes", FormatError::Unit::byte, 8);
    const std::uint64_t payload = std::uint64_t{n} * PackedCodes::stride_for(k);
    if (in.remaining() < payload) {
      throw FormatError("payload truncated: header declares n=" + std::to_string(n) + ", K=" +
                            std::to_string(k),
                        FormatError::Unit::byte, bytes.size());
    }
    const auto body = in.bytes(payload, "code records");
    expect_end(in);
    return PackedCodes(n, k, std::vector<std::uint8_t>(body.begin(), body.end()));
  } catch (const FormatError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_codes(const std::filesystem::path& path, const PackedCodes& codes) {
  ByteWriter out;
  out.magic(kCodeMagic);
  out.u32(checked_u32(static_cast<Eigen::Index>(codes.size()), "sample count"));
  out.u32(checked_u32(static_cast<Eigen::Index>(codes.bits()), "code length"));
  out.bytes(codes.bytes());
  write_bytes(path, out.take());
}

// ---- models ----------------------------------------------------------------

std::vector<std::uint8_t> serialize_model(const HashModel& model) {
  const Eigen::Index d = model.dim();
  const Eigen::Index k = model.bits();
  if (model.R.rows() != k || model.R.cols() != k || model.mean.size() != d) {
    throw DataError("model matrices have inconsistent shapes");
  }
  ByteWriter out;
  out.magic(kModelMagic);
  out.u32(checked_u32(d, "dimension"));
  out.u32(checked_u32(k, "code length"));
  out.u8(static_cast<std::uint8_t>(model.config.regularizer));
  out.f64(model.config.alpha);
  out.f64(model.config.beta);
  for (Eigen::Index i = 0; i < d; ++i) out.f64(model.mean(i));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out.f64(model.W(i, j));
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out.f64(model.R(i, j));
  }
  return out.take();
}

HashModel deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  expect_magic(in, kModelMagic);
  const std::uint32_t d = in.u32("u32 dimension");
  const std::uint32_t k = in.u32("u32 code length");
  if (d == 0 || k == 0 || k > d) {
    throw FormatError("invalid header dimensions D=" + std::to_string(d) + ", K=" + std::to_string(k),
                      FormatError::Unit::byte, 4);
  }
  const std::size_t reg_at = in.offset();
  const std::uint8_t reg = in.u8("u8 regularizer id");
  if (reg > 2) {
    throw FormatError("unknown regularizer id " + std::to_string(reg), FormatError::Unit::byte, reg_at);
  }
  HashModel model;
  model.config.regularizer = static_cast<Regularizer>(reg);
  model.config.alpha = in.f64("f64 alpha");
  model.config.beta = in.f64("f64 beta");
  model.config.bits = static_cast<int>(k);
  const std::uint64_t payload = (std::uint64_t{d} + std::uint64_t{d} * k + std::uint64_t{k} * k) * 8;
  if (in.remaining() < payload) {
    throw FormatError("payload truncated for D=" + std::to_string(d) + ", K=" + std::to_string(k),
                      FormatError::Unit::byte, bytes.size());
  }
  model.mean.resize(d);
  for (std::uint32_t i = 0; i < d; ++i) model.mean(i) = in.f64("f64 mean");
  model.W.resize(d, k);
  for (std::uint32_t i = 0; i < d; ++i) {
    for (std::uint32_t j = 0; j < k; ++j) model.W(i, j) = in.f64("f64 W");
  }
  model.R.resize(k, k);
  for (std::uint32_t i = 0; i < k; ++i) {
    for (std::uint32_t j = 0; j < k; ++j) model.R(i, j) = in.f64("f64 R");
  }
  expect_end(in);
  if (!std::isfinite(model.config.alpha) || !std::isfinite(model.config.beta) ||
      !model.mean.allFinite() || !model.W.allFinite() || !model.R.allFinite()) {
    throw FormatError("corrupted payload: non-finite value", FormatError::Unit::byte, 13);
  }
  const double orth = (model.R.transpose() * model.R - Matrix::Identity(k, k)).norm();
  if (orth > 1e-6) {
    throw FormatError("corrupted payload: rotation is not orthogonal (‖RᵀR − I‖ = " +
                          std::to_string(orth) + ")",
                      FormatError::Unit::byte, bytes.size() - std::size_t{k} * k * 8);
  }
  return model;
}

HashModel load_model(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return deserialize_model(bytes);
  } catch (const FormatError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const HashModel& model) {
  write_bytes(path, serialize_model(model));
}

// ---- files -----------------------------------------------------------------

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace nrq
