#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "nrq/dataio.hpp"
#include "nrq/error.hpp"
#include "nrq/hashcore.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nrq::FeatureMatrix;
using nrq::Matrix;
using nrq::Vector;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "nrq_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write_raw(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& b, float f) { put_u32(b, std::bit_cast<std::uint32_t>(f)); }

std::vector<std::uint8_t> feature_header(std::uint32_t n, std::uint32_t d) {
  std::vector<std::uint8_t> b{'B', 'H', 'F', '1'};
  put_u32(b, n);
  put_u32(b, d);
  return b;
}

}  // namespace

TEST_CASE("load_features reads the binary layout") {
  auto bytes = feature_header(2, 3);
  for (float f : {1.f, 2.f, 3.f, 4.f, 5.f, 6.f}) put_f32(bytes, f);
  const auto path = scratch("two_by_three.bhf");
  write_raw(path, bytes);

  const FeatureMatrix m = nrq::load_features(path, nrq::FeatureFormat::binary);
  Matrix expected(2, 3);
  expected << 1, 2, 3, 4, 5, 6;
  CHECK(m.data() == expected);
  CHECK_FALSE(m.centered());
  CHECK(m.mean() == Vector::Zero(3));
}

TEST_CASE("load_features reads csv") {
  const auto path = scratch("small.csv");
  { std::ofstream(path) << "1.0,2.0\n3.0,4.0"; }
  const FeatureMatrix m = nrq::load_features(path, nrq::FeatureFormat::csv);
  Matrix expected(2, 2);
  expected << 1, 2, 3, 4;
  CHECK(m.data() == expected);
}

TEST_CASE("binary payload shorter than the header reports the truncation offset") {
  auto bytes = feature_header(2, 3);
  for (float f : {1.f, 2.f, 3.f, 4.f, 5.f}) put_f32(bytes, f);
  const auto path = scratch("short.bhf");
  write_raw(path, bytes);
  try {
    nrq::load_features(path, nrq::FeatureFormat::binary);
    FAIL("expected an error");
  } catch (const nrq::DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("truncated") != std::string::npos);
    CHECK(msg.find("byte offset 32") != std::string::npos);
  }
}

TEST_CASE("feature file errors") {
  SUBCASE("bad magic") {
    std::vector<std::uint8_t> bytes{'X', 'H', 'F', '1'};
    put_u32(bytes, 1);
    put_u32(bytes, 1);
    put_f32(bytes, 1.f);
    const auto path = scratch("magic.bhf");
    write_raw(path, bytes);
    CHECK_THROWS_AS(nrq::load_features(path, nrq::FeatureFormat::binary), nrq::DataError);
  }
  SUBCASE("non-finite value") {
    auto bytes = feature_header(1, 2);
    put_f32(bytes, 1.f);
    put_f32(bytes, std::numeric_limits<float>::quiet_NaN());
    const auto path = scratch("nan.bhf");
    write_raw(path, bytes);
    CHECK_THROWS_WITH_AS(nrq::load_features(path, nrq::FeatureFormat::binary),
                         doctest::Contains("byte offset 16"), nrq::DataError);
  }
  SUBCASE("ragged csv") {
    const auto path = scratch("ragged.csv");
    { std::ofstream(path) << "1,2\n3\n"; }
    CHECK_THROWS_WITH_AS(nrq::load_features(path, nrq::FeatureFormat::csv), doctest::Contains("line 2"),
                         nrq::DataError);
  }
  SUBCASE("garbage csv field") {
    const auto path = scratch("garbage.csv");
    { std::ofstream(path) << "1,2\n3,x\n"; }
    CHECK_THROWS_AS(nrq::load_features(path, nrq::FeatureFormat::csv), nrq::DataError);
  }
  SUBCASE("empty files") {
    const auto path = scratch("empty.csv");
    { std::ofstream(path) << ""; }
    CHECK_THROWS_AS(nrq::load_features(path, nrq::FeatureFormat::csv), nrq::DataError);
    const auto bin = scratch("empty.bhf");
    write_raw(bin, feature_header(0, 3));
    CHECK_THROWS_AS(nrq::load_features(bin, nrq::FeatureFormat::binary), nrq::DataError);
  }
}

TEST_CASE("center subtracts column means") {
  Matrix raw(2, 2);
  raw << 1, 1, 3, 3;
  const FeatureMatrix c = nrq::center(FeatureMatrix(raw));
  Matrix expected(2, 2);
  expected << -1, -1, 1, 1;
  CHECK(c.data() == expected);
  CHECK(c.mean() == Vector::Constant(2, 2.0));
  CHECK(c.centered());
  CHECK_THROWS_AS(nrq::center(c), nrq::UsageError);

  const FeatureMatrix zero = nrq::center(FeatureMatrix(Matrix::Zero(4, 2)));
  CHECK(zero.data() == Matrix::Zero(4, 2));
  CHECK(zero.mean() == Vector::Zero(2));

  Matrix single(1, 2);
  single << 5, 7;
  const FeatureMatrix s = nrq::center(FeatureMatrix(single));
  CHECK(s.data() == Matrix::Zero(1, 2));
  CHECK(s.mean() == (Vector(2) << 5, 7).finished());
}

TEST_CASE("centered columns have zero mean") {
  std::mt19937_64 gen(4);
  const Matrix raw = oracle::random_matrix(gen, 40, 5, 3.0).array() + 10.0;
  const FeatureMatrix c = nrq::center(FeatureMatrix(raw));
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double mean = c.data().col(j).mean();
    const double sd = std::sqrt(c.data().col(j).squaredNorm() / raw.rows());
    CHECK(std::abs(mean) <= 1e-9 * (sd + 1.0));
  }
}

TEST_CASE("apply_center uses the supplied mean") {
  Matrix q(1, 2);
  q << 3, 3;
  const FeatureMatrix out = nrq::apply_center(FeatureMatrix(q), Vector::Constant(2, 2.0));
  CHECK(out.data() == Matrix::Ones(1, 2));
  CHECK(out.centered());
  CHECK(nrq::apply_center(FeatureMatrix(q), Vector::Zero(2)).data() == q);
  CHECK_THROWS_AS(nrq::apply_center(FeatureMatrix(q), Vector::Zero(3)), nrq::DataError);

  // center followed by apply_center with the recorded mean on the raw data agree exactly.
  std::mt19937_64 gen(8);
  const FeatureMatrix raw(oracle::random_matrix(gen, 12, 4));
  const FeatureMatrix c = nrq::center(raw);
  CHECK(nrq::apply_center(raw, c.mean()) == c);
}

TEST_CASE("pack_codes layout") {
  nrq::BinaryCodeMatrix::Storage s(1, 3);
  s << 1, -1, 1;
  const auto p = nrq::pack_codes(nrq::BinaryCodeMatrix(s));
  REQUIRE(p.bytes().size() == 1);
  CHECK(p.bytes()[0] == 0b00000101);

  nrq::BinaryCodeMatrix::Storage ones = nrq::BinaryCodeMatrix::Storage::Ones(1, 8);
  CHECK(nrq::pack_codes(nrq::BinaryCodeMatrix(ones)).bytes()[0] == 0xFF);

  nrq::BinaryCodeMatrix::Storage bad(1, 2);
  bad << 1, 0;
  CHECK_THROWS_AS(nrq::BinaryCodeMatrix{bad}, nrq::DataError);
  CHECK_THROWS_AS(nrq::PackedCodes(1, 3, {0b00001000}), nrq::DataError);
}

TEST_CASE("pack/unpack round-trip for every K in 1..256") {
  std::mt19937_64 gen(99);
  for (Eigen::Index k = 1; k <= 256; ++k) {
    const auto codes = oracle::random_signs(gen, 5, k);
    REQUIRE(nrq::unpack_codes(nrq::pack_codes(codes)) == codes);
  }
  const auto c = oracle::random_signs(gen, 5, 13);
  CHECK(nrq::unpack_codes(nrq::pack_codes(c)) == c);
}

TEST_CASE("file formats round-trip bit-exactly") {
  std::mt19937_64 gen(11);
  SUBCASE("BHF1 with float-representable values") {
    Matrix m = oracle::random_matrix(gen, 7, 5).cast<float>().cast<double>();
    const auto path = scratch("rt.bhf");
    nrq::save_features(path, FeatureMatrix(m), nrq::FeatureFormat::binary);
    CHECK(nrq::load_features(path, nrq::FeatureFormat::binary) == FeatureMatrix(m));
  }
  SUBCASE("csv with full doubles") {
    const Matrix m = oracle::random_matrix(gen, 6, 3, 1e3);
    const auto path = scratch("rt.csv");
    nrq::save_features(path, FeatureMatrix(m), nrq::FeatureFormat::csv);
    CHECK(nrq::load_features(path, nrq::FeatureFormat::csv) == FeatureMatrix(m));
  }
  SUBCASE("BHC1") {
    const auto packed = nrq::pack_codes(oracle::random_signs(gen, 9, 21));
    const auto path = scratch("rt.bhc");
    nrq::save_codes(path, packed);
    CHECK(nrq::load_codes(path) == packed);
  }
  SUBCASE("labels") {
    nrq::LabelSet labels{{0}, {1, 4}, {2}, {0, 3, 9}};
    const auto path = scratch("rt.labels");
    nrq::save_labels(path, labels);
    CHECK(nrq::load_labels(path) == labels);
  }
}

TEST_CASE("label parsing") {
  const auto path = scratch("labels.txt");
  { std::ofstream(path) << "3\n1,0\n2,2\n"; }
  const auto labels = nrq::load_labels(path);
  CHECK(labels == nrq::LabelSet{{3}, {0, 1}, {2}});
  { std::ofstream(path) << "1\n\n2\n"; }
  CHECK_THROWS_WITH_AS(nrq::load_labels(path), doctest::Contains("line 2"), nrq::DataError);
  { std::ofstream(path) << "1\n-2\n"; }
  CHECK_THROWS_AS(nrq::load_labels(path), nrq::DataError);
}

namespace {

nrq::HashModel small_model() {
  std::mt19937_64 gen(5);
  nrq::HashModel m;
  m.W = oracle::random_matrix(gen, 4, 2);
  m.R = nrq::random_orthogonal(2, 3);
  m.mean = oracle::random_matrix(gen, 4, 1);
  m.config.alpha = 3.0;
  m.config.beta = 0.01;
  m.config.regularizer = nrq::Regularizer::dso;
  return m;
}

}  // namespace

TEST_CASE("BHM1 model round-trip and corruption") {
  const auto model = small_model();
  const auto path = scratch("model.bhm");
  nrq::save_model(path, model);
  const auto back = nrq::load_model(path);
  CHECK(back.W == model.W);
  CHECK(back.R == model.R);
  CHECK(back.mean == model.mean);
  CHECK(back.config.alpha == model.config.alpha);
  CHECK(back.config.beta == model.config.beta);
  CHECK(back.config.regularizer == nrq::Regularizer::dso);

  auto bytes = nrq::serialize_model(model);
  CHECK(bytes.size() == 4 + 4 + 4 + 1 + 8 + 8 + 8 * (4 + 8 + 4));

  SUBCASE("wrong magic names the expected one") {
    auto bad = bytes;
    bad[0] = 'Z';
    CHECK_THROWS_WITH_AS(nrq::deserialize_model(bad), doctest::Contains("expected 'BHM1'"),
                         nrq::FormatError);
  }
  SUBCASE("newer version") {
    auto bad = bytes;
    bad[3] = '2';
    CHECK_THROWS_WITH_AS(nrq::deserialize_model(bad), doctest::Contains("version mismatch"),
                         nrq::FormatError);
  }
  SUBCASE("truncated") {
    auto bad = bytes;
    bad.resize(bad.size() - 5);
    try {
      nrq::deserialize_model(bad);
      FAIL("expected an error");
    } catch (const nrq::FormatError& e) {
      CHECK(e.position() == bad.size());
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
  }
  SUBCASE("non-orthogonal rotation") {
    auto bad = bytes;
    bad[bad.size() - 2] ^= 0x40;
    CHECK_THROWS_WITH_AS(nrq::deserialize_model(bad), doctest::Contains("corrupted"), nrq::FormatError);
  }
}
