#include "nrq/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "nrq/error.hpp"

namespace nrq::synthetic {

LabeledData gaussian_mixture(const MixtureSpec& mix) {
  if (mix.samples < 1 || mix.dim < 1 || mix.classes < 1) {
    throw UsageError("mixture needs positive samples, dimension and class count");
  }
  std::mt19937_64 gen(mix.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix centers(mix.classes, mix.dim);
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    for (Eigen::Index j = 0; j < mix.dim; ++j) centers(c, j) = mix.center_scale * normal(gen);
  }
  Matrix data(mix.samples, mix.dim);
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(mix.samples));
  for (Eigen::Index i = 0; i < mix.samples; ++i) {
    const auto c = static_cast<std::uint32_t>(i % mix.classes);
    labels[static_cast<std::size_t>(i)] = c;
    for (Eigen::Index j = 0; j < mix.dim; ++j) data(i, j) = centers(c, j) + mix.noise * normal(gen);
  }
  return {FeatureMatrix(std::move(data)), std::move(labels)};
}

LabeledData toy2d(Eigen::Index points, std::uint64_t seed) {
  if (points < 4) throw UsageError("toy set needs at least four points");
  // Elongated, rotated clusters so that rotation alone cannot snap them onto the vertices.
  const double cx[4] = {1.6, -1.2, 0.4, -0.5};
  const double cy[4] = {0.9, 1.1, -1.4, -0.3};
  const double major[4] = {0.55, 0.35, 0.6, 0.3};
  const double minor[4] = {0.15, 0.2, 0.12, 0.18};
  const double angle[4] = {0.4, -0.9, 1.2, 0.1};
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix data(points, 2);
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(points));
  for (Eigen::Index i = 0; i < points; ++i) {
    const int c = static_cast<int>(i % 4);
    const double a = major[c] * normal(gen);
    const double b = minor[c] * normal(gen);
    data(i, 0) = cx[c] + std::cos(angle[c]) * a - std::sin(angle[c]) * b;
    data(i, 1) = cy[c] + std::sin(angle[c]) * a + std::cos(angle[c]) * b;
    labels[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(c);
  }
  return {FeatureMatrix(std::move(data)), std::move(labels)};
}

namespace {

Split finish(std::size_t n, std::vector<std::size_t> queries) {
  std::sort(queries.begin(), queries.end());
  Split split;
  split.queries = std::move(queries);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (next < split.queries.size() && split.queries[next] == i) {
      ++next;
    } else {
      split.database.push_back(i);
    }
  }
  return split;
}

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("query fraction must lie in (0, 1)");
}

}  // namespace

Split per_class_split(const std::vector<std::uint32_t>& labels, double fraction, std::uint64_t seed) {
  check_fraction(fraction);
  std::map<std::uint32_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::mt19937_64 gen(seed);
  std::vector<std::size_t> queries;
  for (auto& [cls, idx] : members) {
    std::shuffle(idx.begin(), idx.end(), gen);
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (take == 0 && idx.size() >= 2) take = 1;
    take = std::min(take, idx.size() - 1);
    queries.insert(queries.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return finish(labels.size(), std::move(queries));
}

Split uniform_split(std::size_t n, double fraction, std::uint64_t seed) {
  check_fraction(fraction);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  std::shuffle(idx.begin(), idx.end(), gen);
  auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  take = std::clamp<std::size_t>(take, n >= 2 ? 1 : 0, n >= 1 ? n - 1 : 0);
  idx.resize(take);
  return finish(n, std::move(idx));
}

FeatureMatrix select_rows(const FeatureMatrix& features, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), features.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = features.data().row(static_cast<Eigen::Index>(rows[i]));
  }
  return FeatureMatrix(std::move(out));
}

}  // namespace nrq::synthetic
