#pragma once

// Independent reference computations used only by the test suites. Nothing
// here calls the routine it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nrq/codes.hpp"
#include "nrq/dataio.hpp"

namespace oracle {

using nrq::Matrix;
using nrq::Vector;

inline Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(gen);
  }
  return m;
}

inline nrq::BinaryCodeMatrix random_signs(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::bernoulli_distribution coin(0.5);
  nrq::BinaryCodeMatrix::Storage s(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) s(i, j) = coin(gen) ? 1 : -1;
  }
  return nrq::BinaryCodeMatrix(s);
}

inline nrq::BinaryCodeMatrix signs_from_mask(std::uint64_t mask, Eigen::Index rows, Eigen::Index cols) {
  nrq::BinaryCodeMatrix::Storage s(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      s(i, j) = (mask >> (i * cols + j)) & 1u ? 1 : -1;
    }
  }
  return nrq::BinaryCodeMatrix(s);
}

inline double naive_product_entry(const Matrix& a, const Matrix& b, Eigen::Index i, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index t = 0; t < a.cols(); ++t) s += a(i, t) * b(t, j);
  return s;
}

inline Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) out(i, j) = naive_product_entry(a, b, i, j);
  }
  return out;
}

/// Σ_ij ((VR)_ij − B_ij)² with explicit loops.
inline double quantization_loss(const Matrix& v, const Matrix& r, const nrq::BinaryCodeMatrix& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const double d = naive_product_entry(v, r, i, j) - b(i, j);
      total += d * d;
    }
  }
  return total;
}

inline Matrix gram_minus_identity(const Matrix& w, bool outer) {
  const Eigen::Index size = outer ? w.rows() : w.cols();
  Matrix m(size, size);
  for (Eigen::Index a = 0; a < size; ++a) {
    for (Eigen::Index b = 0; b < size; ++b) {
      double s = 0.0;
      if (outer) {
        for (Eigen::Index t = 0; t < w.cols(); ++t) s += w(a, t) * w(b, t);
      } else {
        for (Eigen::Index t = 0; t < w.rows(); ++t) s += w(t, a) * w(t, b);
      }
      m(a, b) = s - (a == b ? 1.0 : 0.0);
    }
  }
  return m;
}

inline double sum_squares(const Matrix& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) s += m.data()[i] * m.data()[i];
  return s;
}

inline double penalty_so(const Matrix& w) { return sum_squares(gram_minus_identity(w, false)); }
inline double penalty_dso(const Matrix& w) {
  return penalty_so(w) + sum_squares(gram_minus_identity(w, true));
}
inline double penalty_mc(const Matrix& w) {
  const Matrix m = gram_minus_identity(w, false);
  double top = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) top = std::max(top, std::abs(m.data()[i]));
  return top * top;
}

/// Tr(Wᵀ XᵀX W) − α‖XWR − B‖² − β‖WᵀW − I‖², each term by loops.
inline double objective_so(const Matrix& x, const Matrix& w, const Matrix& r,
                           const nrq::BinaryCodeMatrix& b, double alpha, double beta) {
  const Matrix xw = naive_product(x, w);
  double variance = 0.0;
  for (Eigen::Index i = 0; i < xw.size(); ++i) variance += xw.data()[i] * xw.data()[i];
  return variance - alpha * oracle::quantization_loss(xw, r, b) - beta * penalty_so(w);
}

/// max over every sign matrix of Tr(Mᵀ B) by enumeration (rows·cols ≤ 20).
inline double exhaustive_sign_max(const Matrix& m) {
  const Eigen::Index cells = m.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
    const auto b = signs_from_mask(mask, m.rows(), m.cols());
    double t = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) t += m(i, j) * b(i, j);
    }
    best = std::max(best, t);
  }
  return best;
}

inline Matrix o2_element(double theta, bool reflect) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix r(2, 2);
  if (reflect) {
    r << c, s, s, -c;
  } else {
    r << c, -s, s, c;
  }
  return r;
}

/// min over a uniform grid of O(2) (rotations and reflections) of ‖VR − B‖².
inline double o2_scan_min(const Matrix& v, const nrq::BinaryCodeMatrix& b, long points) {
  double best = std::numeric_limits<double>::infinity();
  const long per_branch = points / 2;
  for (int reflect = 0; reflect < 2; ++reflect) {
    for (long t = 0; t < per_branch; ++t) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(per_branch);
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      // Columns of R: rotation (c, s), (−s, c); reflection (c, s), (s, −c).
      const double r01 = reflect ? s : -s;
      const double r11 = reflect ? -c : c;
      double loss = 0.0;
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double a = v(i, 0) * c + v(i, 1) * s - b(i, 0);
        const double d = v(i, 0) * r01 + v(i, 1) * r11 - b(i, 1);
        loss += a * a + d * d;
      }
      best = std::min(best, loss);
    }
  }
  return best;
}

/// min over R ∈ O(2) of ‖VR − B‖² in closed form: ‖V‖² + ‖B‖² − 2‖VᵀB‖_*, and for
/// a 2×2 matrix the nuclear norm is sqrt(‖M‖² + 2|det M|).
inline double procrustes_min_k2(const Matrix& v, const nrq::BinaryCodeMatrix& b) {
  double m00 = 0.0, m01 = 0.0, m10 = 0.0, m11 = 0.0, vv = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    m00 += v(i, 0) * b(i, 0);
    m01 += v(i, 0) * b(i, 1);
    m10 += v(i, 1) * b(i, 0);
    m11 += v(i, 1) * b(i, 1);
    vv += v(i, 0) * v(i, 0) + v(i, 1) * v(i, 1);
  }
  const double fro = m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11;
  const double nuclear = std::sqrt(fro + 2.0 * std::abs(m00 * m11 - m01 * m10));
  return vv + static_cast<double>(2 * v.rows()) - 2.0 * nuclear;
}

/// Global min of ‖VR − B‖² over every B ∈ {±1}^{n×2} and R ∈ O(2).
inline double exhaustive_itq_min(const Matrix& v) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << v.size()); ++mask) {
    best = std::min(best, procrustes_min_k2(v, signs_from_mask(mask, v.rows(), 2)));
  }
  return best;
}

/// Bitwise Hamming distance over unpacked codes.
inline int hamming(const nrq::BinaryCodeMatrix& a, Eigen::Index i, const nrq::BinaryCodeMatrix& b,
                   Eigen::Index j) {
  int d = 0;
  for (Eigen::Index t = 0; t < a.bits(); ++t) d += a(i, t) != b(j, t);
  return d;
}

inline bool relevant(const std::vector<std::uint32_t>& q, const std::vector<std::uint32_t>& item,
                     bool multilabel) {
  if (!multilabel) return q[0] == item[0];
  for (auto a : q) {
    for (auto b : item) {
      if (a == b) return true;
    }
  }
  return false;
}

struct NaiveReport {
  double map = 0.0;
  double macro_map = 0.0;
  std::vector<double> precision;  // per requested M
  std::size_t without_relevant = 0;
};

/// Scalar retrieval evaluation: selection-sort ranking by (distance, index).
inline NaiveReport evaluate(const nrq::BinaryCodeMatrix& queries, const nrq::LabelSet& qlabels,
                            const nrq::BinaryCodeMatrix& db, const nrq::LabelSet& dblabels,
                            bool multilabel, const std::vector<std::size_t>& ms) {
  NaiveReport rep;
  rep.precision.assign(ms.size(), 0.0);
  double ap_sum = 0.0;
  std::size_t counted = 0;
  std::vector<std::pair<std::uint32_t, double>> per_query_class;
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    std::vector<int> dist(static_cast<std::size_t>(db.rows()));
    for (Eigen::Index j = 0; j < db.rows(); ++j) dist[static_cast<std::size_t>(j)] = hamming(queries, q, db, j);
    std::vector<bool> used(dist.size(), false);
    std::vector<std::size_t> order;
    for (std::size_t step = 0; step < dist.size(); ++step) {
      std::size_t pick = dist.size();
      for (std::size_t j = 0; j < dist.size(); ++j) {
        if (used[j]) continue;
        if (pick == dist.size() || dist[j] < dist[pick]) pick = j;
      }
      used[pick] = true;
      order.push_back(pick);
    }
    double hits = 0.0;
    double ap = 0.0;
    std::vector<double> hits_at(order.size() + 1, 0.0);
    for (std::size_t p = 0; p < order.size(); ++p) {
      if (relevant(qlabels[static_cast<std::size_t>(q)], dblabels[order[p]], multilabel)) {
        hits += 1.0;
        ap += hits / static_cast<double>(p + 1);
      }
      hits_at[p + 1] = hits;
    }
    if (hits == 0.0) {
      ++rep.without_relevant;
      continue;
    }
    ap /= hits;
    ap_sum += ap;
    ++counted;
    per_query_class.emplace_back(qlabels[static_cast<std::size_t>(q)][0], ap);
    for (std::size_t i = 0; i < ms.size(); ++i) rep.precision[i] += hits_at[ms[i]] / static_cast<double>(ms[i]);
  }
  if (counted > 0) {
    rep.map = ap_sum / static_cast<double>(counted);
    for (auto& p : rep.precision) p /= static_cast<double>(counted);
  }
  std::vector<std::uint32_t> classes;
  for (auto& [c, ap] : per_query_class) classes.push_back(c);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  double macro = 0.0;
  for (auto c : classes) {
    double s = 0.0;
    double cnt = 0.0;
    for (auto& [qc, ap] : per_query_class) {
      if (qc == c) {
        s += ap;
        cnt += 1.0;
      }
    }
    macro += s / cnt;
  }
  if (!classes.empty()) rep.macro_map = macro / static_cast<double>(classes.size());
  return rep;
}

/// Plain ITQ alternation on V from a given start rotation; returns the final rotation.
inline Matrix itq_reference(const Matrix& v, Matrix r, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    Matrix b(v.rows(), v.cols());
    const Matrix vr = v * r;
    for (Eigen::Index i = 0; i < vr.rows(); ++i) {
      for (Eigen::Index j = 0; j < vr.cols(); ++j) b(i, j) = vr(i, j) >= 0.0 ? 1.0 : -1.0;
    }
    Eigen::JacobiSVD<Matrix> svd(b.transpose() * v, Eigen::ComputeFullU | Eigen::ComputeFullV);
    r = svd.matrixV() * svd.matrixU().transpose();
  }
  return r;
}

}  // namespace oracle
