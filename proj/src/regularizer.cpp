#include <cmath>
#include <string>

#include "nrq/error.hpp"
#include "nrq/hashcore.hpp"

namespace nrq {

std::string_view to_string(Regularizer r) {
  switch (r) {
    case Regularizer::so: return "so";
    case Regularizer::dso: return "dso";
    case Regularizer::mc: return "mc";
  }
  return "?";
}

Regularizer parse_regularizer(std::string_view name) {
  if (name == "so") return Regularizer::so;
  if (name == "dso") return Regularizer::dso;
  if (name == "mc") return Regularizer::mc;
  throw UsageError("unknown regularizer '" + std::string(name) + "' (expected so, dso or mc)");
}

namespace {

Matrix gram_residual(const Matrix& w) {
  return w.transpose() * w - Matrix::Identity(w.cols(), w.cols());
}

struct SoftMax {
  double value;  // (1/t)·log Σ exp(±t·M_ij)
  Matrix weights;  // ∂value/∂M_ij
};

// Log-sum-exp over the 2K² signed entries of M; bounded by max|M| + ln(2K²)/t.
SoftMax soft_abs_max(const Matrix& m) {
  const double t = kMcTemperature;
  const double top = m.cwiseAbs().maxCoeff();
  const Matrix up = (t * (m.array() - top)).exp().matrix();
  const Matrix down = (t * (-m.array() - top)).exp().matrix();
  const double total = up.sum() + down.sum();
  return {top + std::log(total) / t, (up - down) / total};
}

}  // namespace

double regularizer_penalty(const Matrix& w, Regularizer kind) {
  const Matrix m = gram_residual(w);
  switch (kind) {
    case Regularizer::so:
      return m.squaredNorm();
    case Regularizer::dso:
      return m.squaredNorm() + (w * w.transpose() - Matrix::Identity(w.rows(), w.rows())).squaredNorm();
    case Regularizer::mc: {
      const double top = m.cwiseAbs().maxCoeff();
      return top * top;
    }
  }
  return 0.0;
}

double smooth_penalty(const Matrix& w, Regularizer kind) {
  if (kind != Regularizer::mc) return regularizer_penalty(w, kind);
  const double s = soft_abs_max(gram_residual(w)).value;
  return s * s;
}

Matrix smooth_penalty_gradient(const Matrix& w, Regularizer kind) {
  const Matrix m = gram_residual(w);
  switch (kind) {
    case Regularizer::so:
      return 4.0 * w * m;
    case Regularizer::dso:
      return 4.0 * w * m + 4.0 * (w * w.transpose() - Matrix::Identity(w.rows(), w.rows())) * w;
    case Regularizer::mc: {
      const SoftMax sm = soft_abs_max(m);
      // d(s²) = 2s·Σ P_ij dM_ij and dM = dWᵀW + WᵀdW with P symmetric.
      return 2.0 * sm.value * w * (sm.weights + sm.weights.transpose());
    }
  }
  return Matrix::Zero(w.rows(), w.cols());
}

}  // namespace nrq
