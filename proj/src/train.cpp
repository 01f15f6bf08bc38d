#include <cmath>
#include <random>
#include <string>

#include "nrq/error.hpp"
#include "nrq/hashcore.hpp"

namespace nrq {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::nrq: return "nrq";
    case Variant::snrq: return "snrq";
    case Variant::itq: return "itq";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "nrq") return Variant::nrq;
  if (name == "snrq") return Variant::snrq;
  if (name == "itq") return Variant::itq;
  throw UsageError("unknown variant '" + std::string(name) + "' (expected itq, nrq or snrq)");
}

void TrainConfig::validate(Eigen::Index dim) const {
  if (bits < 1) throw UsageError("code length must be at least 1 bit");
  if (dim >= 0 && bits > dim) {
    throw UsageError("code length " + std::to_string(bits) + " exceeds feature dimension " +
                     std::to_string(dim));
  }
  if (!std::isfinite(alpha)) throw UsageError("alpha must be finite");
  if (variant != Variant::itq && !(alpha > 1.0)) {
    throw UsageError("alpha must be larger than 1 for " + std::string(to_string(variant)) + " (got " +
                     std::to_string(alpha) + ")");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("beta must be positive");
  if (iterations < 0) throw UsageError("iteration count must be non-negative");
  if (itq_init_iterations < 0) throw UsageError("ITQ initialisation count must be non-negative");
  solver.validate();
}

Matrix random_orthogonal(Eigen::Index k, std::uint64_t seed) {
  if (k < 1) throw UsageError("rotation size must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) g(i, j) = normal(gen);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Vector diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (diag(j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix train_itq(const Matrix& v, int iterations, std::uint64_t seed, std::vector<double>* losses) {
  if (iterations < 0) throw UsageError("iteration count must be non-negative");
  Matrix r = random_orthogonal(v.cols(), seed);
  for (int it = 0; it < iterations; ++it) {
    const BinaryCodeMatrix b = update_B(v, r);
    if (losses) losses->push_back(quantization_loss(v, r, b));
    r = update_R(v, b);
    if (losses) losses->push_back(quantization_loss(v, r, b));
  }
  return r;
}

namespace {

void note_zero_columns(const Matrix& v, Diagnostics& diag) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    if ((v.col(j).array() == 0.0).all()) {
      diag.warn("projected column " + std::to_string(j) + " is identically zero; its codes are all +1");
    }
  }
}

}  // namespace

TrainResult train(const FeatureMatrix& x, const TrainConfig& config) {
  config.validate(x.dim());
  if (!x.centered()) throw UsageError("training features must be centered");
  if (x.rows() < 2) throw DataError("training needs at least two samples");

  TrainResult out;
  Diagnostics& diag = out.diagnostics;
  TrainerState state = TrainerState::for_data(x);

  state.W = numopt::top_eigenvectors(state.Cx, config.bits);
  state.V = x.data() * state.W;
  note_zero_columns(state.V, diag);
  state.R = train_itq(state.V, config.itq_init_iterations, config.seed);
  state.B = update_B(state.V, state.R);

  for (int it = 1; it <= config.iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.q_before_b = quantization_loss(state.V, state.R, state.B);
    state.B = update_B(state.V, state.R);
    rec.q_after_b = quantization_loss(state.V, state.R, state.B);
    state.R = update_R(state.V, state.B);
    rec.q_after_r = quantization_loss(state.V, state.R, state.B);
    rec.j_before_w = objective_J(state, x, config);

    if (config.variant != Variant::itq) {
      state.W = config.variant == Variant::nrq ? update_W_full(state, x, config, &diag)
                                               : update_W_sequential(state, x, config, &diag);
      state.V = x.data() * state.W;
      if (!state.W.allFinite()) throw NumericalError("projection became non-finite at iteration " +
                                                     std::to_string(it));
    }
    rec.j_after_w = objective_J(state, x, config);
    rec.objective = rec.j_after_w;
    rec.quantization = quantization_loss(state.V, state.R, state.B);
    state.trace.push_back(rec);
  }
  if (config.variant != Variant::itq) note_zero_columns(state.V, diag);

  out.codes = update_B(state.V, state.R);
  out.model.W = std::move(state.W);
  out.model.R = std::move(state.R);
  out.model.mean = x.mean();
  out.model.config = config;
  out.trace = std::move(state.trace);
  return out;
}

Matrix project(const HashModel& model, const FeatureMatrix& x_raw) {
  if (x_raw.dim() != model.dim()) {
    throw DataError("feature dimension " + std::to_string(x_raw.dim()) +
                    " does not match model dimension " + std::to_string(model.dim()));
  }
  const FeatureMatrix xc = apply_center(x_raw, model.mean);
  const Matrix v = xc.data() * model.W;
  return v * model.R;
}

BinaryCodeMatrix encode(const HashModel& model, const FeatureMatrix& x_raw) {
  return BinaryCodeMatrix::sign_of(project(model, x_raw));
}

}  // namespace nrq
