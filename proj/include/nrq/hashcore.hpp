#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nrq/codes.hpp"
#include "nrq/dataio.hpp"
#include "nrq/linalg.hpp"
#include "nrq/numopt.hpp"

namespace nrq {

/// Penalty that relaxes the orthogonality of the projection. Values match the
/// on-disk model regularizer id.
enum class Regularizer : std::uint8_t { so = 0, dso = 1, mc = 2 };

enum class Variant { nrq, snrq, itq };

std::string_view to_string(Regularizer r);
std::string_view to_string(Variant v);
Regularizer parse_regularizer(std::string_view name);
Variant parse_variant(std::string_view name);

struct TrainConfig {
  double alpha = 3.0;  // quantization weight
  double beta = 0.01;  // rigidness weight
  int iterations = 70;
  int bits = 16;
  Regularizer regularizer = Regularizer::so;
  Variant variant = Variant::snrq;
  numopt::SolverSettings solver;
  std::uint64_t seed = 0;
  /// Alternations used to obtain the initial rotation.
  int itq_init_iterations = 50;

  /// Throws UsageError on invalid values. Pass dim < 0 to skip the K ≤ D check.
  void validate(Eigen::Index dim = -1) const;
};

struct HashModel {
  Matrix W;     // D×K projection, not orthogonal
  Matrix R;     // K×K rotation
  Vector mean;  // training centering mean
  TrainConfig config;

  Eigen::Index dim() const noexcept { return W.rows(); }
  Eigen::Index bits() const noexcept { return W.cols(); }
};

struct IterationRecord {
  int iteration = 0;
  double q_before_b = 0.0;  // Q(V, R, B_prev)
  double q_after_b = 0.0;
  double q_after_r = 0.0;
  double j_before_w = 0.0;
  double j_after_w = 0.0;
  double objective = 0.0;     // J at the end of the iteration
  double quantization = 0.0;  // Q at the end of the iteration
};

struct TrainerState {
  Matrix W;
  Matrix R;
  BinaryCodeMatrix B;
  Matrix Cx;  // XᵀX
  Matrix V;   // XW
  std::vector<IterationRecord> trace;

  /// Builds Cx from centered X; W, R, B are left for the caller.
  static TrainerState for_data(const FeatureMatrix& x);
};

/// Non-fatal events collected during training.
struct Diagnostics {
  int solver_warnings = 0;
  std::vector<std::string> messages;

  void warn(std::string message);
};

// ---- objective pieces ------------------------------------------------------

/// ‖VR − B‖²_F.
double quantization_loss(const Matrix& v, const Matrix& r, const BinaryCodeMatrix& b);

/// SO = ‖WᵀW − I‖²_F, DSO = SO + ‖WWᵀ − I‖²_F, MC = max |(WᵀW − I)_ij|².
double regularizer_penalty(const Matrix& w, Regularizer kind);

/// Temperature of the log-sum-exp surrogate used for the MC gradient.
inline constexpr double kMcTemperature = 1e4;

/// Differentiable stand-in for the penalty: exact for SO and DSO, the squared
/// log-sum-exp soft max of ±(WᵀW − I) for MC.
double smooth_penalty(const Matrix& w, Regularizer kind);
/// Gradient of smooth_penalty with respect to W.
Matrix smooth_penalty_gradient(const Matrix& w, Regularizer kind);

/// J = Tr(WᵀCxW) − α‖XWR − B‖²_F − β·Ω(W) with the exact penalty Ω.
double objective_J(const TrainerState& state, const FeatureMatrix& x, const TrainConfig& config);

// ---- alternating updates ---------------------------------------------------

/// B = sgn(VR), sgn(0) = +1.
BinaryCodeMatrix update_B(const Matrix& v, const Matrix& r);

/// Procrustes rotation: SVD BᵀV = S Λ Ŝᵀ, R = Ŝ Sᵀ.
Matrix update_R(const Matrix& v, const BinaryCodeMatrix& b);

/// J as a function of vec(W) (column-major) with R and B fixed, using the
/// smooth penalty. The returned closures reference `x`, `cx`, `r`, `b`.
numopt::ObjectiveFn full_objective(const FeatureMatrix& x, const Matrix& cx, const Matrix& r,
                                   const BinaryCodeMatrix& b, const TrainConfig& config);

/// Whole-matrix W step (NRQ).
Matrix update_W_full(const TrainerState& state, const FeatureMatrix& x, const TrainConfig& config,
                     Diagnostics* diagnostics = nullptr);

/// Q = (1−α)Cx − 2β W′W′ᵀ + 2β I_D for the columns W′ that stay fixed.
Matrix build_Q(const Matrix& cx, const Matrix& w_rest, double alpha, double beta);
/// Same, given the Gram matrix W′W′ᵀ directly.
Matrix build_Q_from_gram(const Matrix& cx, const Matrix& gram_rest, double alpha, double beta);

/// J(z) = zᵀQz + 2α uᵀz − β (zᵀz)².
numopt::ObjectiveFn column_objective(const Matrix& q, const Vector& u, double alpha, double beta);

/// Maximizes column_objective from z0.
Vector update_column(const Vector& z0, const Matrix& q, const Vector& u, double alpha, double beta,
                     const numopt::SolverSettings& solver, Diagnostics* diagnostics = nullptr);

/// One ascending sweep over the columns of W (SNRQ), freshest columns first-class.
Matrix update_W_sequential(const TrainerState& state, const FeatureMatrix& x,
                           const TrainConfig& config, Diagnostics* diagnostics = nullptr);

// ---- drivers ---------------------------------------------------------------

/// Orthogonal K×K matrix from a seeded Gaussian via QR with diag(R) made positive.
Matrix random_orthogonal(Eigen::Index k, std::uint64_t seed);

/// Alternates update_B / update_R from random_orthogonal(K, seed). When
/// `losses` is given it receives Q after every sub-step (two per iteration).
Matrix train_itq(const Matrix& v, int iterations, std::uint64_t seed,
                 std::vector<double>* losses = nullptr);

struct TrainResult {
  HashModel model;
  BinaryCodeMatrix codes;  // sgn(XWR) for the final model
  std::vector<IterationRecord> trace;
  Diagnostics diagnostics;
};

/// Full alternating optimization on centered data.
TrainResult train(const FeatureMatrix& x, const TrainConfig& config);

/// X_raw centered with the model mean, then XWR.
Matrix project(const HashModel& model, const FeatureMatrix& x_raw);
/// sgn(project(model, x_raw)).
BinaryCodeMatrix encode(const HashModel& model, const FeatureMatrix& x_raw);

}  // namespace nrq
