#include "nrq/hashcore.hpp"

#include <memory>
#include <string>

#include "nrq/error.hpp"

namespace nrq {

namespace {

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw DataError("dimension mismatch: " + what);
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "×" + std::to_string(m.cols());
}

// Tr(WᵀCW) given the product CW.
double trace_form(const Matrix& w, const Matrix& cw) { return w.cwiseProduct(cw).sum(); }

double rigidness_weight(const TrainConfig& config) {
  // ‖WWᵀ − I_D‖² = ‖WᵀW − I_K‖² + (D − K), so DSO acts as SO with twice the weight.
  return config.regularizer == Regularizer::dso ? 2.0 * config.beta : config.beta;
}

}  // namespace

void Diagnostics::warn(std::string message) { messages.push_back(std::move(message)); }

TrainerState TrainerState::for_data(const FeatureMatrix& x) {
  TrainerState state;
  const Eigen::Index d = x.dim();
  state.Cx = Matrix::Zero(d, d);
  state.Cx.selfadjointView<Eigen::Lower>().rankUpdate(x.data().transpose());
  state.Cx = state.Cx.selfadjointView<Eigen::Lower>();
  return state;
}

double quantization_loss(const Matrix& v, const Matrix& r, const BinaryCodeMatrix& b) {
  require_shape(v.cols() == r.rows() && r.rows() == r.cols(),
                "V is " + shape(v) + ", R is " + shape(r));
  require_shape(b.rows() == v.rows() && b.bits() == v.cols(),
                "V is " + shape(v) + ", B is " + std::to_string(b.rows()) + "×" +
                    std::to_string(b.bits()));
  return (v * r - b.to_real()).squaredNorm();
}

double objective_J(const TrainerState& state, const FeatureMatrix& x, const TrainConfig& config) {
  const Matrix& w = state.W;
  require_shape(w.rows() == x.dim() && state.Cx.rows() == x.dim(),
                "W is " + shape(w) + " for features of dimension " + std::to_string(x.dim()));
  require_shape(state.R.rows() == w.cols(), "W is " + shape(w) + ", R is " + shape(state.R));
  require_shape(state.B.rows() == x.rows() && state.B.bits() == w.cols(),
                "B does not match n×K = " + std::to_string(x.rows()) + "×" + std::to_string(w.cols()));
  const double variance = trace_form(w, state.Cx * w);
  const double quant = quantization_loss(x.data() * w, state.R, state.B);
  const double j = variance - config.alpha * quant - config.beta * regularizer_penalty(w, config.regularizer);
  if (!std::isfinite(j)) throw NumericalError("objective J is not finite");
  return j;
}

BinaryCodeMatrix update_B(const Matrix& v, const Matrix& r) {
  require_shape(v.cols() == r.rows() && r.rows() == r.cols(),
                "V is " + shape(v) + ", R is " + shape(r));
  return BinaryCodeMatrix::sign_of(v * r);
}

Matrix update_R(const Matrix& v, const BinaryCodeMatrix& b) {
  require_shape(b.rows() == v.rows() && b.bits() == v.cols(),
                "V is " + shape(v) + ", B is " + std::to_string(b.rows()) + "×" +
                    std::to_string(b.bits()));
  const numopt::Svd dec = numopt::svd(b.to_real().transpose() * v);
  return dec.right * dec.left.transpose();
}

// ---- NRQ -------------------------------------------------------------------

numopt::ObjectiveFn full_objective(const FeatureMatrix& x, const Matrix& cx, const Matrix& r,
                                   const BinaryCodeMatrix& b, const TrainConfig& config) {
  const Eigen::Index d = x.dim();
  const Eigen::Index k = r.rows();
  require_shape(cx.rows() == d && cx.cols() == d, "Cx is " + shape(cx));
  require_shape(b.rows() == x.rows() && b.bits() == k, "B does not match n×K");

  // Value and gradient at the same point share CxW and the residual XWR − B.
  struct Cache {
    Vector at;
    Matrix cw;
    Matrix residual;
  };
  auto cache = std::make_shared<Cache>();
  auto refresh = [&x, &cx, &r, breal = b.to_real(), cache, d, k](const Vector& vec) {
    if (cache->at.size() == vec.size() && cache->at == vec) return;
    const Eigen::Map<const Matrix> w(vec.data(), d, k);
    cache->at = vec;
    cache->cw = cx * w;
    cache->residual = x.data() * w * r - breal;
  };
  const double alpha = config.alpha;
  const double beta = config.beta;
  const Regularizer kind = config.regularizer;

  numopt::ObjectiveFn f;
  f.value = [=](const Vector& vec) {
    refresh(vec);
    const Eigen::Map<const Matrix> w(vec.data(), d, k);
    return trace_form(w, cache->cw) - alpha * cache->residual.squaredNorm() -
           beta * smooth_penalty(w, kind);
  };
  f.gradient = [=, &x, &r](const Vector& vec) {
    refresh(vec);
    const Eigen::Map<const Matrix> w(vec.data(), d, k);
    Matrix g = 2.0 * cache->cw - 2.0 * alpha * (x.data().transpose() * cache->residual) * r.transpose() -
               beta * smooth_penalty_gradient(w, kind);
    return Vector(Eigen::Map<const Vector>(g.data(), g.size()));
  };
  return f;
}

Matrix update_W_full(const TrainerState& state, const FeatureMatrix& x, const TrainConfig& config,
                     Diagnostics* diagnostics) {
  const auto f = full_objective(x, state.Cx, state.R, state.B, config);
  const Vector w0 = Eigen::Map<const Vector>(state.W.data(), state.W.size());
  const auto result = numopt::maximize(f, w0, config.solver);
  if (result.line_search_failed && diagnostics) {
    ++diagnostics->solver_warnings;
    diagnostics->warn("line search failed in full W update; kept best iterate");
  }
  return Eigen::Map<const Matrix>(result.x.data(), state.W.rows(), state.W.cols());
}

// ---- SNRQ ------------------------------------------------------------------

Matrix build_Q(const Matrix& cx, const Matrix& w_rest, double alpha, double beta) {
  require_shape(w_rest.rows() == cx.rows(), "W′ is " + shape(w_rest) + ", Cx is " + shape(cx));
  return build_Q_from_gram(cx, w_rest * w_rest.transpose(), alpha, beta);
}

Matrix build_Q_from_gram(const Matrix& cx, const Matrix& gram_rest, double alpha, double beta) {
  require_shape(cx.rows() == cx.cols() && gram_rest.rows() == cx.rows() &&
                    gram_rest.cols() == cx.cols(),
                "Cx is " + shape(cx) + ", W′W′ᵀ is " + shape(gram_rest));
  Matrix q = (1.0 - alpha) * cx - 2.0 * beta * gram_rest;
  q.diagonal().array() += 2.0 * beta;
  return q;
}

numopt::ObjectiveFn column_objective(const Matrix& q, const Vector& u, double alpha, double beta) {
  require_shape(q.rows() == q.cols() && u.size() == q.rows(),
                "Q is " + shape(q) + ", u has length " + std::to_string(u.size()));
  struct Cache {
    Matrix q;
    Vector u;
    Vector at;
    Vector qz;
  };
  auto cache = std::make_shared<Cache>(Cache{q, u, {}, {}});
  auto refresh = [cache](const Vector& z) {
    if (cache->at.size() == z.size() && cache->at == z) return;
    cache->at = z;
    cache->qz.noalias() = cache->q * z;
  };
  numopt::ObjectiveFn f;
  f.value = [=](const Vector& z) {
    refresh(z);
    const double zz = z.squaredNorm();
    return z.dot(cache->qz) + 2.0 * alpha * cache->u.dot(z) - beta * zz * zz;
  };
  f.gradient = [=](const Vector& z) {
    refresh(z);
    return Vector(2.0 * cache->qz + 2.0 * alpha * cache->u - 4.0 * beta * z.squaredNorm() * z);
  };
  return f;
}

Vector update_column(const Vector& z0, const Matrix& q, const Vector& u, double alpha, double beta,
                     const numopt::SolverSettings& solver, Diagnostics* diagnostics) {
  require_shape(z0.size() == q.rows(), "z0 has length " + std::to_string(z0.size()));
  const auto result = numopt::maximize(column_objective(q, u, alpha, beta), z0, solver);
  if (result.line_search_failed && diagnostics) {
    ++diagnostics->solver_warnings;
    diagnostics->warn("line search failed in column update; kept best iterate");
  }
  return result.x;
}

namespace {

// Column subproblem for the mutual-coherence penalty, which has no closed Q form:
// (1−α) zᵀCxz + 2α uᵀz − β Ω̃(W with column k replaced by z).
numopt::ObjectiveFn mc_column_objective(const Matrix& cx, const Matrix& w, Eigen::Index k,
                                        const Vector& u, double alpha, double beta) {
  auto with_column = [w, k](const Vector& z) {
    Matrix out = w;
    out.col(k) = z;
    return out;
  };
  numopt::ObjectiveFn f;
  f.value = [=, &cx](const Vector& z) {
    return (1.0 - alpha) * z.dot(cx * z) + 2.0 * alpha * u.dot(z) -
           beta * smooth_penalty(with_column(z), Regularizer::mc);
  };
  f.gradient = [=, &cx](const Vector& z) {
    const Matrix g = smooth_penalty_gradient(with_column(z), Regularizer::mc);
    return Vector(2.0 * (1.0 - alpha) * (cx * z) + 2.0 * alpha * u - beta * g.col(k));
  };
  return f;
}

}  // namespace

Matrix update_W_sequential(const TrainerState& state, const FeatureMatrix& x,
                           const TrainConfig& config, Diagnostics* diagnostics) {
  const Eigen::Index d = x.dim();
  const Eigen::Index k_bits = state.W.cols();
  require_shape(state.W.rows() == d && state.R.rows() == k_bits, "W is " + shape(state.W));
  require_shape(state.B.rows() == x.rows() && state.B.bits() == k_bits, "B does not match n×K");

  // Cy = R Bᵀ X, once per sweep.
  const Matrix cy = state.R * (state.B.to_real().transpose() * x.data());
  const double beta = rigidness_weight(config);

  Matrix w = state.W;
  // Accumulated from the same outer products that are removed below, so a
  // column taken out cancels its own contribution exactly.
  Matrix gram = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < k_bits; ++k) gram.noalias() += w.col(k) * w.col(k).transpose();
  for (Eigen::Index k = 0; k < k_bits; ++k) {
    const Vector z_old = w.col(k);
    const Vector u = cy.row(k).transpose();
    Vector z;
    if (config.regularizer == Regularizer::mc) {
      const auto f = mc_column_objective(state.Cx, w, k, u, config.alpha, config.beta);
      const auto result = numopt::maximize(f, z_old, config.solver);
      if (result.line_search_failed && diagnostics) {
        ++diagnostics->solver_warnings;
        diagnostics->warn("line search failed in column update; kept best iterate");
      }
      z = result.x;
    } else {
      gram.noalias() -= z_old * z_old.transpose();
      const Matrix q = build_Q_from_gram(state.Cx, gram, config.alpha, beta);
      z = update_column(z_old, q, u, config.alpha, beta, config.solver, diagnostics);
      gram.noalias() += z * z.transpose();
    }
    w.col(k) = z;
  }
  return w;
}

}  // namespace nrq
