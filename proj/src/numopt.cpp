#include "nrq/numopt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "nrq/error.hpp"

namespace nrq::numopt {

void SolverSettings::validate() const {
  if (memory_pairs <= 0) throw UsageError("solver memory_pairs must be positive");
  if (max_iterations <= 0) throw UsageError("solver max_iterations must be positive");
  if (!(gradient_tolerance > 0.0)) throw UsageError("solver gradient_tolerance must be positive");
  if (max_line_search_steps <= 0) throw UsageError("solver max_line_search_steps must be positive");
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kContraction = 0.5;

struct CorrectionPair {
  Vector s;
  Vector y;
  double rho;
};

// Two-loop recursion: returns -H·g for the inverse-Hessian approximation H.
Vector lbfgs_direction(const Vector& g, const std::deque<CorrectionPair>& memory) {
  Vector q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * memory[i].s.dot(q);
    q -= alpha[i] * memory[i].y;
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * memory[i].y.dot(q);
    q += (alpha[i] - beta) * memory[i].s;
  }
  return -q;
}

[[noreturn]] void non_finite(const char* what, const Vector& x, int iteration) {
  std::string msg = std::string("non-finite ") + what + " at iteration " + std::to_string(iteration) +
                    " (‖x‖∞ = " + std::to_string(x.lpNorm<Eigen::Infinity>()) + ")";
  throw NumericalError(msg);
}

}  // namespace

SolverResult maximize(const ObjectiveFn& f, const Vector& x0, const SolverSettings& settings) {
  settings.validate();
  if (!x0.allFinite()) throw NumericalError("initial iterate is not finite");

  // Internally minimize phi = -f.
  Vector x = x0;
  double phi = -f.value(x);
  if (!std::isfinite(phi)) non_finite("objective", x, 0);
  Vector g = -f.gradient(x);
  if (!g.allFinite()) non_finite("gradient", x, 0);

  std::deque<CorrectionPair> memory;
  SolverResult result;

  while (result.iterations < settings.max_iterations) {
    if (g.lpNorm<Eigen::Infinity>() <= settings.gradient_tolerance) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    double predicted = 0.0;
    Vector x_next;
    double phi_next = 0.0;
    // A failed quasi-Newton step falls back to steepest descent once.
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        if (memory.empty()) break;
        memory.clear();
      }
      Vector d = lbfgs_direction(g, memory);
      double slope = d.dot(g);
      if (!(slope < 0.0)) {
        memory.clear();
        d = -g;
        slope = -g.squaredNorm();
      }
      double step = 1.0;
      if (memory.empty()) {
        step = std::min(1.0, 1.0 / g.norm());
        // Secant curvature along d shortens the first trial on steep problems.
        const Vector g_probe = -f.gradient(x + step * d);
        if (g_probe.allFinite()) {
          const double curvature = (d.dot(g_probe) - slope) / step;
          if (curvature > 0.0) step = std::min(step, -slope / curvature);
        }
      }
      if (attempt == 0) predicted = -step * slope;
      for (int ls = 0; ls < settings.max_line_search_steps; ++ls) {
        x_next = x + step * d;
        phi_next = -f.value(x_next);
        if (std::isfinite(phi_next) && phi_next <= phi + kArmijo * step * slope && phi_next < phi) {
          accepted = true;
          break;
        }
        step *= kContraction;
      }
    }
    if (!accepted) {
      // A first-order gain below the resolution of phi means the iterate is
      // stationary to working precision, not that the search failed.
      const double resolution = 1e4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(phi));
      if (predicted <= resolution) {
        result.converged = true;
      } else {
        result.line_search_failed = true;
      }
      break;
    }

    Vector g_next = -f.gradient(x_next);
    if (!g_next.allFinite()) non_finite("gradient", x_next, result.iterations + 1);

    Vector s = x_next - x;
    Vector y = g_next - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > settings.memory_pairs) memory.pop_front();
    }
    x = std::move(x_next);
    phi = phi_next;
    g = std::move(g_next);
    ++result.iterations;
  }
  if (!result.converged && g.lpNorm<Eigen::Infinity>() <= settings.gradient_tolerance) {
    result.converged = true;
  }

  result.x = std::move(x);
  result.value = -phi;
  return result;
}

double check_gradient(const ObjectiveFn& f, const Vector& x, double step) {
  if (!(step > 0.0)) throw UsageError("finite-difference step must be positive");
  const Vector g = f.gradient(x);
  if (!g.allFinite()) throw NumericalError("non-finite analytic gradient");
  if (g.size() != x.size()) throw UsageError("gradient length does not match the point");
  double worst = 0.0;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + step;
    const double up = f.value(probe);
    probe(i) = x(i) - step;
    const double down = f.value(probe);
    probe(i) = x(i);
    if (!std::isfinite(up) || !std::isfinite(down)) throw NumericalError("non-finite objective value");
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(g(i) - fd) / (std::abs(g(i)) + std::abs(fd) + 1e-12));
  }
  return worst;
}

double check_gradient(const ObjectiveFn& f, const Vector& x) {
  return check_gradient(f, x, 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>()));
}

Matrix top_eigenvectors(const Matrix& c, Eigen::Index k) {
  if (c.rows() != c.cols()) throw DataError("eigendecomposition needs a square matrix");
  if (k < 1 || k > c.rows()) {
    throw UsageError("requested " + std::to_string(k) + " eigenvectors of a " +
                     std::to_string(c.rows()) + "×" + std::to_string(c.rows()) + " matrix");
  }
  if (!c.allFinite()) throw NumericalError("eigendecomposition input is not finite");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw DataError("eigendecomposition input is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(c);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  // Eigen orders eigenvalues ascending.
  Matrix top = solver.eigenvectors().rightCols(k).rowwise().reverse();
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < top.rows(); ++i) {
      if (std::abs(top(i, j)) > best) {
        best = std::abs(top(i, j));
        pivot = i;
      }
    }
    if (top(pivot, j) < 0.0) top.col(j) *= -1.0;
  }
  return top;
}

Svd svd(const Matrix& m) {
  if (!m.allFinite()) throw NumericalError("SVD input is not finite");
  Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

}  // namespace nrq::numopt
