#include "omprip/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "omprip/errors.hpp"

namespace omprip {

namespace {

constexpr int kNewtonMaxIters = 100;
constexpr int kArmijoMaxHalvings = 60;
constexpr double kArmijoSlope = 1e-4;

// log(1 + exp(t)) without overflow for large |t|.
double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

// Logistic sigmoid 1 / (1 + exp(-t)) evaluated stably.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double ObjectiveHandle::min_along_coordinate(const DenseVector& x, std::size_t j) const {
  if (j >= dimension()) throw std::invalid_argument("min_along_coordinate: index out of range");
  // The section alpha -> Q(x + alpha e_j) is convex; search a symmetric
  // bracket sized from the iterate and shrink by golden section.
  double lo = -10.0 * (1.0 + inf_norm(x));
  double hi = -lo;
  DenseVector probe = x;
  auto eval = [&](double alpha) {
    probe[j] = x[j] + alpha;
    return value(probe);
  };
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  while (b - a > 1e-12 * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  return std::min(fc, fd);
}

SensingProblem::SensingProblem(DenseMatrix a, DenseVector obs)
    : A(std::move(a)), y(std::move(obs)) {
  if (A.rows() != y.size())
    throw std::invalid_argument("SensingProblem: row count does not match observation length");
  if (!A.all_finite() || !all_finite(y))
    throw std::invalid_argument("SensingProblem: non-finite input");
}

double quadratic_value(const SensingProblem& p, const DenseVector& x) {
  DenseVector r = matvec(p.A, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= p.y[i];
  return norm2_squared(r);
}

DenseVector quadratic_gradient(const SensingProblem& p, const DenseVector& x) {
  DenseVector r = matvec(p.A, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= p.y[i];
  DenseVector g = matvec_transpose(p.A, r);
  for (double& v : g) v *= 2.0;
  return g;
}

QuadraticObjective::QuadraticObjective(SensingProblem p)
    : p_(std::move(p)), tol_opt_(least_squares_optimality_tol(p_.A, p_.y)) {}

double QuadraticObjective::value(const DenseVector& x) const {
  return quadratic_value(p_, x);
}

DenseVector QuadraticObjective::gradient(const DenseVector& x) const {
  return quadratic_gradient(p_, x);
}

DenseVector QuadraticObjective::restricted_minimize(const SupportSet& F) const {
  return restricted_least_squares(p_.A, p_.y, F);
}

double QuadraticObjective::min_along_coordinate(const DenseVector& x, std::size_t j) const {
  if (j >= dimension()) throw std::invalid_argument("min_along_coordinate: index out of range");
  // Q(x + alpha e_j) = Q(x) + alpha g_j + alpha^2 ||a_j||^2 exactly.
  const DenseVector aj = column(p_.A, j);
  const double col_norm2 = norm2_squared(aj);
  const double q0 = value(x);
  if (col_norm2 == 0.0) return q0;  // flat section: the minimum is at alpha = 0
  const double gj = gradient(x)[j];
  return q0 - 0.25 * gj * gj / col_norm2;
}

LogisticObjective::LogisticObjective(DenseMatrix features, DenseVector labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != labels_.size())
    throw std::invalid_argument("LogisticObjective: row count does not match label length");
  if (!features_.all_finite() || !all_finite(labels_))
    throw std::invalid_argument("LogisticObjective: non-finite input");
  for (double l : labels_)
    if (l != 1.0 && l != -1.0)
      throw std::invalid_argument("LogisticObjective: labels must be +1 or -1");
  tol_opt_ = 1e-8 * (1.0 + inf_norm(gradient(DenseVector(features_.cols(), 0.0))));
}

double LogisticObjective::value(const DenseVector& x) const {
  if (x.size() != features_.cols())
    throw std::invalid_argument("LogisticObjective::value: dimension mismatch");
  const DenseVector z = matvec(features_, x);
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += softplus(-labels_[i] * z[i]);
  return s;
}

DenseVector LogisticObjective::gradient(const DenseVector& x) const {
  if (x.size() != features_.cols())
    throw std::invalid_argument("LogisticObjective::gradient: dimension mismatch");
  const DenseVector z = matvec(features_, x);
  DenseVector w(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    w[i] = -labels_[i] * sigmoid(-labels_[i] * z[i]);
  return matvec_transpose(features_, w);
}

DenseVector LogisticObjective::restricted_minimize(const SupportSet& F) const {
  const std::size_t d = features_.cols();
  if (!F.empty() && F.indices().back() >= d)
    throw std::invalid_argument("restricted_minimize: support index out of range");
  DenseVector x(d, 0.0);
  if (F.empty()) return x;
  const std::size_t f = F.size();

  for (int iter = 0; iter < kNewtonMaxIters; ++iter) {
    const DenseVector z = matvec(features_, x);
    DenseVector g_full(d, 0.0);
    DenseVector p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      p[i] = sigmoid(-labels_[i] * z[i]);
      const double wi = -labels_[i] * p[i];
      const auto row = features_.row(i);
      for (std::size_t k = 0; k < f; ++k) g_full[F[k]] += wi * row[F[k]];
    }
    DenseVector g(f);
    double g_inf = 0.0;
    for (std::size_t k = 0; k < f; ++k) {
      g[k] = g_full[F[k]];
      g_inf = std::max(g_inf, std::abs(g[k]));
    }
    if (g_inf <= tol_opt_) return x;

    // Restricted Hessian H = X_F^T D X_F with D_ii = p_i (1 - p_i).
    DenseMatrix H(f, f);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double di = p[i] * (1.0 - p[i]);
      if (di == 0.0) continue;
      const auto row = features_.row(i);
      for (std::size_t a = 0; a < f; ++a) {
        const double ra = row[F[a]] * di;
        for (std::size_t b = a; b < f; ++b) H(a, b) += ra * row[F[b]];
      }
    }
    for (std::size_t a = 0; a < f; ++a)
      for (std::size_t b = 0; b < a; ++b) H(a, b) = H(b, a);

    DenseVector neg_g(f);
    for (std::size_t k = 0; k < f; ++k) neg_g[k] = -g[k];
    DenseVector delta = min_norm_lstsq(H, neg_g);
    double slope = 0.0;
    for (std::size_t k = 0; k < f; ++k) slope += g[k] * delta[k];
    if (!(slope < 0.0)) {
      // Singular curvature left no usable Newton direction; take the
      // steepest-descent step instead.
      delta = neg_g;
      slope = -norm2_squared(g);
    }

    const double q0 = value(x);
    double t = 1.0;
    bool accepted = false;
    DenseVector trial = x;
    for (int h = 0; h < kArmijoMaxHalvings; ++h) {
      for (std::size_t k = 0; k < f; ++k) trial[F[k]] = x[F[k]] + t * delta[k];
      if (value(trial) <= q0 + kArmijoSlope * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw SolverFailure("logistic restricted_minimize: line search stalled before "
                          "reaching the gradient tolerance");
    x = trial;
  }

  // Final tolerance check after the iteration cap.
  const DenseVector g_final = gradient(x);
  for (std::size_t k = 0; k < f; ++k)
    if (std::abs(g_final[F[k]]) > tol_opt_)
      throw SolverFailure("logistic restricted_minimize: Newton did not converge "
                          "within the iteration cap (objective may be unbounded "
                          "below on this support)");
  return x;
}

std::unique_ptr<ObjectiveHandle> quadratic_objective(SensingProblem p) {
  return std::make_unique<QuadraticObjective>(std::move(p));
}

std::unique_ptr<ObjectiveHandle> logistic_objective(DenseMatrix features,
                                                    DenseVector labels) {
  return std::make_unique<LogisticObjective>(std::move(features), std::move(labels));
}

}  // namespace omprip
