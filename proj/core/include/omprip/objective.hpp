#pragma once

#include <memory>

#include "omprip/linalg.hpp"

namespace omprip {

// Smooth convex objective Q over R^d, presented through the only operations
// the greedy solver and the analysis need: evaluation, gradient, and exact
// minimization restricted to a support.
class ObjectiveHandle {
 public:
  virtual ~ObjectiveHandle() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(const DenseVector& x) const = 0;
  virtual DenseVector gradient(const DenseVector& x) const = 0;

  // argmin Q(x) subject to supp(x) inside F.  The result satisfies
  // |gradient(x)_i| <= optimality_tol() for every i in F.
  virtual DenseVector restricted_minimize(const SupportSet& F) const = 0;

  // Gradient tolerance that restricted_minimize guarantees on the support.
  virtual double optimality_tol() const = 0;

  // min over alpha of Q(x + alpha e_j).  The default brackets the convex
  // one-dimensional section and refines by golden-section search; concrete
  // objectives may override with a closed form.
  virtual double min_along_coordinate(const DenseVector& x, std::size_t j) const;
};

// A sensing pair (A, y) for the quadratic objective ||A x - y||_2^2.
struct SensingProblem {
  DenseMatrix A;
  DenseVector y;

  SensingProblem(DenseMatrix a, DenseVector obs);
};

double quadratic_value(const SensingProblem& p, const DenseVector& x);
DenseVector quadratic_gradient(const SensingProblem& p, const DenseVector& x);

class QuadraticObjective final : public ObjectiveHandle {
 public:
  explicit QuadraticObjective(SensingProblem p);

  std::size_t dimension() const override { return p_.A.cols(); }
  double value(const DenseVector& x) const override;
  DenseVector gradient(const DenseVector& x) const override;
  DenseVector restricted_minimize(const SupportSet& F) const override;
  double optimality_tol() const override { return tol_opt_; }
  double min_along_coordinate(const DenseVector& x, std::size_t j) const override;

  const SensingProblem& problem() const { return p_; }

 private:
  SensingProblem p_;
  double tol_opt_;
};

// Logistic loss sum_i log(1 + exp(-label_i <row_i, x>)) with labels in
// {-1, +1}.  Restricted minimization runs damped Newton with Armijo
// backtracking and reports failure instead of guessing when the tolerance is
// out of reach within the iteration cap.
class LogisticObjective final : public ObjectiveHandle {
 public:
  LogisticObjective(DenseMatrix features, DenseVector labels);

  std::size_t dimension() const override { return features_.cols(); }
  double value(const DenseVector& x) const override;
  DenseVector gradient(const DenseVector& x) const override;
  DenseVector restricted_minimize(const SupportSet& F) const override;
  double optimality_tol() const override { return tol_opt_; }

  const DenseMatrix& features() const { return features_; }
  const DenseVector& labels() const { return labels_; }

 private:
  DenseMatrix features_;
  DenseVector labels_;
  double tol_opt_;
};

// Factory helpers returning the polymorphic handle used across the library.
std::unique_ptr<ObjectiveHandle> quadratic_objective(SensingProblem p);
std::unique_ptr<ObjectiveHandle> logistic_objective(DenseMatrix features,
                                                    DenseVector labels);

}  // namespace omprip
