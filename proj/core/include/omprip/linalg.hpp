#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace omprip {

using DenseVector = std::vector<double>;

// Dense row-major matrix of doubles.  Desk scale by design: everything here
// is O(n^3) textbook material kept simple enough to audit.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Strictly increasing set of coordinate indices: the support F of a sparse
// iterate.  Construction sorts and rejects duplicates.
class SupportSet {
 public:
  SupportSet() = default;
  explicit SupportSet(std::vector<std::size_t> indices);
  SupportSet(std::initializer_list<std::size_t> indices);

  static SupportSet full(std::size_t d);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t j) const;

  // Support with j added (no-op copy if already present).
  SupportSet with(std::size_t j) const;
  SupportSet set_union(const SupportSet& other) const;
  SupportSet set_difference(const SupportSet& other) const;

  std::size_t operator[](std::size_t k) const { return indices_[k]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  const std::vector<std::size_t>& indices() const { return indices_; }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<std::size_t> indices_;
};

// --- vector helpers -------------------------------------------------------

double dot(const DenseVector& a, const DenseVector& b);
double norm2_squared(const DenseVector& v);
double norm2(const DenseVector& v);
double inf_norm(const DenseVector& v);
bool all_finite(const DenseVector& v);

// y = A x and y = A^T r.
DenseVector matvec(const DenseMatrix& A, const DenseVector& x);
DenseVector matvec_transpose(const DenseMatrix& A, const DenseVector& r);

// Column j of A as a vector.
DenseVector column(const DenseMatrix& A, std::size_t j);

// n x |S| matrix of the columns of A listed in S.
DenseMatrix gather_columns(const DenseMatrix& A, const SupportSet& S);

// A_S^T A_S for the columns selected by S.
DenseMatrix gram_submatrix(const DenseMatrix& A, const SupportSet& S);

// --- solvers ---------------------------------------------------------------

// Minimum-norm least-squares solution of B w = rhs via column-pivoted
// Householder QR completed to an orthogonal decomposition when the numeric
// rank (pivot threshold 1e-10 times the largest pivot) is deficient.
DenseVector min_norm_lstsq(const DenseMatrix& B, const DenseVector& rhs);

// argmin_z ||A z - y||_2 subject to supp(z) inside F; minimum-norm among the
// minimizers.  Returns a full-length vector with zeros off F.
DenseVector restricted_least_squares(const DenseMatrix& A, const DenseVector& y,
                                     const SupportSet& F);

// (lambda_min, lambda_max) of a symmetric matrix by cyclic Jacobi sweeps,
// converged when the off-diagonal Frobenius mass falls below 1e-12 relative
// to the input scale.
std::pair<double, double> symmetric_eig_extremes(const DenseMatrix& M);

// Optimality tolerance used by the restricted solvers of a sensing pair:
// 1e-8 * (1 + ||A^T y||_inf).
double least_squares_optimality_tol(const DenseMatrix& A, const DenseVector& y);

}  // namespace omprip
