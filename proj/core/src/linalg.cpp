#include "omprip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace omprip {

namespace {

constexpr double kPivotRelTol = 1e-10;   // rank cut relative to the largest pivot
constexpr double kJacobiTol = 1e-12;     // off-diagonal mass target, relative
constexpr int kJacobiMaxSweeps = 100;

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == c, "from_rows: ragged row lengths");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool DenseMatrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

SupportSet::SupportSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  require(std::adjacent_find(indices_.begin(), indices_.end()) == indices_.end(),
          "SupportSet: duplicate index");
}

SupportSet::SupportSet(std::initializer_list<std::size_t> indices)
    : SupportSet(std::vector<std::size_t>(indices)) {}

SupportSet SupportSet::full(std::size_t d) {
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;
  SupportSet s;
  s.indices_ = std::move(idx);
  return s;
}

bool SupportSet::contains(std::size_t j) const {
  return std::binary_search(indices_.begin(), indices_.end(), j);
}

SupportSet SupportSet::with(std::size_t j) const {
  if (contains(j)) return *this;
  SupportSet out;
  out.indices_.reserve(indices_.size() + 1);
  auto pos = std::lower_bound(indices_.begin(), indices_.end(), j);
  out.indices_.assign(indices_.begin(), pos);
  out.indices_.push_back(j);
  out.indices_.insert(out.indices_.end(), pos, indices_.end());
  return out;
}

SupportSet SupportSet::set_union(const SupportSet& other) const {
  SupportSet out;
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(),
                 other.indices_.end(), std::back_inserter(out.indices_));
  return out;
}

SupportSet SupportSet::set_difference(const SupportSet& other) const {
  SupportSet out;
  std::set_difference(indices_.begin(), indices_.end(), other.indices_.begin(),
                      other.indices_.end(), std::back_inserter(out.indices_));
  return out;
}

double dot(const DenseVector& a, const DenseVector& b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2_squared(const DenseVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double norm2(const DenseVector& v) { return std::sqrt(norm2_squared(v)); }

double inf_norm(const DenseVector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(const DenseVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

DenseVector matvec(const DenseMatrix& A, const DenseVector& x) {
  require(A.cols() == x.size(), "matvec: dimension mismatch");
  DenseVector y(A.rows(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto row = A.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < A.cols(); ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

DenseVector matvec_transpose(const DenseMatrix& A, const DenseVector& r) {
  require(A.rows() == r.size(), "matvec_transpose: dimension mismatch");
  DenseVector y(A.cols(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto row = A.row(i);
    const double ri = r[i];
    for (std::size_t j = 0; j < A.cols(); ++j) y[j] += row[j] * ri;
  }
  return y;
}

DenseVector column(const DenseMatrix& A, std::size_t j) {
  require(j < A.cols(), "column: index out of range");
  DenseVector c(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) c[i] = A(i, j);
  return c;
}

DenseMatrix gather_columns(const DenseMatrix& A, const SupportSet& S) {
  require(S.empty() || S.indices().back() < A.cols(),
          "gather_columns: support index out of range");
  DenseMatrix B(A.rows(), S.size());
  for (std::size_t k = 0; k < S.size(); ++k) {
    const std::size_t j = S[k];
    for (std::size_t i = 0; i < A.rows(); ++i) B(i, k) = A(i, j);
  }
  return B;
}

DenseMatrix gram_submatrix(const DenseMatrix& A, const SupportSet& S) {
  require(S.empty() || S.indices().back() < A.cols(),
          "gram_submatrix: support index out of range");
  const std::size_t f = S.size();
  DenseMatrix G(f, f);
  for (std::size_t p = 0; p < f; ++p) {
    for (std::size_t q = p; q < f; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < A.rows(); ++i) s += A(i, S[p]) * A(i, S[q]);
      G(p, q) = s;
      G(q, p) = s;
    }
  }
  return G;
}

namespace {

// Householder reflector built at step k.  The tail of the unnormalized v
// stays below the diagonal of its own column; v0 and 2/v^T v are kept here.
struct Reflector {
  double v0 = 0.0;       // first component of the unnormalized v
  double inv_vtv = 0.0;  // 2 / v^T v, zero means identity reflector
};

// Apply H = I - inv_vtv * v v^T to the segment c[k..len), where v has first
// component h.v0 and tail vcol[k+1..len) (vcol points at the storage column
// holding the reflector).
void apply_reflector(const double* vcol, std::size_t len, std::size_t k,
                     const Reflector& h, double* c) {
  if (h.inv_vtv == 0.0) return;
  double w = h.v0 * c[k];
  for (std::size_t i = k + 1; i < len; ++i) w += vcol[i] * c[i];
  w *= h.inv_vtv;
  c[k] -= w * h.v0;
  for (std::size_t i = k + 1; i < len; ++i) c[i] -= w * vcol[i];
}

}  // namespace

DenseVector min_norm_lstsq(const DenseMatrix& B, const DenseVector& rhs) {
  const std::size_t n = B.rows();
  const std::size_t f = B.cols();
  require(rhs.size() == n, "min_norm_lstsq: rhs length mismatch");
  require(B.all_finite() && all_finite(rhs), "min_norm_lstsq: non-finite input");
  if (f == 0) return {};

  // Column-major working copy; a column stays contiguous through the sweeps.
  std::vector<double> a(n * f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) a[j * n + i] = B(i, j);

  std::vector<std::size_t> perm(f);
  for (std::size_t j = 0; j < f; ++j) perm[j] = j;

  const std::size_t kmax = std::min(n, f);
  std::vector<Reflector> refl(kmax);
  std::vector<double> rdiag(kmax, 0.0);
  DenseVector qty = rhs;  // becomes Q^T rhs as reflectors accumulate

  std::size_t rank = 0;
  for (std::size_t k = 0; k < kmax; ++k) {
    // Exact trailing norms each step: O(n f) per step keeps the pivot order
    // (and therefore the result) independent of accumulated downdates.
    std::size_t best = k;
    double best_norm2 = -1.0;
    for (std::size_t j = k; j < f; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += a[j * n + i] * a[j * n + i];
      if (s > best_norm2) {
        best_norm2 = s;
        best = j;
      }
    }
    if (best != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(a[best * n + i], a[k * n + i]);
      std::swap(perm[best], perm[k]);
    }
    const double normx = std::sqrt(std::max(best_norm2, 0.0));
    if (k == 0 ? normx == 0.0 : normx <= kPivotRelTol * std::abs(rdiag[0])) break;

    // Build v = x + sign(x0) ||x|| e1 in place (x = column k rows k..n).
    double* colk = &a[k * n];
    const double x0 = colk[k];
    const double alpha = (x0 >= 0.0 ? normx : -normx);
    Reflector h;
    h.v0 = x0 + alpha;
    double vtv = h.v0 * h.v0;
    for (std::size_t i = k + 1; i < n; ++i) vtv += colk[i] * colk[i];
    h.inv_vtv = vtv > 0.0 ? 2.0 / vtv : 0.0;
    rdiag[k] = -alpha;
    refl[k] = h;

    for (std::size_t j = k + 1; j < f; ++j)
      apply_reflector(colk, n, k, h, &a[j * n]);
    apply_reflector(colk, n, k, h, qty.data());
    colk[k] = rdiag[k];  // store the pivot; v tail stays below the diagonal
    rank = k + 1;
  }

  std::vector<double> w(f, 0.0);
  if (rank == 0) {
    // B is numerically zero: minimum-norm solution is zero.
  } else if (rank == f) {
    // Full column rank: plain back substitution on R.
    for (std::size_t ii = rank; ii-- > 0;) {
      double s = qty[ii];
      for (std::size_t j = ii + 1; j < f; ++j) s -= a[j * n + ii] * w[j];
      w[ii] = s / a[ii * n + ii];
    }
  } else {
    // Rank-deficient: finish the orthogonal decomposition.  S = R[0:r, 0:f]
    // is upper-trapezoidal; QR of S^T gives S = U^T Z^T with U upper
    // triangular, and the minimum-norm solution is Z [U^-T c; 0].
    const std::size_t r = rank;
    std::vector<double> m(f * r);  // column-major f x r, column j = row j of S
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t i = 0; i < f; ++i)
        m[j * f + i] = (i >= j) ? a[i * n + j] : 0.0;  // S(j,i) upper part

    std::vector<Reflector> zrefl(r);
    std::vector<double> udiag(r, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      double s = 0.0;
      double* colk = &m[k * f];
      for (std::size_t i = k; i < f; ++i) s += colk[i] * colk[i];
      const double normx = std::sqrt(s);
      const double x0 = colk[k];
      const double alpha = (x0 >= 0.0 ? normx : -normx);
      Reflector h;
      h.v0 = x0 + alpha;
      double vtv = h.v0 * h.v0;
      for (std::size_t i = k + 1; i < f; ++i) vtv += colk[i] * colk[i];
      h.inv_vtv = vtv > 0.0 ? 2.0 / vtv : 0.0;
      udiag[k] = -alpha;
      zrefl[k] = h;
      for (std::size_t j = k + 1; j < r; ++j)
        apply_reflector(colk, f, k, h, &m[j * f]);
      colk[k] = udiag[k];
    }

    // Forward-substitute U^T v = qty[0:r] (U^T is lower triangular with the
    // rows of U as columns of m's upper part).
    std::vector<double> t(f, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      double s = qty[i];
      for (std::size_t j = 0; j < i; ++j) s -= m[i * f + j] * t[j];
      t[i] = s / m[i * f + i];
    }
    // w = Z t = H_0 H_1 ... H_{r-1} [v; 0].
    for (std::size_t k = r; k-- > 0;)
      apply_reflector(&m[k * f], f, k, zrefl[k], t.data());
    w = std::move(t);
  }

  DenseVector out(f, 0.0);
  for (std::size_t k = 0; k < f; ++k) out[perm[k]] = w[k];
  return out;
}

DenseVector restricted_least_squares(const DenseMatrix& A, const DenseVector& y,
                                     const SupportSet& F) {
  require(A.rows() == y.size(), "restricted_least_squares: dimension mismatch");
  require(F.empty() || F.indices().back() < A.cols(),
          "restricted_least_squares: support index out of range");
  require(A.all_finite() && all_finite(y), "restricted_least_squares: non-finite input");
  DenseVector z(A.cols(), 0.0);
  if (F.empty()) return z;
  const DenseVector w = min_norm_lstsq(gather_columns(A, F), y);
  for (std::size_t k = 0; k < F.size(); ++k) z[F[k]] = w[k];
  return z;
}

std::pair<double, double> symmetric_eig_extremes(const DenseMatrix& M) {
  const std::size_t n = M.rows();
  require(n > 0 && M.cols() == n, "symmetric_eig_extremes: matrix must be square");
  require(M.all_finite(), "symmetric_eig_extremes: non-finite input");
  double scale = 0.0;
  for (double v : M.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      require(std::abs(M(i, j) - M(j, i)) <= 1e-12 * std::max(1.0, scale),
              "symmetric_eig_extremes: matrix is not symmetric");

  // Work on the symmetrized copy so the sweeps see an exactly symmetric input.
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 0.5 * (M(i, j) + M(j, i));

  double frob = 0.0;
  for (double v : a) frob += v * v;
  const double off_target = kJacobiTol * (1.0 + std::sqrt(frob));

  auto off_mass = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < kJacobiMaxSweeps && off_mass() > off_target; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;  // avoid overflow in theta^2
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) /
              (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a[p * n + p] -= t * apq;
        a[q * n + q] += t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = a[i * n + p];
          const double aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[p * n + i] = a[i * n + p];
          a[i * n + q] = s * aip + c * aiq;
          a[q * n + i] = a[i * n + q];
        }
      }
    }
  }

  double lo = a[0];
  double hi = a[0];
  for (std::size_t i = 1; i < n; ++i) {
    lo = std::min(lo, a[i * n + i]);
    hi = std::max(hi, a[i * n + i]);
  }
  return {lo, hi};
}

double least_squares_optimality_tol(const DenseMatrix& A, const DenseVector& y) {
  return 1e-8 * (1.0 + inf_norm(matvec_transpose(A, y)));
}

}  // namespace omprip
