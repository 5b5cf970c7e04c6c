#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omprip/linalg.hpp"
#include "omprip/objective.hpp"

namespace omprip {

// Default ceiling on the number of supports an exact certification may
// enumerate per sparsity level.
inline constexpr std::uint64_t kDefaultSupportBudget = 2'000'000;

// Curvature constants of one sparsity level: for the quadratic objective
// these are the extreme eigenvalues of A_S^T A_S over supports |S| = s, and
// delta = max(rho_plus - 1, 1 - rho_minus) is the isometry defect.
enum class RhoMode { exact, sampled };

struct RhoPair {
  double minus = 0.0;
  double plus = 0.0;
};

struct RscLevel {
  std::size_t s = 0;
  double rho_minus = 0.0;
  double rho_plus = 0.0;
  double delta = 0.0;
  RhoMode mode = RhoMode::exact;
  std::uint64_t sample_count = 0;  // supports examined when sampled
};

RscLevel make_level(std::size_t s, RhoPair rho, RhoMode mode,
                    std::uint64_t sample_count = 0);

// Per-level table of certified (or estimated) constants.
class RscProfile {
 public:
  void set(RscLevel level);
  const RscLevel* find(std::size_t s) const;
  const RscLevel& at(std::size_t s) const;  // throws if the level is absent
  bool has(std::size_t s) const { return find(s) != nullptr; }
  bool all_exact(const std::vector<std::size_t>& levels) const;
  std::vector<RscLevel> levels() const;

 private:
  std::map<std::size_t, RscLevel> levels_;
};

// JSON array of {s, rho_minus, rho_plus, delta, mode, sample_count} records
// (sample_count only on sampled levels).
std::string rsc_profile_json(const RscProfile& profile);

// --- support enumeration (colexicographic) ---------------------------------

// C(n, k), or nullopt on uint64 overflow.
std::optional<std::uint64_t> binomial_checked(std::uint64_t n, std::uint64_t k);

// Support of size s with colexicographic rank `rank` among subsets of
// {0, ..., d-1}.  Ranks run from 0 to C(d,s)-1.
std::vector<std::size_t> colex_unrank(std::uint64_t rank, std::size_t s, std::size_t d);

// Advance `support` (sorted, size s) to its colexicographic successor within
// {0, ..., d-1}; returns false after the last subset.
bool colex_next(std::vector<std::size_t>& support, std::size_t d);

// --- certification ----------------------------------------------------------

// Exact rho range at level s by enumerating every support colexicographically
// and taking eigenvalue extremes of each Gram submatrix.  Throws
// BudgetExceeded when C(d, s) > budget.  Deterministic for any jobs count.
RhoPair rho_exact(const DenseMatrix& A, std::size_t s,
                  std::uint64_t budget = kDefaultSupportBudget, unsigned jobs = 1);

// Sampled envelopes at level s from `trials` uniformly random supports:
// an upper envelope of rho_minus and a lower envelope of rho_plus.  With
// without_replacement the supports are distinct, and trials >= C(d, s)
// degenerates to the exact enumeration.
RhoPair rho_sampled(const DenseMatrix& A, std::size_t s, std::uint64_t trials,
                    std::uint64_t seed, bool without_replacement = false,
                    unsigned jobs = 1);

// Envelopes of the restricted strong convexity/smoothness constants of a
// general objective: ratios of the three-point divergence
// Q(x') - Q(x) - <grad Q(x), x' - x> to ||x - x'||^2 over random pairs that
// differ on at most s coordinates, drawn inside the box of the given radius
// around xbar.
RhoPair rho_sampled_general(const ObjectiveHandle& obj, const DenseVector& xbar,
                            double box_radius, std::size_t s, std::uint64_t trials,
                            std::uint64_t seed);

// --- gradient sparsity norm -------------------------------------------------

// epsilon_s(xbar): the 2-norm of the s largest-magnitude gradient entries,
// i.e. the smallest epsilon with |<grad Q(xbar), u>| <= epsilon ||u||_2 for
// every s-sparse u.
double epsilon_s_from_gradient(const DenseVector& grad, std::size_t s);
double epsilon_s(const ObjectiveHandle& obj, const DenseVector& xbar, std::size_t s);

// --- near-optimality bounds ------------------------------------------------

struct OptimalityReport {
  double epsilon = 0.0;            // epsilon_s(xbar)
  double bound_sqrt_s_inf = 0.0;   // sqrt(s) * ||grad||_inf
  double bound_l2 = 0.0;           // ||grad||_2
  std::optional<double> bound_suboptimality;  // 2 sqrt(rho_plus(s) * epsbar)
};

// Evaluates the three upper bounds on epsilon_s and checks each (within a
// 1e-9 slack) against the exactly computed value; a violation signals an
// implementation bug and throws std::logic_error.  epsbar, when given, must
// certify Q(xbar) <= inf {Q(x) : ||x||_0 <= ||xbar||_0 + s} + epsbar.
OptimalityReport proposition1_check(const ObjectiveHandle& obj, const DenseVector& xbar,
                                    std::size_t s, double rho_plus_s,
                                    std::optional<double> epsbar = std::nullopt);

}  // namespace omprip
