#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "omprip/linalg.hpp"
#include "omprip/objective.hpp"
#include "omprip/omp.hpp"
#include "omprip/rsc.hpp"

namespace omprip {

// The sparse vector a recovery run is measured against.
struct TargetSignal {
  DenseVector xbar;
  SupportSet Fbar;     // support of xbar
  std::size_t kbar = 0;

  static TargetSignal from_vector(DenseVector xbar);
};

// Callable giving (rho_minus, rho_plus) at a sparsity level; throws when the
// level cannot be certified.
using RhoLookup = std::function<RhoPair(std::size_t)>;

// Smallest s <= d satisfying the sufficient sparsity condition
//   s >= |Fbar u F0| + 4 |Fbar \ F0| (rho_plus(1)/rho_minus(s))
//          * ln(20 rho_plus(|Fbar \ F0|)/rho_minus(s)),
// or nullopt when no admissible s exists.  When Fbar is contained in F0 the
// condition degenerates to s = |Fbar u F0|.
std::optional<std::size_t> condition_eq4_min_s(const SupportSet& Fbar,
                                               const SupportSet& F0, std::size_t d,
                                               const RhoLookup& rho);

// Sufficient condition specialized to an empty initial support: if
// rho_plus(kbar) <= 2 rho_minus(31 kbar) then k0 = 30 kbar iterations with
// s = 31 kbar meet the sparsity condition.
struct Corollary1Verdict {
  std::size_t kbar = 0;
  bool holds = false;
  std::size_t k0 = 0;  // 30 kbar
  std::size_t s = 0;   // 31 kbar
};

Corollary1Verdict corollary1_check(double rho_plus_kbar, double rho_minus_31kbar,
                                   std::size_t kbar);

// One evaluated inequality: both sides plus max(0, lhs - rhs).
struct LemmaSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double violation = 0.0;
};

// Support-error bound for the restricted minimizer x over F:
//   Q(x) - Q(xbar) <= 1.5 rho_plus(s) ||xbar on Fbar\F||^2
//                     + 0.5 epsilon_s(xbar)^2 / rho_plus(s),   s >= |Fbar \ F|.
LemmaSides lemma1_oracle(const ObjectiveHandle& obj, const TargetSignal& target,
                         const SupportSet& F, std::size_t s, const RscProfile& rsc);

// Parameter-error bound for the same x:
//   rho_minus(s) ||x - xbar||^2 <= 2 (Q(x) - Q(xbar))
//                                  + epsilon_s(xbar)^2 / rho_minus(s),
//   s >= |F u Fbar|.
LemmaSides lemma2_oracle(const ObjectiveHandle& obj, const TargetSignal& target,
                         const SupportSet& F, std::size_t s, const RscProfile& rsc);

// Per-step progress of the greedy selection j = argmax |grad Q(x)_i|:
//   min_alpha Q(x + alpha e_j)
//     <= Q(x) - rho_minus(s) ||x - xbar||^2
//               / (rho_plus(1) (sum_{i in Fbar\F} |xbar_i|)^2)
//               * max(0, Q(x) - Q(xbar)),   Fbar \ F nonempty, s >= |F u Fbar|.
LemmaSides lemma3_oracle(const ObjectiveHandle& obj, const TargetSignal& target,
                         const SupportSet& F, std::size_t s, const RscProfile& rsc);

enum class HypothesisMode { exact, heuristic };

// Everything a recovery-guarantee verification produces.  The verifier only
// reports: a non-conforming run (wrong iteration count, wrong initial
// support) is flagged, never extrapolated.
struct TheoryReport {
  std::size_t s_used = 0;
  bool hypothesis_holds = false;
  HypothesisMode hypothesis_mode = HypothesisMode::heuristic;
  std::size_t k0_required = 0;
  std::size_t iterations_run = 0;
  bool run_conforming = false;
  double epsilon = 0.0;
  double objective_gap = 0.0;
  double objective_bound = 0.0;
  double param_error = 0.0;
  double param_bound = 0.0;
  double slack_objective = 0.0;  // bound minus measured
  double slack_param = 0.0;
  std::vector<std::pair<std::string, LemmaSides>> lemma_checks;
};

std::string theory_report_json(const TheoryReport& report);

// Measures a finished greedy run against the recovery guarantee at level s:
// after k0 = s - |Fbar u F0| iterations,
//   Q(x) - Q(xbar) <= 2.5 epsilon_s(xbar)^2 / rho_minus(s)  and
//   ||x - xbar||   <= sqrt(6) epsilon_s(xbar) / rho_minus(s),
// with the sparsity condition above as hypothesis.  Requires rsc constants
// at levels s, 1 and |Fbar \ F0|.
TheoryReport verify_theorem1(const ObjectiveHandle& obj, const TargetSignal& target,
                             const OmpResult& result, std::size_t s,
                             const RscProfile& rsc);

// Quadratic specialization with empty initial support: with s = 31 kbar and
// k0 = 30 kbar, if rho_plus(kbar) <= 2 rho_minus(s) then
//   ||x - xbar|| <= 2 sqrt(6) rho_plus(s)^(1/2) ||A xbar - y|| / rho_minus(s).
// Requires rsc constants at levels kbar and 31 kbar.
TheoryReport verify_corollary2(const SensingProblem& p, const TargetSignal& target,
                               const OmpResult& result, const RscProfile& rsc);

}  // namespace omprip
