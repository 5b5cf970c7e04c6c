#include "omprip/theory.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace omprip {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

double distance2(const DenseVector& a, const DenseVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double di = a[i] - b[i];
    s += di * di;
  }
  return s;
}

LemmaSides make_sides(double lhs, double rhs) {
  return {lhs, rhs, std::max(0.0, lhs - rhs)};
}

}  // namespace

TargetSignal TargetSignal::from_vector(DenseVector xbar) {
  require(all_finite(xbar), "TargetSignal: non-finite entries");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < xbar.size(); ++i)
    if (xbar[i] != 0.0) idx.push_back(i);
  TargetSignal t;
  t.kbar = idx.size();
  t.Fbar = SupportSet(std::move(idx));
  t.xbar = std::move(xbar);
  return t;
}

std::optional<std::size_t> condition_eq4_min_s(const SupportSet& Fbar,
                                               const SupportSet& F0, std::size_t d,
                                               const RhoLookup& rho) {
  const std::size_t base = Fbar.set_union(F0).size();
  const std::size_t m = Fbar.set_difference(F0).size();
  if (base > d) return std::nullopt;
  if (m == 0) return base;  // nothing left to discover

  const double rho_plus_1 = rho(1).plus;
  const double rho_plus_m = rho(m).plus;
  require(rho_plus_1 > 0.0 && rho_plus_m > 0.0,
          "condition_eq4_min_s: rho_plus must be positive");

  for (std::size_t s = std::max<std::size_t>(base, 1); s <= d; ++s) {
    const double rho_minus_s = rho(s).minus;
    if (rho_minus_s <= 0.0) continue;  // condition unsatisfiable at this level
    const double needed =
        static_cast<double>(base) +
        4.0 * static_cast<double>(m) * (rho_plus_1 / rho_minus_s) *
            std::log(20.0 * rho_plus_m / rho_minus_s);
    if (static_cast<double>(s) >= needed) return s;
  }
  return std::nullopt;
}

Corollary1Verdict corollary1_check(double rho_plus_kbar, double rho_minus_31kbar,
                                   std::size_t kbar) {
  require(kbar >= 1, "corollary1_check: kbar must be at least 1");
  require(rho_plus_kbar > 0.0, "corollary1_check: rho_plus must be positive");
  Corollary1Verdict v;
  v.kbar = kbar;
  v.holds = rho_minus_31kbar > 0.0 && rho_plus_kbar <= 2.0 * rho_minus_31kbar;
  v.k0 = 30 * kbar;
  v.s = 31 * kbar;
  return v;
}

LemmaSides lemma1_oracle(const ObjectiveHandle& obj, const TargetSignal& target,
                         const SupportSet& F, std::size_t s, const RscProfile& rsc) {
  const SupportSet missed = target.Fbar.set_difference(F);
  require(s >= missed.size(), "lemma1_oracle: s below |Fbar \\ F|");
  const double rho_plus = rsc.at(s).rho_plus;
  require(rho_plus > 0.0, "lemma1_oracle: rho_plus must be positive");

  const DenseVector x = obj.restricted_minimize(F);
  double missed_mass = 0.0;
  for (std::size_t i : missed) missed_mass += target.xbar[i] * target.xbar[i];
  const double eps = epsilon_s(obj, target.xbar, s);

  const double lhs = obj.value(x) - obj.value(target.xbar);
  const double rhs = 1.5 * rho_plus * missed_mass + 0.5 * eps * eps / rho_plus;
  return make_sides(lhs, rhs);
}

LemmaSides lemma2_oracle(const ObjectiveHandle& obj, const TargetSignal& target,
                         const SupportSet& F, std::size_t s, const RscProfile& rsc) {
  require(s >= F.set_union(target.Fbar).size(), "lemma2_oracle: s below |F u Fbar|");
  const double rho_minus = rsc.at(s).rho_minus;
  require(rho_minus > 0.0, "lemma2_oracle: rho_minus must be positive");

  const DenseVector x = obj.restricted_minimize(F);
  const double eps = epsilon_s(obj, target.xbar, s);

  const double lhs = rho_minus * distance2(x, target.xbar);
  const double rhs =
      2.0 * (obj.value(x) - obj.value(target.xbar)) + eps * eps / rho_minus;
  return make_sides(lhs, rhs);
}

LemmaSides lemma3_oracle(const ObjectiveHandle& obj, const TargetSignal& target,
                         const SupportSet& F, std::size_t s, const RscProfile& rsc) {
  const SupportSet missed = target.Fbar.set_difference(F);
  require(!missed.empty(), "lemma3_oracle: Fbar \\ F must be nonempty");
  require(s >= F.set_union(target.Fbar).size(), "lemma3_oracle: s below |F u Fbar|");
  const double rho_minus = rsc.at(s).rho_minus;
  const double rho_plus_1 = rsc.at(1).rho_plus;
  require(rho_minus > 0.0 && rho_plus_1 > 0.0,
          "lemma3_oracle: constants must be positive");

  const DenseVector x = obj.restricted_minimize(F);
  const std::size_t j = select_coordinate(obj.gradient(x));

  double missed_l1 = 0.0;
  for (std::size_t i : missed) missed_l1 += std::abs(target.xbar[i]);

  const double qx = obj.value(x);
  const double gap = std::max(0.0, qx - obj.value(target.xbar));
  const double lhs = obj.min_along_coordinate(x, j);
  const double rhs = qx - rho_minus * distance2(x, target.xbar) /
                              (rho_plus_1 * missed_l1 * missed_l1) * gap;
  return make_sides(lhs, rhs);
}

namespace {

// Shared tail of both verifiers: measure the final iterate and fill slacks.
void measure_run(const ObjectiveHandle& obj, const TargetSignal& target,
                 const OmpResult& result, double rho_minus_s, TheoryReport& rep) {
  const DenseVector& x = result.final_iterate();
  rep.iterations_run = result.iterations_run();
  rep.objective_gap = obj.value(x) - obj.value(target.xbar);
  rep.param_error = std::sqrt(distance2(x, target.xbar));
  rep.objective_bound = 2.5 * rep.epsilon * rep.epsilon / rho_minus_s;
  rep.param_bound = std::sqrt(6.0) * rep.epsilon / rho_minus_s;
  rep.slack_objective = rep.objective_bound - rep.objective_gap;
  rep.slack_param = rep.param_bound - rep.param_error;
}

}  // namespace

TheoryReport verify_theorem1(const ObjectiveHandle& obj, const TargetSignal& target,
                             const OmpResult& result, std::size_t s,
                             const RscProfile& rsc) {
  require(s >= 1, "verify_theorem1: s must be at least 1");
  require(!result.iterates.empty(), "verify_theorem1: empty run");
  require(target.xbar.size() == obj.dimension(), "verify_theorem1: dimension mismatch");

  const SupportSet& F0 = result.supports.front();
  const std::size_t base = target.Fbar.set_union(F0).size();
  const std::size_t m = target.Fbar.set_difference(F0).size();

  TheoryReport rep;
  rep.s_used = s;
  const RscLevel& level_s = rsc.at(s);
  require(level_s.rho_minus > 0.0, "verify_theorem1: rho_minus(s) must be positive");
  rep.epsilon = epsilon_s(obj, target.xbar, s);
  measure_run(obj, target, result, level_s.rho_minus, rep);

  rep.k0_required = s >= base ? s - base : 0;
  rep.run_conforming = s >= base && rep.iterations_run == rep.k0_required;

  if (m == 0) {
    rep.hypothesis_holds = s >= base;
    rep.hypothesis_mode = rsc.all_exact({s}) ? HypothesisMode::exact
                                             : HypothesisMode::heuristic;
  } else {
    const double rho_plus_1 = rsc.at(1).rho_plus;
    const double rho_plus_m = rsc.at(m).rho_plus;
    const double needed =
        static_cast<double>(base) +
        4.0 * static_cast<double>(m) * (rho_plus_1 / level_s.rho_minus) *
            std::log(20.0 * rho_plus_m / level_s.rho_minus);
    rep.hypothesis_holds = static_cast<double>(s) >= needed;
    rep.hypothesis_mode = rsc.all_exact({1, m, s}) ? HypothesisMode::exact
                                                   : HypothesisMode::heuristic;
  }
  return rep;
}

TheoryReport verify_corollary2(const SensingProblem& p, const TargetSignal& target,
                               const OmpResult& result, const RscProfile& rsc) {
  require(target.kbar >= 1, "verify_corollary2: kbar must be at least 1");
  require(!result.iterates.empty(), "verify_corollary2: empty run");
  require(target.xbar.size() == p.A.cols(), "verify_corollary2: dimension mismatch");

  const std::size_t s = 31 * target.kbar;
  const RscLevel& level_s = rsc.at(s);
  const RscLevel& level_k = rsc.at(target.kbar);
  require(level_s.rho_minus > 0.0, "verify_corollary2: rho_minus(s) must be positive");

  QuadraticObjective obj(p);
  DenseVector residual = matvec(p.A, target.xbar);
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= p.y[i];
  const double noise_norm = norm2(residual);

  TheoryReport rep;
  rep.s_used = s;
  // Via the near-optimality bound with epsbar = ||A xbar - y||^2: the
  // quadratic objective is nonnegative, so xbar is epsbar-suboptimal among
  // all (kbar + s)-sparse points.
  rep.epsilon = 2.0 * std::sqrt(level_s.rho_plus) * noise_norm;
  measure_run(obj, target, result, level_s.rho_minus, rep);

  rep.k0_required = 30 * target.kbar;
  rep.run_conforming = result.supports.front().empty() &&
                       rep.iterations_run == rep.k0_required;
  rep.hypothesis_holds = level_s.rho_minus > 0.0 &&
                         level_k.rho_plus <= 2.0 * level_s.rho_minus;
  rep.hypothesis_mode = rsc.all_exact({target.kbar, s}) ? HypothesisMode::exact
                                                        : HypothesisMode::heuristic;
  return rep;
}

std::string theory_report_json(const TheoryReport& report) {
  nlohmann::json j;
  j["s_used"] = report.s_used;
  j["hypothesis_holds"] = report.hypothesis_holds;
  j["hypothesis_mode"] =
      report.hypothesis_mode == HypothesisMode::exact ? "exact" : "heuristic";
  j["k0_required"] = report.k0_required;
  j["iterations_run"] = report.iterations_run;
  j["run_conforming"] = report.run_conforming;
  j["epsilon"] = report.epsilon;
  j["objective_gap"] = report.objective_gap;
  j["objective_bound"] = report.objective_bound;
  j["param_error"] = report.param_error;
  j["param_bound"] = report.param_bound;
  j["slack_objective"] = report.slack_objective;
  j["slack_param"] = report.slack_param;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& [name, sides] : report.lemma_checks) {
    nlohmann::json c;
    c["lemma"] = name;
    c["lhs"] = sides.lhs;
    c["rhs"] = sides.rhs;
    c["violation"] = sides.violation;
    checks.push_back(c);
  }
  j["lemma_checks"] = checks;
  return j.dump(2);
}

}  // namespace omprip
