#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "omprip/linalg.hpp"
#include "omprip/objective.hpp"
#include "omprip/omp.hpp"
#include "omprip/rng.hpp"
#include "oracles.hpp"

using namespace omprip;

namespace {

DenseMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  DenseMatrix A(n, d);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) A(i, j) = rng.gaussian() / std::sqrt(double(n));
  return A;
}

}  // namespace

TEST_CASE("coordinate selection picks the largest magnitude, lowest index first") {
  CHECK(select_coordinate(DenseVector{0.0, -5.0, 3.0}) == 1);
  CHECK(select_coordinate(DenseVector{2.0, -2.0}) == 0);
  CHECK(select_coordinate(DenseVector{0.0}) == 0);
  CHECK_THROWS_AS(select_coordinate(DenseVector{}), std::invalid_argument);

  SplitMix64 rng(9);
  DenseVector g(50);
  for (double& e : g) e = rng.gaussian();
  CHECK(select_coordinate(g) == oracles::argmax_abs_scan(g));
}

TEST_CASE("one step on an identity problem recovers a single spike") {
  const SensingProblem p(DenseMatrix::identity(4), DenseVector{0.0, 0.0, 7.0, 0.0});
  const auto obj = quadratic_objective(p);
  const OmpResult r = omp_run(*obj, OmpConfig{1, SupportSet{}, 0.0});
  REQUIRE(r.iterations_run() == 1);
  CHECK(r.selected[0] == 2);
  CHECK(r.final_support() == SupportSet{2});
  CHECK(r.final_iterate() == DenseVector{0.0, 0.0, 7.0, 0.0});
  CHECK(r.objective_values.back() == 0.0);
}

TEST_CASE("a zero observation stops immediately under the adaptive default") {
  const SensingProblem p(DenseMatrix::identity(4), DenseVector(4, 0.0));
  const auto obj = quadratic_objective(p);
  const OmpResult r = omp_run(*obj, OmpConfig{3, SupportSet{}});
  CHECK(r.stopped_early);
  CHECK(r.iterations_run() == 0);
  CHECK(r.final_iterate() == DenseVector(4, 0.0));
  CHECK(r.final_support().empty());
}

TEST_CASE("two steps recover a planted 2-sparse signal exactly and uniquely") {
  const DenseMatrix A = random_matrix(10, 20, 13);
  DenseVector xbar(20, 0.0);
  xbar[3] = 1.0;
  xbar[17] = -0.5;
  const DenseVector y = matvec(A, xbar);
  const auto obj = quadratic_objective(SensingProblem(A, y));

  const OmpResult r = omp_run(*obj, OmpConfig{2, SupportSet{}, 0.0});
  const SupportSet recovered = r.final_support();
  CHECK(recovered.contains(3));
  CHECK(recovered.contains(17));
  DenseVector diff = r.final_iterate();
  for (std::size_t j = 0; j < 20; ++j) diff[j] -= xbar[j];
  CHECK(norm2(diff) <= 1e-8);

  // Independent exhaustive search over all 2-subsets certifies that {3, 17}
  // is the unique best support, with a clear residual gap to the runner-up.
  const oracles::BestSupport best = oracles::best_support_exhaustive(A, y, 2);
  REQUIRE(best.indices == std::vector<std::size_t>{3, 17});
  CHECK(best.residual_sq <= 1e-18);
  CHECK(best.runner_up_residual_sq >= 1e-4);
}

TEST_CASE("run invariants hold on a generic noisy instance") {
  const DenseMatrix A = random_matrix(12, 16, 14);
  SplitMix64 rng(140);
  DenseVector y(12);
  for (double& e : y) e = rng.gaussian();
  const auto obj = quadratic_objective(SensingProblem(A, y));

  const OmpConfig cfg{6, SupportSet{}, 0.0};
  const OmpResult r = omp_run(*obj, cfg);
  REQUIRE(r.iterations_run() == 6);
  REQUIRE(r.iterates.size() == 7);
  REQUIRE(r.supports.size() == 7);
  REQUIRE(r.objective_values.size() == 7);
  REQUIRE(r.grad_infnorms.size() == 7);

  // Objective values never increase, supports grow by exactly the selected
  // coordinate, iterates live on their supports, and selections are fresh.
  for (std::size_t k = 1; k <= 6; ++k) {
    CHECK(r.objective_values[k] <= r.objective_values[k - 1] + 1e-9);
    CHECK_FALSE(r.supports[k - 1].contains(r.selected[k - 1]));
    CHECK(r.supports[k] == r.supports[k - 1].with(r.selected[k - 1]));
    for (std::size_t j = 0; j < 16; ++j)
      if (!r.supports[k].contains(j)) CHECK(r.iterates[k][j] == 0.0);
    CHECK(r.objective_values[k] == obj->value(r.iterates[k]));
  }

  // With an empty initial support the first selection maximizes |A^T y|.
  const DenseVector aty = matvec_transpose(A, y);
  DenseVector scaled = aty;
  for (double& e : scaled) e *= 2.0;
  CHECK(r.selected[0] == oracles::argmax_abs_scan(scaled));

  // Bitwise determinism across reruns.
  const OmpResult r2 = omp_run(*obj, cfg);
  CHECK(r2.selected == r.selected);
  for (std::size_t k = 0; k <= 6; ++k) {
    CHECK(r2.iterates[k] == r.iterates[k]);
    CHECK(r2.objective_values[k] == r.objective_values[k]);
  }
}

TEST_CASE("a nonempty initial support is honored and extended") {
  const DenseMatrix A = random_matrix(9, 12, 15);
  SplitMix64 rng(150);
  DenseVector y(9);
  for (double& e : y) e = rng.gaussian();
  const auto obj = quadratic_objective(SensingProblem(A, y));

  const SupportSet f0{2, 5};
  const OmpResult r = omp_run(*obj, OmpConfig{3, f0, 0.0});
  CHECK(r.supports.front() == f0);
  CHECK(r.iterates.front() == obj->restricted_minimize(f0));
  for (std::size_t j : f0.indices()) CHECK(r.final_support().contains(j));
  CHECK(r.final_support().size() == 5);

  // The start already minimizes over f0, so its on-support gradient is flat
  // and the first selection must come from outside f0.
  CHECK_FALSE(f0.contains(r.selected[0]));
}

TEST_CASE("an explicit gradient threshold stops the loop once met") {
  const SensingProblem p(DenseMatrix::identity(3), DenseVector{5.0, 0.001, 0.0});
  const auto obj = quadratic_objective(p);
  // After recovering the big spike the gradient sup-norm is 2*0.001; a
  // threshold above that stops the run at one iteration.
  const OmpResult r = omp_run(*obj, OmpConfig{3, SupportSet{}, 0.01});
  CHECK(r.stopped_early);
  CHECK(r.iterations_run() == 1);
  CHECK(r.selected[0] == 0);

  // Disabling the check runs all requested iterations.
  const OmpResult full = omp_run(*obj, OmpConfig{3, SupportSet{}, 0.0});
  CHECK_FALSE(full.stopped_early);
  CHECK(full.iterations_run() == 3);
  CHECK(full.objective_values.back() <= 1e-18);
}

TEST_CASE("saturated supports stop the loop instead of stalling") {
  const SensingProblem p(DenseMatrix::identity(3), DenseVector{1.0, 2.0, 3.0});
  const auto obj = quadratic_objective(p);

  // Out-of-range initial indices are rejected up front.
  CHECK_THROWS_AS(omp_run(*obj, OmpConfig{1, SupportSet{7}, 0.0}),
                  std::invalid_argument);

  // Asking for more iterations than free coordinates fills the support and
  // then stops; it never re-selects an on-support coordinate.
  const OmpResult r = omp_run(*obj, OmpConfig{5, SupportSet{}, 0.0});
  CHECK(r.stopped_early);
  CHECK(r.iterations_run() == 3);
  CHECK(r.final_support().size() == 3);
  CHECK(r.final_iterate() == DenseVector{1.0, 2.0, 3.0});

  // Exactly filling the dimension is fine.
  const OmpResult full = omp_run(*obj, OmpConfig{1, SupportSet{0, 1}, 0.0});
  CHECK(full.final_support().size() == 3);
}

TEST_CASE("trace serialization matches the run record") {
  const SensingProblem p(DenseMatrix::identity(3), DenseVector{1.0, -2.0, 0.5});
  const auto obj = quadratic_objective(p);
  const OmpResult r = omp_run(*obj, OmpConfig{2, SupportSet{}, 0.0});

  const nlohmann::json doc = nlohmann::json::parse(trace_json(r));
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == r.iterations_run() + 1);
  CHECK(doc[0]["k"] == 0);
  CHECK(doc[0]["selected_j"].is_null());
  for (std::size_t k = 0; k < doc.size(); ++k) {
    CHECK(doc[k]["k"] == k);
    CHECK(doc[k]["objective"] == doctest::Approx(r.objective_values[k]).epsilon(1e-15));
    CHECK(doc[k]["grad_infnorm"] ==
          doctest::Approx(r.grad_infnorms[k]).epsilon(1e-15));
    REQUIRE(doc[k]["support"].is_array());
    const auto idx = r.supports[k].indices();
    REQUIRE(doc[k]["support"].size() == idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t)
      CHECK(doc[k]["support"][t] == idx[t]);
    if (k > 0) CHECK(doc[k]["selected_j"] == r.selected[k - 1]);
  }
}
