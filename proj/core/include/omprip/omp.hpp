#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "omprip/linalg.hpp"
#include "omprip/objective.hpp"

namespace omprip {

// Configuration for the fully corrective greedy run.
struct OmpConfig {
  std::size_t k0 = 0;      // number of greedy iterations to attempt
  SupportSet f0;           // initial support F^(0)

  // Gradient sup-norm threshold below which iterating is pointless.  Unset
  // means the adaptive default 1e-10 * (1 + Q(x^(0))); zero disables the
  // check entirely so exactly k0 iterations run.
  std::optional<double> early_stop_grad_tol;
};

// Full trace of a greedy run: entry k describes the iterate after k
// selections, so every vector below has length iterations_run() + 1 except
// `selected`, which has one entry per executed iteration.
struct OmpResult {
  std::vector<DenseVector> iterates;
  std::vector<SupportSet> supports;
  std::vector<std::size_t> selected;
  std::vector<double> objective_values;
  std::vector<double> grad_infnorms;
  bool stopped_early = false;

  std::size_t iterations_run() const { return selected.size(); }
  const DenseVector& final_iterate() const { return iterates.back(); }
  const SupportSet& final_support() const { return supports.back(); }
};

// Smallest index attaining max_i |grad_i|.  Throws on an empty gradient.
std::size_t select_coordinate(const DenseVector& grad);

// The greedy loop: start from the restricted minimizer on f0, then repeat
// k0 times: pick the coordinate with the largest absolute gradient entry,
// grow the support, and re-minimize over the enlarged support.
OmpResult omp_run(const ObjectiveHandle& obj, const OmpConfig& cfg);

// Trace as a JSON array of {k, selected_j, objective, grad_infnorm, support}
// records; selected_j is null for the initial record.
std::string trace_json(const OmpResult& result);

}  // namespace omprip
