#include "omprip/omp.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace omprip {

std::size_t select_coordinate(const DenseVector& grad) {
  if (grad.empty()) throw std::invalid_argument("select_coordinate: empty gradient");
  std::size_t best = 0;
  double best_abs = std::abs(grad[0]);
  for (std::size_t i = 1; i < grad.size(); ++i) {
    const double a = std::abs(grad[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

namespace {

// Smallest off-support index with the largest absolute gradient entry, or
// nullopt when the support already covers every coordinate.
std::optional<std::size_t> select_off_support(const DenseVector& grad,
                                              const SupportSet& F) {
  std::optional<std::size_t> best;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (F.contains(i)) continue;
    const double a = std::abs(grad[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

}  // namespace

OmpResult omp_run(const ObjectiveHandle& obj, const OmpConfig& cfg) {
  const std::size_t d = obj.dimension();
  if (!cfg.f0.empty() && cfg.f0.indices().back() >= d)
    throw std::invalid_argument("omp_run: f0 index out of range");

  OmpResult res;
  SupportSet F = cfg.f0;
  DenseVector x = obj.restricted_minimize(F);
  DenseVector g = obj.gradient(x);

  res.iterates.push_back(x);
  res.supports.push_back(F);
  res.objective_values.push_back(obj.value(x));
  res.grad_infnorms.push_back(inf_norm(g));

  const double stop_tol = cfg.early_stop_grad_tol.has_value()
                              ? *cfg.early_stop_grad_tol
                              : 1e-10 * (1.0 + res.objective_values.front());

  for (std::size_t k = 1; k <= cfg.k0; ++k) {
    if (stop_tol > 0.0 && res.grad_infnorms.back() <= stop_tol) {
      res.stopped_early = true;
      break;
    }
    std::size_t j = select_coordinate(g);
    if (F.contains(j)) {
      // Only reachable through inner-solver slack: the optimizer left the
      // largest gradient entry on the support.  Grow with the best
      // off-support coordinate instead of stalling.
      const auto alt = select_off_support(g, F);
      if (!alt.has_value()) {
        res.stopped_early = true;
        break;
      }
      j = *alt;
    }
    F = F.with(j);
    x = obj.restricted_minimize(F);
    g = obj.gradient(x);

    res.selected.push_back(j);
    res.iterates.push_back(x);
    res.supports.push_back(F);
    res.objective_values.push_back(obj.value(x));
    res.grad_infnorms.push_back(inf_norm(g));
  }
  return res;
}

std::string trace_json(const OmpResult& result) {
  nlohmann::json records = nlohmann::json::array();
  for (std::size_t k = 0; k < result.iterates.size(); ++k) {
    nlohmann::json rec;
    rec["k"] = k;
    if (k == 0)
      rec["selected_j"] = nullptr;
    else
      rec["selected_j"] = result.selected[k - 1];
    rec["objective"] = result.objective_values[k];
    rec["grad_infnorm"] = result.grad_infnorms[k];
    rec["support"] = result.supports[k].indices();
    records.push_back(rec);
  }
  return records.dump(2);
}

}  // namespace omprip
