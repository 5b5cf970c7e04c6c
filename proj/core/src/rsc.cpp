#include "omprip/rsc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "omprip/errors.hpp"
#include "omprip/parallel.hpp"
#include "omprip/rng.hpp"

namespace omprip {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

// Extreme eigenvalues of the Gram submatrix A_S^T A_S, reading entries from
// a precomputed full Gram matrix when one is supplied.
RhoPair support_extremes(const DenseMatrix& A, const DenseMatrix* full_gram,
                         const std::vector<std::size_t>& support) {
  const std::size_t s = support.size();
  DenseMatrix G(s, s);
  if (full_gram != nullptr) {
    for (std::size_t p = 0; p < s; ++p)
      for (std::size_t q = 0; q < s; ++q) G(p, q) = (*full_gram)(support[p], support[q]);
  } else {
    for (std::size_t p = 0; p < s; ++p) {
      for (std::size_t q = p; q < s; ++q) {
        double acc = 0.0;
        for (std::size_t i = 0; i < A.rows(); ++i)
          acc += A(i, support[p]) * A(i, support[q]);
        G(p, q) = acc;
        G(q, p) = acc;
      }
    }
  }
  const auto [lo, hi] = symmetric_eig_extremes(G);
  return {lo, hi};
}

// Full Gram matrix when it is small enough to be worth caching.
std::optional<DenseMatrix> maybe_full_gram(const DenseMatrix& A) {
  if (A.cols() > 2048) return std::nullopt;
  DenseMatrix G(A.cols(), A.cols());
  for (std::size_t p = 0; p < A.cols(); ++p) {
    for (std::size_t q = p; q < A.cols(); ++q) {
      double acc = 0.0;
      for (std::size_t i = 0; i < A.rows(); ++i) acc += A(i, p) * A(i, q);
      G(p, q) = acc;
      G(q, p) = acc;
    }
  }
  return G;
}

RhoPair reduce_extremes(const std::vector<RhoPair>& parts) {
  RhoPair out{parts.front().minus, parts.front().plus};
  for (const auto& p : parts) {
    out.minus = std::min(out.minus, p.minus);
    out.plus = std::max(out.plus, p.plus);
  }
  return out;
}

}  // namespace

RscLevel make_level(std::size_t s, RhoPair rho, RhoMode mode, std::uint64_t sample_count) {
  RscLevel level;
  level.s = s;
  level.rho_minus = rho.minus;
  level.rho_plus = rho.plus;
  level.delta = std::max(rho.plus - 1.0, 1.0 - rho.minus);
  level.mode = mode;
  level.sample_count = sample_count;
  return level;
}

void RscProfile::set(RscLevel level) { levels_[level.s] = level; }

const RscLevel* RscProfile::find(std::size_t s) const {
  auto it = levels_.find(s);
  return it == levels_.end() ? nullptr : &it->second;
}

const RscLevel& RscProfile::at(std::size_t s) const {
  const RscLevel* level = find(s);
  if (level == nullptr)
    throw std::invalid_argument("RscProfile: no constants recorded for level s=" +
                                std::to_string(s));
  return *level;
}

bool RscProfile::all_exact(const std::vector<std::size_t>& levels) const {
  for (std::size_t s : levels) {
    const RscLevel* level = find(s);
    if (level == nullptr || level->mode != RhoMode::exact) return false;
  }
  return true;
}

std::vector<RscLevel> RscProfile::levels() const {
  std::vector<RscLevel> out;
  out.reserve(levels_.size());
  for (const auto& [s, level] : levels_) out.push_back(level);
  return out;
}

std::string rsc_profile_json(const RscProfile& profile) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RscLevel& level : profile.levels()) {
    nlohmann::json rec;
    rec["s"] = level.s;
    rec["rho_minus"] = level.rho_minus;
    rec["rho_plus"] = level.rho_plus;
    rec["delta"] = level.delta;
    rec["mode"] = level.mode == RhoMode::exact ? "exact" : "sampled";
    if (level.mode == RhoMode::sampled) rec["sample_count"] = level.sample_count;
    arr.push_back(rec);
  }
  return arr.dump(2);
}

std::optional<std::uint64_t> binomial_checked(std::uint64_t n, std::uint64_t k) {
  if (k > n) return std::uint64_t{0};
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // After this step the product equals C(n-k+i, i), so the division is
    // exact; bail out once the running value no longer fits in 64 bits.
    result = result * (n - k + i) / i;
    if (result > UINT64_MAX) return std::nullopt;
  }
  return static_cast<std::uint64_t>(result);
}

std::vector<std::size_t> colex_unrank(std::uint64_t rank, std::size_t s, std::size_t d) {
  require(s <= d, "colex_unrank: s exceeds d");
  std::vector<std::size_t> support(s);
  for (std::size_t j = s; j >= 1; --j) {
    // Largest c with C(c, j) <= rank; elements are strictly decreasing.
    std::size_t c = j - 1;
    std::uint64_t chosen = 0;
    for (std::size_t cand = d; cand-- > j - 1;) {
      const auto b = binomial_checked(cand, j);
      if (b.has_value() && *b <= rank) {
        c = cand;
        chosen = *b;
        break;
      }
    }
    support[j - 1] = c;
    rank -= chosen;
    d = c;  // the remaining elements must be below c
  }
  return support;
}

bool colex_next(std::vector<std::size_t>& support, std::size_t d) {
  const std::size_t s = support.size();
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t limit = (i + 1 < s) ? support[i + 1] : d;
    if (support[i] + 1 < limit) {
      ++support[i];
      for (std::size_t j = 0; j < i; ++j) support[j] = j;
      return true;
    }
  }
  return false;
}

RhoPair rho_exact(const DenseMatrix& A, std::size_t s, std::uint64_t budget,
                  unsigned jobs) {
  require(s >= 1, "rho_exact: s must be at least 1");
  require(s <= A.cols(), "rho_exact: s exceeds the number of columns");
  require(A.all_finite(), "rho_exact: non-finite input");
  const auto total = binomial_checked(A.cols(), s);
  if (!total.has_value() || *total > budget)
    throw BudgetExceeded("rho_exact: C(" + std::to_string(A.cols()) + ", " +
                         std::to_string(s) + ") exceeds the support budget of " +
                         std::to_string(budget));

  const auto full_gram = maybe_full_gram(A);
  const DenseMatrix* gram = full_gram.has_value() ? &*full_gram : nullptr;

  const std::uint64_t count = *total;
  const unsigned workers = std::max(1u, jobs);
  const std::uint64_t chunk = (count + workers - 1) / workers;
  std::vector<RhoPair> parts;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (std::uint64_t lo = 0; lo < count; lo += chunk)
    ranges.emplace_back(lo, std::min(lo + chunk, count));
  parts.resize(ranges.size());

  parallel_for(ranges.size(), workers, [&](std::size_t r) {
    auto [lo, hi] = ranges[r];
    std::vector<std::size_t> support = colex_unrank(lo, s, A.cols());
    RhoPair acc = support_extremes(A, gram, support);
    for (std::uint64_t idx = lo + 1; idx < hi; ++idx) {
      colex_next(support, A.cols());
      const RhoPair e = support_extremes(A, gram, support);
      acc.minus = std::min(acc.minus, e.minus);
      acc.plus = std::max(acc.plus, e.plus);
    }
    parts[r] = acc;
  });
  return reduce_extremes(parts);
}

RhoPair rho_sampled(const DenseMatrix& A, std::size_t s, std::uint64_t trials,
                    std::uint64_t seed, bool without_replacement, unsigned jobs) {
  require(s >= 1, "rho_sampled: s must be at least 1");
  require(s <= A.cols(), "rho_sampled: s exceeds the number of columns");
  require(trials >= 1, "rho_sampled: trials must be at least 1");
  require(A.all_finite(), "rho_sampled: non-finite input");

  const auto total = binomial_checked(A.cols(), s);
  if (without_replacement && total.has_value() && trials >= *total) {
    // Exhaustion: distinct sampling of every support is plain enumeration.
    RhoPair p = rho_exact(A, s, *total, jobs);
    return p;
  }

  const auto full_gram = maybe_full_gram(A);
  const DenseMatrix* gram = full_gram.has_value() ? &*full_gram : nullptr;

  std::vector<std::vector<std::size_t>> supports;
  supports.reserve(trials);
  if (without_replacement) {
    // Draw distinct supports sequentially, deduplicating by colex rank.
    std::unordered_set<std::uint64_t> seen;
    SplitMix64 rng(seed);
    while (supports.size() < trials) {
      auto idx = rng.sample_indices(A.cols(), s);
      std::sort(idx.begin(), idx.end());
      std::uint64_t rank = 0;
      for (std::size_t j = 0; j < s; ++j)
        rank += binomial_checked(idx[j], j + 1).value_or(0);
      if (seen.insert(rank).second) supports.push_back(std::move(idx));
    }
  } else {
    // One derived stream per trial keeps the draw independent of both the
    // worker count and the evaluation order.
    supports.resize(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
      SplitMix64 rng(derive_seed(seed, t));
      auto idx = rng.sample_indices(A.cols(), s);
      std::sort(idx.begin(), idx.end());
      supports[t] = std::move(idx);
    }
  }

  std::vector<RhoPair> parts(supports.size());
  parallel_for(supports.size(), std::max(1u, jobs),
               [&](std::size_t t) { parts[t] = support_extremes(A, gram, supports[t]); });
  return reduce_extremes(parts);
}

RhoPair rho_sampled_general(const ObjectiveHandle& obj, const DenseVector& xbar,
                            double box_radius, std::size_t s, std::uint64_t trials,
                            std::uint64_t seed) {
  require(xbar.size() == obj.dimension(), "rho_sampled_general: dimension mismatch");
  require(box_radius > 0.0, "rho_sampled_general: box radius must be positive");
  require(s >= 1 && s <= obj.dimension(), "rho_sampled_general: invalid s");
  require(trials >= 1, "rho_sampled_general: trials must be at least 1");

  const std::size_t d = obj.dimension();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::uint64_t t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_seed(seed, t));
    // Base point anywhere in the box, partner differing on <= s coordinates.
    DenseVector x(d);
    for (std::size_t i = 0; i < d; ++i)
      x[i] = xbar[i] + box_radius * (2.0 * rng.uniform01() - 1.0);
    DenseVector xp = x;
    const auto coords = rng.sample_indices(d, s);
    for (std::size_t j : coords)
      xp[j] = xbar[j] + box_radius * (2.0 * rng.uniform01() - 1.0);
    double dist2 = 0.0;
    for (std::size_t j : coords) {
      const double dj = xp[j] - x[j];
      dist2 += dj * dj;
    }
    if (dist2 == 0.0) continue;
    const DenseVector g = obj.gradient(x);
    double inner = 0.0;
    for (std::size_t j : coords) inner += g[j] * (xp[j] - x[j]);
    const double ratio = (obj.value(xp) - obj.value(x) - inner) / dist2;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  require(std::isfinite(lo) && std::isfinite(hi),
          "rho_sampled_general: every sampled pair was degenerate");
  return {lo, hi};
}

double epsilon_s_from_gradient(const DenseVector& grad, std::size_t s) {
  require(s >= 1, "epsilon_s: s must be at least 1");
  require(!grad.empty(), "epsilon_s: empty gradient");
  s = std::min(s, grad.size());
  std::vector<double> mags(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) mags[i] = std::abs(grad[i]);
  std::nth_element(mags.begin(), mags.begin() + (s - 1), mags.end(),
                   std::greater<double>());
  double acc = 0.0;
  for (std::size_t i = 0; i < s; ++i) acc += mags[i] * mags[i];
  return std::sqrt(acc);
}

double epsilon_s(const ObjectiveHandle& obj, const DenseVector& xbar, std::size_t s) {
  require(xbar.size() == obj.dimension(), "epsilon_s: dimension mismatch");
  return epsilon_s_from_gradient(obj.gradient(xbar), s);
}

OptimalityReport proposition1_check(const ObjectiveHandle& obj, const DenseVector& xbar,
                                    std::size_t s, double rho_plus_s,
                                    std::optional<double> epsbar) {
  const DenseVector g = obj.gradient(xbar);
  OptimalityReport rep;
  rep.epsilon = epsilon_s_from_gradient(g, s);
  rep.bound_sqrt_s_inf = std::sqrt(static_cast<double>(s)) * inf_norm(g);
  rep.bound_l2 = norm2(g);
  constexpr double kSlack = 1e-9;
  if (rep.epsilon > rep.bound_sqrt_s_inf + kSlack)
    throw std::logic_error("proposition1_check: epsilon_s exceeded sqrt(s)*||g||_inf");
  if (rep.epsilon > rep.bound_l2 + kSlack)
    throw std::logic_error("proposition1_check: epsilon_s exceeded ||g||_2");
  if (epsbar.has_value()) {
    require(*epsbar >= 0.0, "proposition1_check: epsbar must be nonnegative");
    require(rho_plus_s > 0.0, "proposition1_check: rho_plus_s must be positive");
    rep.bound_suboptimality = 2.0 * std::sqrt(rho_plus_s * *epsbar);
    if (rep.epsilon > *rep.bound_suboptimality + kSlack)
      throw std::logic_error(
          "proposition1_check: epsilon_s exceeded the suboptimality bound");
  }
  return rep;
}

}  // namespace omprip
