#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omprip/linalg.hpp"
#include "omprip/theory.hpp"

namespace omprip {

// --- instance generation ----------------------------------------------------

// n x d matrix with i.i.d. standard normal entries scaled by 1/sqrt(n),
// generated row-major from one derived stream; optionally rescale every
// column to unit 2-norm.  Bitwise reproducible for a given seed.
DenseMatrix gen_gaussian_matrix(std::size_t n, std::size_t d, std::uint64_t seed,
                                bool normalize_columns = false);

// Magnitude layout of a synthetic sparse signal: flat gives unit magnitudes,
// decay gives rate^i for the i-th drawn coordinate.
struct SignalProfile {
  enum class Kind { flat, decay };
  Kind kind = Kind::flat;
  double rate = 0.5;

  static SignalProfile flat() { return {Kind::flat, 0.0}; }
  static SignalProfile decay(double rate) { return {Kind::decay, rate}; }
};

// kbar-sparse signal with a uniformly random support and random signs,
// returned with its support and sparsity attached.
TargetSignal gen_sparse_signal(std::size_t d, std::size_t kbar,
                               const SignalProfile& profile, std::uint64_t seed);

// Noise drawn uniformly on the sphere of the given radius: a normalized
// Gaussian direction scaled so the 2-norm equals `radius` exactly (zero
// radius gives the zero vector).
DenseVector gen_sphere_noise(std::size_t n, double radius, std::uint64_t seed);

// --- single trials -----------------------------------------------------------

enum class SensingKind {
  gaussian,  // scaled i.i.d. Gaussian rows
  identity,  // A(i, j) = [i mod d == j]: the identity when n = d, identity-
             // augmented (cyclically repeated rows) when n > d
};

struct TrialSpec {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t kbar = 0;
  SignalProfile signal_profile;
  double noise_level = 0.0;  // exact 2-norm of the additive observation noise
  std::size_t k0 = 0;
  std::uint64_t seed = 0;
  bool normalize_columns = false;
  SensingKind sensing = SensingKind::gaussian;
};

struct TrialRecord {
  TrialSpec spec;
  double l2_error = 0.0;
  bool support_recovered_topk = false;  // top-kbar entries of the final
                                        // iterate match supp(xbar)
  double objective_gap = 0.0;
  std::size_t iterations_run = 0;
};

// The materialized instance behind a trial spec: sensing matrix, planted
// signal, and observation y = A xbar + noise.  run_trial consumes exactly
// this, so oracles can re-examine the instance a trial saw.
struct TrialInstance {
  DenseMatrix A;
  TargetSignal target;
  DenseVector y;
};

TrialInstance build_trial_instance(const TrialSpec& spec);

// Generate one instance from the spec's seed, run the greedy solver with an
// empty initial support, and measure the recovery.
TrialRecord run_trial(const TrialSpec& spec);

// --- phase sweeps ------------------------------------------------------------

enum class K0Rule { exact_k, thirty_k };

struct SweepConfig {
  std::size_t d = 0;
  std::vector<std::size_t> kbars;
  std::vector<std::size_t> n_grid;   // ascending
  std::size_t trials_per_cell = 0;
  K0Rule k0_rule = K0Rule::thirty_k;
  SignalProfile profile;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  SensingKind sensing = SensingKind::gaussian;
  bool normalize_columns = false;
  unsigned jobs = 1;
};

struct PhaseCell {
  std::size_t kbar = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_l2_error = 0.0;
};

struct PhaseTable {
  SweepConfig config;
  std::vector<PhaseCell> cells;  // kbars-major, n ascending within a column
  // Smallest n in the grid with success rate >= 0.5, per kbar (same order
  // as config.kbars); nullopt when the column never reaches 0.5.
  std::vector<std::optional<std::size_t>> n50;
};

// Success per trial: noiseless runs must reach relative error 1e-6; noisy
// runs are checked against the certified error bound when a sampled
// certificate at s = 31 kbar is available, and otherwise against the noise
// scale itself.  Per-trial seeds derive from (seed, kbar, n, trial), so the
// table is identical for every jobs value.
PhaseTable phase_sweep(const SweepConfig& config);

// CSV rows "kbar,n,trials,successes,success_rate,mean_l2_error".
std::string phase_table_csv(const PhaseTable& table);

// Summary JSON: per-kbar n*_50 plus the classical n ~ 2 kbar ln(d - kbar)
// reference curve for context.
std::string sweep_summary_json(const PhaseTable& table);

// --- randomized verification suites -----------------------------------------

// Aggregate result of one suite run; details_json carries the full document
// the CLI embeds in its report file.
struct SuiteOutcome {
  std::string suite;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double max_violation = 0.0;
  std::uint64_t worst_seed = 0;
  std::string details_json;
};

// Desk-scale random quadratic instances (n = 8, d = 12, kbar <= 3) with
// exactly enumerated constants; every lemma oracle must come back with
// violation <= 1e-9.
SuiteOutcome run_lemma_suite(std::size_t instances, std::uint64_t seed, unsigned jobs);

// Identity-family end-to-end checks of the recovery guarantee (noise radii
// 0, 0.01, 0.1) plus one small Gaussian report emitted without assertion
// when its hypothesis cannot be certified.
SuiteOutcome run_theorem1_suite(std::size_t instances, std::uint64_t seed, unsigned jobs);

// Closed-form sparsity-condition arithmetic, identity-family noisy recovery
// against the quadratic corollary bound, and the consistency of that bound
// with the general guarantee.
SuiteOutcome run_corollaries_suite(std::size_t instances, std::uint64_t seed,
                                   unsigned jobs);

}  // namespace omprip
