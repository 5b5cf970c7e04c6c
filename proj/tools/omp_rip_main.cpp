#include <cerrno>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "omprip/errors.hpp"
#include "omprip/harness.hpp"
#include "omprip/io.hpp"
#include "omprip/linalg.hpp"
#include "omprip/omp.hpp"
#include "omprip/rng.hpp"
#include "omprip/rsc.hpp"
#include "omprip/theory.hpp"

namespace {

using namespace omprip;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;
constexpr int kExitSolver = 4;
constexpr int kExitVerification = 5;

std::uint64_t enumeration_budget() {
  const char* env = std::getenv("OMP_RIP_BUDGET");
  if (env == nullptr || *env == '\0') return kDefaultSupportBudget;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || errno == ERANGE || v == 0)
    throw ParseError("OMP_RIP_BUDGET must be a positive integer");
  return static_cast<std::uint64_t>(v);
}

double parse_strict_double(const std::string& text, const char* what) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError(std::string("malformed number in ") + what + ": " + text);
  return v;
}

SignalProfile parse_profile(const std::string& text) {
  if (text == "flat") return SignalProfile::flat();
  if (text.rfind("decay:", 0) == 0) {
    const double rate = parse_strict_double(text.substr(6), "--profile");
    if (!(rate > 0.0 && rate < 1.0))
      throw ParseError("--profile decay rate must lie in (0, 1)");
    return SignalProfile::decay(rate);
  }
  throw ParseError("--profile must be 'flat' or 'decay:RATE'");
}

// Writes the primary document to --output, or stdout when no path was given.
void emit(const std::string& output_path, const std::string& content) {
  if (output_path.empty())
    std::cout << content;
  else
    write_text_file(output_path, content);
}

void check_format(const std::string& format, const std::string& expected,
                  const char* subcommand) {
  if (format != expected)
    throw ParseError(std::string(subcommand) + " emits " + expected +
                     "; --format " + format + " is not supported");
}

struct CommonArgs {
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned jobs = 1;
  std::string output;
  std::string format;
  int verbosity = 0;
};

void add_common(CLI::App* sub, CommonArgs& args, const std::string& default_format) {
  args.format = default_format;
  sub->add_option("--seed", args.seed, "Seed for all randomized draws")
      ->each([&args](const std::string&) { args.seed_given = true; });
  sub->add_option("--jobs", args.jobs, "Worker-thread cap (output is independent of it)")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  sub->add_option("--output", args.output, "Primary output path (stdout if omitted)");
  sub->add_option("--format", args.format, "Primary output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sub->add_flag("-v,--verbose", args.verbosity, "Progress notes on stderr");
}

int run_certify(const std::string& matrix_path, std::size_t s_max,
                const std::string& mode, std::size_t trials, const CommonArgs& common) {
  check_format(common.format, "json", "certify");
  const bool sampled = mode == "sampled";
  if (sampled && !common.seed_given)
    throw ParseError("certify --mode sampled requires --seed");

  const DenseMatrix A = matrix_from_csv(read_text_file(matrix_path));
  const std::uint64_t budget = enumeration_budget();
  const std::size_t s_hi = std::min<std::size_t>(s_max, A.cols());

  RscProfile profile;
  for (std::size_t s = 1; s <= s_hi; ++s) {
    if (common.verbosity > 0) std::cerr << "certify: level s=" << s << "\n";
    if (sampled)
      profile.set(make_level(s,
                             rho_sampled(A, s, trials, derive_seed(common.seed, s),
                                         false, common.jobs),
                             RhoMode::sampled, trials));
    else
      profile.set(make_level(s, rho_exact(A, s, budget, common.jobs), RhoMode::exact));
  }

  nlohmann::json doc;
  doc["matrix"] = {{"rows", A.rows()}, {"cols", A.cols()}};
  doc["mode"] = sampled ? "sampled" : "exact";
  doc["s_max_requested"] = s_max;
  doc["s_max_effective"] = s_hi;
  doc["levels"] = nlohmann::json::parse(rsc_profile_json(profile));

  nlohmann::json verdicts = nlohmann::json::array();
  for (std::size_t kbar = 1; 31 * kbar <= s_hi; ++kbar) {
    const RscLevel& lk = profile.at(kbar);
    const RscLevel& ls = profile.at(31 * kbar);
    const Corollary1Verdict v = corollary1_check(lk.rho_plus, ls.rho_minus, kbar);
    nlohmann::json rec;
    rec["kbar"] = kbar;
    rec["holds"] = v.holds;
    rec["k0"] = v.k0;
    rec["s"] = v.s;
    rec["mode"] = lk.mode == RhoMode::exact && ls.mode == RhoMode::exact ? "exact"
                                                                         : "sampled";
    verdicts.push_back(rec);
  }
  doc["corollary1"] = verdicts;

  emit(common.output, doc.dump(2) + "\n");
  return kExitOk;
}

int run_recover(const std::string& problem_path, std::size_t k0,
                const std::vector<std::size_t>& f0_indices,
                const std::string& trace_path,
                const std::optional<double>& early_stop_grad_tol,
                const CommonArgs& common) {
  check_format(common.format, "csv", "recover");
  const LoadedProblem problem = load_problem(problem_path);
  const std::size_t d = problem.objective->dimension();
  for (std::size_t idx : f0_indices)
    if (idx >= d)
      throw ParseError("--f0_indices entry " + std::to_string(idx) +
                       " is out of range for dimension " + std::to_string(d));

  OmpConfig cfg;
  cfg.k0 = k0;
  try {
    cfg.f0 = SupportSet(f0_indices);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("--f0_indices: ") + e.what());
  }
  if (early_stop_grad_tol.has_value()) cfg.early_stop_grad_tol = *early_stop_grad_tol;

  const OmpResult result = omp_run(*problem.objective, cfg);
  if (common.verbosity > 0)
    std::cerr << "recover: ran " << result.iterations_run() << " iterations\n";

  emit(common.output, vector_to_csv(result.final_iterate()));
  if (!trace_path.empty()) write_text_file(trace_path, trace_json(result) + "\n");
  return kExitOk;
}

int run_verify(const std::string& suite, std::size_t instances,
               const CommonArgs& common) {
  check_format(common.format, "json", "verify");
  if (!common.seed_given) throw ParseError("verify requires --seed");

  std::vector<SuiteOutcome> outcomes;
  const bool all = suite == "all";
  if (all || suite == "lemmas")
    outcomes.push_back(run_lemma_suite(instances, common.seed, common.jobs));
  if (all || suite == "theorem1")
    outcomes.push_back(run_theorem1_suite(instances, common.seed, common.jobs));
  if (all || suite == "corollaries")
    outcomes.push_back(run_corollaries_suite(instances, common.seed, common.jobs));

  std::size_t total_failures = 0;
  double max_violation = 0.0;
  std::uint64_t worst_seed = 0;
  nlohmann::json suites = nlohmann::json::array();
  for (const SuiteOutcome& o : outcomes) {
    total_failures += o.failures;
    if (o.max_violation > max_violation) {
      max_violation = o.max_violation;
      worst_seed = o.worst_seed;
    }
    if (o.failures > 0 && worst_seed == 0) worst_seed = o.worst_seed;
    nlohmann::json rec;
    rec["suite"] = o.suite;
    rec["instances"] = o.instances;
    rec["failures"] = o.failures;
    rec["max_violation"] = o.max_violation;
    rec["worst_seed"] = o.worst_seed;
    rec["details"] = nlohmann::json::parse(o.details_json);
    suites.push_back(rec);
  }

  nlohmann::json doc;
  doc["instances"] = instances;
  doc["failures"] = total_failures;
  doc["max_violation"] = max_violation;
  doc["suites"] = suites;
  emit(common.output, doc.dump(2) + "\n");

  if (total_failures > 0) {
    std::cerr << "verification failed: " << total_failures
              << " instance(s); replay with --seed " << worst_seed << "\n";
    return kExitVerification;
  }
  return kExitOk;
}

int run_sweep(std::size_t d, const std::vector<std::size_t>& kbars,
              const std::vector<std::size_t>& n_grid, std::size_t trials_per_cell,
              const std::string& k0_rule, const std::string& profile,
              double noise_level, const std::string& sensing, bool normalize_columns,
              const std::string& summary_path, const CommonArgs& common) {
  check_format(common.format, "csv", "sweep");
  if (!common.seed_given) throw ParseError("sweep requires --seed");

  SweepConfig cfg;
  cfg.d = d;
  cfg.kbars = kbars;
  cfg.n_grid = n_grid;
  cfg.trials_per_cell = trials_per_cell;
  if (k0_rule == "exact_k")
    cfg.k0_rule = K0Rule::exact_k;
  else if (k0_rule == "30k")
    cfg.k0_rule = K0Rule::thirty_k;
  else
    throw ParseError("--k0_rule must be 'exact_k' or '30k'");
  cfg.profile = parse_profile(profile);
  if (noise_level < 0.0) throw ParseError("--noise_level must be nonnegative");
  cfg.noise_level = noise_level;
  cfg.seed = common.seed;
  if (sensing == "gaussian")
    cfg.sensing = SensingKind::gaussian;
  else if (sensing == "identity")
    cfg.sensing = SensingKind::identity;
  else
    throw ParseError("--sensing must be 'gaussian' or 'identity'");
  cfg.normalize_columns = normalize_columns;
  cfg.jobs = common.jobs;

  try {
    const PhaseTable table = phase_sweep(cfg);
    emit(common.output, phase_table_csv(table));
    if (!summary_path.empty())
      write_text_file(summary_path, sweep_summary_json(table) + "\n");
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());  // bad grid or shape
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Greedy sparse recovery with restricted-isometry certification and "
      "numerical verification of its recovery guarantees"};
  app.require_subcommand(1);

  // certify
  auto* certify = app.add_subcommand(
      "certify", "Compute restricted strong-convexity constants of a sensing matrix");
  std::string certify_matrix_path;
  std::size_t certify_s_max = 0;
  std::string certify_mode = "exact";
  std::size_t certify_trials = 200;
  CommonArgs certify_common;
  certify->add_option("--matrix_path", certify_matrix_path, "Sensing matrix CSV")
      ->required();
  certify->add_option("--s_max", certify_s_max, "Largest sparsity level to certify")
      ->required()
      ->check(CLI::PositiveNumber);
  certify->add_option("--mode", certify_mode, "exact enumeration or sampled envelope")
      ->check(CLI::IsMember({"exact", "sampled"}))
      ->capture_default_str();
  certify->add_option("--trials", certify_trials, "Supports sampled per level")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(certify, certify_common, "json");

  // recover
  auto* recover = app.add_subcommand(
      "recover", "Run the fully corrective greedy solver on a problem document");
  std::string recover_problem_path;
  std::size_t recover_k0 = 0;
  std::vector<std::size_t> recover_f0;
  std::string recover_trace_path;
  std::optional<double> recover_early_stop;
  CommonArgs recover_common;
  recover->add_option("--problem_path", recover_problem_path, "Problem JSON document")
      ->required();
  recover->add_option("--k0", recover_k0, "Number of greedy iterations")->required();
  recover->add_option("--f0_indices", recover_f0,
                      "Comma-separated initial support indices")
      ->delimiter(',');
  recover->add_option("--trace_path", recover_trace_path,
                      "Write the per-iteration trace JSON here");
  recover->add_option("--early_stop_grad_tol", recover_early_stop,
                      "Stop once the gradient sup-norm falls below this (0 disables; "
                      "default adapts to the problem scale)");
  add_common(recover, recover_common, "csv");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Check the recovery guarantees against randomized exact oracles");
  std::string verify_suite;
  std::size_t verify_instances = 100;
  CommonArgs verify_common;
  verify->add_option("--suite", verify_suite, "lemmas, theorem1, corollaries, or all")
      ->required()
      ->check(CLI::IsMember({"lemmas", "theorem1", "corollaries", "all"}));
  verify->add_option("--instances", verify_instances, "Randomized instances per suite")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(verify, verify_common, "json");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Phase-transition sweep over sparsity levels and sample counts");
  std::size_t sweep_d = 0;
  std::vector<std::size_t> sweep_kbars;
  std::vector<std::size_t> sweep_n_grid;
  std::size_t sweep_trials = 0;
  std::string sweep_k0_rule = "30k";
  std::string sweep_profile = "flat";
  double sweep_noise = 0.0;
  std::string sweep_sensing = "gaussian";
  bool sweep_normalize = false;
  std::string sweep_summary_path;
  CommonArgs sweep_common;
  sweep->add_option("--d", sweep_d, "Signal dimension")->required()->check(
      CLI::PositiveNumber);
  sweep->add_option("--kbars", sweep_kbars, "Comma-separated sparsity levels")
      ->required()
      ->delimiter(',');
  sweep->add_option("--n_grid", sweep_n_grid,
                    "Comma-separated ascending sample counts")
      ->required()
      ->delimiter(',');
  sweep->add_option("--trials_per_cell", sweep_trials, "Trials per (kbar, n) cell")
      ->required()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--k0_rule", sweep_k0_rule, "Iteration budget: exact_k or 30k")
      ->capture_default_str();
  sweep->add_option("--profile", sweep_profile, "Signal profile: flat or decay:RATE")
      ->capture_default_str();
  sweep->add_option("--noise_level", sweep_noise, "Exact 2-norm of the noise")
      ->capture_default_str();
  sweep->add_option("--sensing", sweep_sensing, "Sensing family: gaussian or identity")
      ->capture_default_str();
  sweep->add_flag("--normalize_columns", sweep_normalize,
                  "Rescale sensing columns to unit norm");
  sweep->add_option("--summary_path", sweep_summary_path,
                    "Write the summary JSON here");
  add_common(sweep, sweep_common, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (certify->parsed())
      return run_certify(certify_matrix_path, certify_s_max, certify_mode,
                         certify_trials, certify_common);
    if (recover->parsed())
      return run_recover(recover_problem_path, recover_k0, recover_f0,
                         recover_trace_path, recover_early_stop, recover_common);
    if (verify->parsed())
      return run_verify(verify_suite, verify_instances, verify_common);
    if (sweep->parsed())
      return run_sweep(sweep_d, sweep_kbars, sweep_n_grid, sweep_trials, sweep_k0_rule,
                       sweep_profile, sweep_noise, sweep_sensing, sweep_normalize,
                       sweep_summary_path, sweep_common);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const SolverFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitInput;
}
