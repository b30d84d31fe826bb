#pragma once

#include "cosparse/grip.hpp"
#include "cosparse/solvers.hpp"
#include "cosparse/verify.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace cosparse::bench {

/// Invalid experiment configuration; the message names the violated constraint.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A trial failed; `partial_rows` rows (trials before the failing one) were kept.
class TrialError : public Error {
public:
  TrialError(std::string const &what, long trial, std::uint64_t seed)
      : Error(what), trial_(trial), seed_(seed) {}
  long trial() const { return trial_; }
  std::uint64_t seed() const { return seed_; }

private:
  long trial_;
  std::uint64_t seed_;
};

enum class Experiment { grip, rho, solve, verify_c1, verify_c2, verify_t1, phase, p1p2 };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view text);

enum class SignalKind { cosparse, compressible };

struct ExperimentConfig {
  Experiment experiment = Experiment::grip;
  Index m = 0;
  Index n = 0;
  Index p = 0;
  Index k = 1;
  DictionaryKind dictionary_kind = DictionaryKind::gaussian_random;
  SensingKind matrix_kind = SensingKind::gaussian;
  /// Phi = A D instead of an independent draw.
  bool adapted_sensing = false;
  ConstraintKind constraint_kind = ConstraintKind::equality;
  double epsilon = 0.0;
  double lambda = 0.0;
  /// Norm of the additive measurement noise (l2-ball and dantzig campaigns).
  double noise = 0.0;
  long trials = 1;
  std::uint64_t seed = 0;
  std::string output_path = "out";
  EnumerationBudget budget;
  long lp_max_variables = 400;
  /// Instance redraws allowed when a campaign needs admissible constants.
  long max_attempts = 50;
  std::vector<Index> m_grid;
  SignalKind signal = SignalKind::cosparse;
  double decay = 1.5;
  SubspaceFamily subspace = SubspaceFamily::cosparse;
  long mc_trials = 0;
  RhoMode rho_mode = RhoMode::exact;
  bool certify = false;
  double solver_tol = 1e-9;
  long solver_max_iters = 200000;
};

/// Parses a config document. Unknown keys are rejected. When `experiment` is
/// given it must agree with the document (or fills it in when absent).
ExperimentConfig parse_config(nlohmann::json const &doc, std::optional<Experiment> experiment = std::nullopt);
ExperimentConfig load_config(std::string const &path, std::optional<Experiment> experiment = std::nullopt);

/// Checks every downstream precondition; throws ConfigError naming the first violation.
void validate(ExperimentConfig const &config);

nlohmann::json to_json(ExperimentConfig const &config);

using Cell = std::variant<long, std::uint64_t, double, bool, std::string>;
using Row = std::vector<Cell>;

struct CampaignResult {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<Row> rows;
  /// One JSON object per row (full BoundReport for verify campaigns).
  std::vector<nlohmann::json> records;
  std::vector<std::pair<std::string, double>> summary;
  /// Not part of any output file, so outputs stay byte-reproducible.
  double wall_time = 0.0;
  bool bound_violation = false;
  bool nonconvergence = false;
};

/// Per-trial seed: splitmix64 of (campaign seed, trial index).
std::uint64_t trial_seed(std::uint64_t campaign_seed, long trial_index);

/// Worker count: COSPARSE_WORKERS when set, else hardware concurrency.
int worker_count();

/// Runs the campaign in memory. On a failing trial throws TrialError; the rows
/// completed before it are available through `partial` when non-null.
CampaignResult execute(ExperimentConfig const &config, int workers, CampaignResult *partial = nullptr);

/// execute() then write results.csv, results.jsonl and config_echo.json under
/// config.output_path. Partial results are flushed before a TrialError propagates.
CampaignResult run(ExperimentConfig const &config);

/// Summary statistics; a pure function of the rows (recomputable from the CSV).
std::vector<std::pair<std::string, double>> summarize(Experiment experiment, std::vector<std::string> const &columns,
                                                      std::vector<Row> const &rows);

void emit_csv(CampaignResult const &campaign, std::ostream &out);
void emit_jsonl(CampaignResult const &campaign, std::ostream &out);
void write_outputs(CampaignResult const &campaign, std::string const &dir);

/// Process exit status for a finished campaign: 0 ok, 3 bound violation, 4 non-convergence.
int exit_status(CampaignResult const &campaign);

std::string format_cell(Cell const &cell);

nlohmann::json to_json(BoundReport const &report);
nlohmann::json to_json(GripReport const &report);
nlohmann::json to_json(RhoEstimate const &estimate);
nlohmann::json to_json(RecoveryResult const &result);

} // namespace cosparse::bench
