#ifndef SIGNSGD_HARNESS_HPP
#define SIGNSGD_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "signsgd/optimizers.hpp"
#include "signsgd/problems.hpp"

namespace signsgd {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "SIGNSGD_OUT_DIR";

/// Invalid experiment definitions. The CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { Rosenbrock, Counterexample, Quadratic, PartitionedQuadratic };
enum class OptimizerKind { SignSgdPlain, SignSgdMonotone, MajorityVote, Ssdm, Sgd };

/// One series of repeated runs. Serialized as `key = value` lines; see
/// docs/config-format.md.
struct ExperimentConfig {
  std::string id = "experiment";
  std::string description;

  ProblemKind problem = ProblemKind::Rosenbrock;
  std::int64_t dim = 10;
  double eps = 0.5;
  std::vector<double> curvature;
  std::vector<double> centers;  // node-major, nodes * dim values
  std::vector<double> weights;  // per-node scaling, empty for none
  std::vector<double> noise;    // nu for Rosenbrock, sigma per coordinate otherwise
  std::vector<double> x0;       // empty selects the problem default

  OptimizerKind optimizer = OptimizerKind::SignSgdPlain;
  StepSchedule::Kind schedule = StepSchedule::Kind::Constant;
  std::optional<double> gamma;  // required except for SSDM (default K^(-3/4))
  std::optional<double> beta;   // SSDM momentum; default 1 - 1/sqrt(K)
  std::int64_t iterations = 1000;
  std::int64_t nodes = 1;
  std::int64_t minibatch = 1;

  std::int64_t reps = 10;
  std::uint64_t seed = 0;
  std::int64_t checkpoint = 0;    // 0 selects max(1, K / 100)
  std::int64_t rho_samples = 0;   // 0 leaves rho_norm_hat empty
  std::string output;             // directory; empty selects the default

  void validate() const;
};

std::string to_text(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_string(ProblemKind kind);
std::string to_string(OptimizerKind kind);

// ---------------------------------------------------------------------------

struct BuiltProblem {
  ObjectivePtr objective;
  StochasticOracle oracle;  // global oracle, mini-batch applied
  std::optional<PartitionedProblem> partitioned;
  Vector x0;
};

BuiltProblem build_problem(const ExperimentConfig& config);

/// Executes a single repetition with seed config.seed + rep.
RunRecord run_once(const ExperimentConfig& config, const BuiltProblem& problem, std::int64_t rep);

// ---------------------------------------------------------------------------
// CSV output: fixed columns, 17 significant digits, `#` comment header
// carrying the config echo and library version.

inline constexpr const char* kRunCsvHeader = "k,gamma,f,g_l1,g_l2,rho_norm_hat,bits_up,bits_down,rep,seed";
inline constexpr const char* kAggregateCsvHeader =
    "k,gamma,f_mean,f_std,g_l1_mean,g_l1_std,g_l2_mean,g_l2_std,rho_norm_hat_mean,rho_norm_hat_std,"
    "bits_up,bits_down,reps";

std::string format_number(double value);
void write_comment_header(std::ostream& out, const ExperimentConfig& config);
/// Checkpoint rows of one run.
void write_run_csv(std::ostream& out, const ExperimentConfig& config, const RunRecord& record,
                   std::int64_t rep);

struct AggregateRow {
  std::int64_t k = 0;
  double gamma = 0.0;
  double f_mean = 0.0, f_std = 0.0;
  double g_l1_mean = 0.0, g_l1_std = 0.0;
  double g_l2_mean = 0.0, g_l2_std = 0.0;
  double rho_mean = 0.0, rho_std = 0.0;
  std::uint64_t bits_up = 0;
  std::uint64_t bits_down = 0;
  std::int64_t reps = 0;
};

/// Mean and sample standard deviation (R - 1 divisor) over runs at every
/// checkpoint row.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& runs);
void write_aggregate_csv(std::ostream& out, const ExperimentConfig& config,
                         const std::vector<AggregateRow>& rows);

// ---------------------------------------------------------------------------

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  std::vector<AggregateRow> summary;
  std::vector<std::filesystem::path> files;
};

/// Runs config.reps repetitions (concurrently, `threads` = 0 for hardware
/// concurrency) and writes `<id>_rep<r>.csv` and `<id>_aggregate.csv` to
/// `out_dir`. Output is identical for any thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                unsigned threads = 0);

/// Runs without touching the filesystem.
ExperimentResult run_series(const ExperimentConfig& config, unsigned threads = 0);

struct CannedExperiment {
  std::string id;
  std::string description;
  std::vector<ExperimentConfig> series;
  /// Table-style experiments write their own files into the directory.
  std::function<std::vector<std::filesystem::path>(const std::filesystem::path&)> tables;
};

const std::vector<CannedExperiment>& canned_experiments();
/// Throws ConfigError listing valid ids when `id` is unknown.
const CannedExperiment& find_experiment(const std::string& id);
void list_experiments(std::ostream& out);

// ---------------------------------------------------------------------------

/// Grids of success-probability bounds, mini-batch thresholds, incomplete
/// beta values and rho_M sandwich ratios. Blocks are separated by a blank
/// line and introduced by `# table <name>`.
void emit_bound_tables(std::ostream& out);

/// Monte-Carlo check of the Gauss bound on a (|g|, sigma) grid.
void emit_bound_validation(std::ostream& out, std::int64_t samples, std::uint64_t seed);

}  // namespace signsgd

#endif  // SIGNSGD_HARNESS_HPP
