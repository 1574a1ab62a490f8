#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dset/config.hpp"
#include "dset/diagnostics.hpp"
#include "dset/errors.hpp"
#include "dset/proximal_distance.hpp"
#include "dset/tilting.hpp"

namespace dset::experiment {

/// Environment variable that overrides `output_dir` from the config.
inline constexpr const char* kOutputDirEnv = "DSET_OUTPUT_DIR";

/// Failure inside one stage of an experiment; `exit_code` follows the
/// underlying error type.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message, int exit_code)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)), exit_code_(exit_code) {}
  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

/// 2 input, 3 calibration, 4 numerical (initialisation, QP, MM), 1 otherwise.
int exit_code_for(const std::exception& e);

struct FlavorRun {
  std::string flavor;
  double rho = 0.0;
  std::vector<hmc::SampleChain> chains;
  diag::ChainSummary summary;
  std::string chain_file;
};

struct RidgeMetrics {
  double mean_dist_sq = 0.0;
  double fraction_within = 0.0;  // dist <= 0.1
  Vector map;                    // proximal distance MAP at the same rho
  Vector mode;                   // highest relaxed logp among retained draws
  double mode_to_map = 0.0;
};

/// Quantiles over draws of the cumulative row sums of the full table.
struct TableQuantiles {
  Matrix q025;
  Matrix q50;
  Matrix q975;
  Matrix theta_median;  // successive differences of q50, so rows sum to 1
  Matrix cell_median;   // marginal per-cell medians
};

struct ExperimentReport {
  std::filesystem::path output_dir;
  std::vector<FlavorRun> runs;
  std::optional<tilting::TiltingSolution> calibration;
  std::optional<RidgeMetrics> ridge;
  std::optional<TableQuantiles> table;
  std::vector<std::string> files;
  double wall_seconds = 0.0;
};

std::filesystem::path resolve_output_dir(const config::ExperimentConfig& config);

/// Runs the configured experiment; configs carrying a budget go through
/// calibrate_then_run.
ExperimentReport run(const config::ExperimentConfig& config);

/// Unconstrained reference chains, staged tilting calibration, then run()
/// with rho set to the calibrated lambda.
ExperimentReport calibrate_then_run(const config::ExperimentConfig& config);

struct CalibrationReport {
  tilting::TiltingSolution solution;
  double budget = 0.0;
  std::filesystem::path file;
};

/// Calibration only; writes calibration.txt and calibration.json.
CalibrationReport calibrate(const config::ExperimentConfig& config);

struct MapReport {
  prox::ScheduleResult result;
  std::filesystem::path trace_file;
};

/// Proximal distance MAP over the configured schedule; writes map_trace.csv.
MapReport map(const config::ExperimentConfig& config);

RidgeMetrics ridge_metrics(const RelaxedPosterior& post, const std::vector<hmc::SampleChain>& chains,
                           const Vector& map);
TableQuantiles table_quantiles(const MultinomialDirichletTable& model, const std::vector<hmc::SampleChain>& chains);

/// One row per draw: chain, iteration, theta..., accept, energy, dist_sq.
std::string chains_csv(const std::vector<hmc::SampleChain>& chains);
/// Per-coordinate summary rows for every run.
std::string summary_csv(const std::vector<FlavorRun>& runs);
/// Aligned text with Mean, 2.5%, 97.5% and ESS per coordinate and acceptance.
std::string summary_table(const std::vector<FlavorRun>& runs);
/// The three cumulative-sum quantile matrices and the median table.
std::string table_quantiles_text(const TableQuantiles& q);

}  // namespace dset::experiment
