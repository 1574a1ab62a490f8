#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dset/hmc.hpp"
#include "dset/models.hpp"

namespace dset::config {

/// A value in the TOML subset: booleans, numbers, strings and (nested) arrays.
struct Value {
  using Array = std::vector<Value>;
  std::variant<bool, double, std::string, Array> data;

  bool operator==(const Value&) const = default;
};

/// Section name -> key -> value. Top-level keys live under "".
using Document = std::map<std::string, std::map<std::string, Value>>;

/// Parses the TOML subset; throws InputError with a line number on bad input.
Document parse_document(const std::string& text);
/// Sorted, deterministic rendering that parse_document reads back unchanged.
std::string serialize_document(const Document& doc);

enum class ExperimentKind { RidgeBall, RobustVmf, ContingencyTable, Custom };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& s);

struct ModelConfig {
  /// gaussian_linear | student_t_location | multinomial_dirichlet_table
  std::string kind;
  // gaussian_linear: either X and y, or simulated data when n > 0.
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  double sigma2 = 1.0;
  int n = 0;
  std::vector<double> beta_true;
  std::uint64_t data_seed = 0;
  // student_t_location
  std::vector<double> F;
  double dof = 3.0;
  // multinomial_dirichlet_table
  std::string counts_file;
  double alpha = 1.0;

  bool operator==(const ModelConfig&) const = default;
};

struct ConstraintConfig {
  /// ball | sphere | box | simplex | polyhedron | stochastic_dominance | whole_space
  std::string kind;
  std::vector<double> center;
  double radius = 1.0;
  std::vector<double> lower;
  std::vector<double> upper;
  int dimension = 0;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<std::vector<double>> E;
  std::vector<double> d;
  /// stochastic_dominance; 0 means taken from the contingency model.
  int rows = 0;
  int cols = 0;

  bool operator==(const ConstraintConfig&) const = default;
};

struct PenaltyConfig {
  /// squared | unsquared | level_set | sharp
  std::string flavor = "squared";
  std::optional<double> rho;
  std::optional<double> budget;
  /// Robust vMF sweep; counts as setting rho.
  std::vector<double> rho_grid;
  /// Extra flavours run alongside `flavor` at the same rho values.
  std::vector<std::string> compare;

  bool operator==(const PenaltyConfig&) const = default;
};

struct HmcSection {
  double step_size = 0.1;
  int num_steps = 32;
  std::vector<double> mass;
  int num_warmup = 1000;
  int num_samples = 1000;
  int num_chains = 2;
  bool step_size_adapt = true;
  double target_accept = 0.8;
  double integration_time = 0.0;
  int max_steps = 1024;
  double step_jitter = 0.0;

  bool operator==(const HmcSection&) const = default;
};

struct MapSection {
  std::vector<double> rho_schedule;  // empty: the default 1..1e6 schedule
  double tol = 1e-10;
  int max_iterations = 100000;

  bool operator==(const MapSection&) const = default;
};

struct CalibrationSection {
  int max_stages = 5;

  bool operator==(const CalibrationSection&) const = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Custom;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  ModelConfig model;
  ConstraintConfig constraint;
  PenaltyConfig penalty;
  HmcSection hmc;
  MapSection map;
  CalibrationSection calibration;

  bool operator==(const ExperimentConfig&) const = default;

  /// rho_grid when given, else the single rho (empty in calibration mode).
  std::vector<double> rho_values() const;
  bool calibration_mode() const { return penalty.budget.has_value(); }
  hmc::HmcConfig hmc_config() const;
};

/// Typed view of a document; unknown sections or keys are input errors.
ExperimentConfig from_document(const Document& doc);
Document to_document(const ExperimentConfig& config);

/// Parses without touching the file system; relative data paths are
/// resolved against `base_dir` when it is non-empty.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
std::string serialize_config(const ExperimentConfig& config);
/// Reads, parses, resolves paths against the file's directory and validates.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Exactly one of rho (or rho_grid) and budget, known kinds, data files exist.
void validate(const ExperimentConfig& config);

/// I x J nonnegative integer table, one row per line, comma separated. A
/// first line that is not numeric is taken as a header and skipped.
Eigen::MatrixXi read_counts_csv(const std::filesystem::path& path);

/// Model specification; simulates data for gaussian_linear when n > 0.
ModelSpec model_spec(const ExperimentConfig& config);
ConstraintSet constraint_set(const ExperimentConfig& config, int model_dim);
PenaltyFlavor make_flavor(const std::string& name, double rho);

}  // namespace dset::config
