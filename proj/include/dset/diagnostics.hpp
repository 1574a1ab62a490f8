#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "dset/hmc.hpp"

namespace dset::diag {

struct CoordinateSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;
  std::vector<double> acf;  // lags 0..max_lag, averaged over chains
  bool degenerate = false;  // zero variance
};

struct ChainSummary {
  std::vector<CoordinateSummary> coords;
  double acceptance_rate = 0.0;
  int num_draws = 0;  // per chain
  int num_chains = 0;
  int divergences = 0;
  bool degenerate = false;  // any coordinate
};

inline constexpr int kMaxAcfLag = 50;

/// Needs at least 100 draws per chain.
ChainSummary summarize(const std::vector<hmc::SampleChain>& chains);
ChainSummary summarize(const hmc::SampleChain& chain);

/// Multi-chain ESS from the initial positive sequence of paired
/// autocorrelations, capped at the total number of draws. Constant input
/// returns the total with `degenerate` set.
double effective_sample_size(const std::vector<std::vector<double>>& chains, bool* degenerate = nullptr);
double effective_sample_size(std::span<const double> chain, bool* degenerate = nullptr);

/// Sample autocorrelation at lags 0..max_lag (biased autocovariance).
std::vector<double> autocorrelation(std::span<const double> x, int max_lag);

/// Linear-interpolation quantile (R type 7).
double quantile(std::vector<double> values, double p);

/// Uniform lattice over [lower, upper] in one or two dimensions; values live
/// at cell centres, flattened with the first axis fastest.
struct GridDensity {
  int dims = 1;
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{0.0, 0.0};
  std::array<int, 2> cells{1, 1};
  std::vector<double> log_values;
  std::vector<double> probabilities;

  std::size_t size() const { return static_cast<std::size_t>(cells[0]) * static_cast<std::size_t>(dims == 2 ? cells[1] : 1); }
  Vector center(std::size_t index) const;
  double cell_volume() const;
};

using LogDensityFn = std::function<double(const Vector&)>;

/// Evaluates `log_density` on every cell in parallel and normalises.
GridDensity make_grid_density(const LogDensityFn& log_density, int dims, std::array<double, 2> lower,
                              std::array<double, 2> upper, std::array<int, 2> cells);
/// Serial reference for make_grid_density.
GridDensity make_grid_density_serial(const LogDensityFn& log_density, int dims, std::array<double, 2> lower,
                                     std::array<double, 2> upper, std::array<int, 2> cells);

/// Total probability on the outermost ring of cells.
double boundary_mass(const GridDensity& g);

/// 1/2 sum |p - q| over cells; the grids must coincide.
double tv_distance_grid(const GridDensity& p, const GridDensity& q);

struct Theorem1Report {
  std::vector<double> rhos;
  std::vector<Vector> relaxed_maps;
  Vector constrained_map;
  std::vector<double> errors;  // ||relaxed_map_k - constrained_map||
  bool monotone = false;
  bool converged = false;
};

/// Relaxed MAPs by the proximal distance schedule against the constrained MAP
/// found by grid search refined with projected gradient ascent.
Theorem1Report theorem1_check(const LogTargetPtr& base, const ConstraintSet& set, const std::vector<double>& rhos,
                              int dims, std::array<double, 2> lower, std::array<double, 2> upper,
                              std::array<int, 2> cells, double tol);

struct Theorem2Report {
  std::vector<double> rhos;
  std::vector<double> tv;
  bool strictly_decreasing = false;
};

/// TV between relaxed and sharply constrained posteriors on a grid.
Theorem2Report theorem2_check(const LogTargetPtr& base, const ConstraintSet& set, const std::vector<double>& rhos,
                              int dims, std::array<double, 2> lower, std::array<double, 2> upper,
                              std::array<int, 2> cells);

/// Central finite-difference gradient with per-coordinate step h * max(1, |x_k|).
Vector finite_difference_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6);

/// ||a - b|| / max(||b||, 1).
double relative_error(const Vector& a, const Vector& b);

struct GradientCheckReport {
  int points = 0;
  double max_relative_error = 0.0;
  Vector worst_point;
};

/// Analytic grad_relaxed against central differences of logp at `points`
/// draws from N(center, scale^2 I). Draws off the support are skipped, as are
/// draws outside the set but within min_dist of it (and, for the level-set
/// flavor, draws with |theta'theta - 1| <= min_dist).
GradientCheckReport gradient_check(const RelaxedPosterior& post, const Vector& center, double scale, int points,
                                   std::uint64_t seed, double min_dist = 1e-3);

}  // namespace dset::diag
