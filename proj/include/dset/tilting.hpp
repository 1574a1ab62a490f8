#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dset/hmc.hpp"

namespace dset::tilting {

/// Moment-constrained KL projection of a posterior onto
/// { p : E_p[dist(theta, set)^2 / 2] = budget }. The solution is the
/// exponential tilt p* ~ pi(theta | y) exp(-lambda dist^2 / 2), so the
/// calibrated lambda is the rho of the matching relaxed posterior.
struct TiltingProblem {
  LogTargetPtr base;
  ConstraintSet set;
  double budget = 0.0;
  /// Draws from pi(theta | y) tilted by base_lambda (0: the unconstrained posterior).
  std::vector<hmc::SampleChain> reference;
  double lambda_lo = 0.0;
  double lambda_hi = 1.0;
  double base_lambda = 0.0;
};

struct TiltedMoment {
  double moment = 0.0;
  double std_error = 0.0;
  double weight_ess = 0.0;
};

struct TiltingSolution {
  double lambda = 0.0;
  double achieved_moment = 0.0;
  double mc_std_error = 0.0;
  double ess_of_weights = 0.0;
  double unconstrained_moment = 0.0;
  int stages = 1;
  int bisection_steps = 0;
};

/// Weight ESS below which an estimate is refused.
inline constexpr double kMinWeightEss = 50.0;
/// Staged calibration re-samples while the weight ESS is below this fraction
/// of the reference draws.
inline constexpr double kStageEssFraction = 0.1;

/// dist(theta_i, set)^2 / 2 for every draw, computed in parallel.
std::vector<double> half_sq_distances(const ConstraintSet& set, const std::vector<Vector>& draws);
/// Serial reference for half_sq_distances.
std::vector<double> half_sq_distances_serial(const ConstraintSet& set, const std::vector<Vector>& draws);

std::vector<Vector> pooled_draws(const std::vector<hmc::SampleChain>& chains);

/// Self-normalised importance estimate with weights exp(-(lambda - base_lambda) g_i).
/// Throws WeightDegeneracyError when the weight ESS falls below kMinWeightEss.
TiltedMoment tilted_moment(std::span<const double> half_sq, double lambda, double base_lambda = 0.0);
TiltedMoment tilted_moment(const TiltingProblem& problem, double lambda);

/// Normalised weights; they sum to one.
std::vector<double> tilt_weights(std::span<const double> half_sq, double delta_lambda);

/// Bisection for the lambda whose tilted moment equals the budget, expanding
/// lambda_hi by doubling. Refuses budgets at or above the untilted moment, and
/// throws WeightDegeneracyError when the estimate at the returned lambda has
/// weight ESS below kMinWeightEss.
TiltingSolution calibrate(const TiltingProblem& problem);

/// Draws chains from the posterior relaxed at the given lambda (0 means unconstrained).
using StageSampler = std::function<std::vector<hmc::SampleChain>(double lambda)>;

/// calibrate, re-sampling from an intermediate relaxed posterior whenever the
/// weights degenerate or fall below kStageEssFraction of the draws; at most
/// `max_stages` sampling rounds.
TiltingSolution calibrate_staged(const LogTargetPtr& base, const ConstraintSet& set, double budget,
                                 const StageSampler& sampler, int max_stages = 5);

}  // namespace dset::tilting
