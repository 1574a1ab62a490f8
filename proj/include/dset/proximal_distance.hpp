#pragma once

#include <vector>

#include "dset/posterior.hpp"

namespace dset::prox {

/// One MM iterate. `objective` is -log of the relaxed density (no constant).
struct MmState {
  Vector theta;
  double objective = 0.0;
  int iteration = 0;
  double step_norm = 0.0;
  double rho = 0.0;
};

struct MmOptions {
  double tol = 1e-10;
  int max_iterations = 100000;
  /// Keep every iterate in the result trace.
  bool record_trace = true;
};

struct MmResult {
  Vector theta;
  std::vector<MmState> trace;
  int iterations = 0;
};

/// Proximal distance iterations x_{k+1} = prox_{f/rho}(P(x_k)) for the
/// SquaredDistance flavour, f = -base.logp. Gaussian-linear targets use the
/// closed-form ridge solve; other targets use damped Newton on the surrogate.
/// Non-convex sets converge to a local optimum only.
MmResult map_fixed_rho(const RelaxedPosterior& post, const Vector& init, const MmOptions& options = {});

struct ScheduleResult {
  Vector theta;
  std::vector<double> rhos;
  std::vector<Vector> solutions;  // one per rho
  std::vector<MmState> trace;     // concatenated iterates
};

/// Warm-started map_fixed_rho over a strictly increasing rho schedule.
ScheduleResult map_rho_schedule(const LogTargetPtr& base, const ConstraintSet& set, const std::vector<double>& rhos,
                                const Vector& init, const MmOptions& options = {});

/// 1, 10, ..., 1e6.
std::vector<double> default_rho_schedule();

/// argmin_x f(x) + (rho / 2) ||x - anchor||^2 with f = -base.logp.
Vector prox_step(const LogTarget& base, const Vector& anchor, double rho, const Vector& start, double grad_tol);

}  // namespace dset::prox
