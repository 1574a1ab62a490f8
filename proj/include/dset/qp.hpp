#pragma once

#include <optional>
#include <vector>

#include "dset/constraint_set.hpp"

namespace dset::qp {

/// min 1/2 ||x - target||^2  s.t.  A x >= b,  E x = d.
struct QpProblem {
  Vector target;
  Matrix A;
  Vector b;
  Matrix E;
  Vector d;

  int dim() const { return static_cast<int>(target.size()); }
  int num_ineq() const { return static_cast<int>(A.rows()); }
  int num_eq() const { return static_cast<int>(E.rows()); }
};

struct QpSolution {
  Vector x;
  /// Active inequality indices (into the rows of A), in activation order.
  std::vector<int> active_set;
  /// One entry per row of A; zero for inactive rows.
  Vector ineq_multipliers;
  /// One entry per row of E.
  Vector eq_multipliers;
  int iterations = 0;
};

struct SolveOptions {
  /// Defaults to 50 * (#constraints + dim) when unset.
  std::optional<int> max_iterations;
  /// Optional active set from a previous nearby solve. It is only used when
  /// it already satisfies the KKT conditions for the new target.
  const std::vector<int>* warm_start = nullptr;
};

/// Goldfarb-Idnani dual active-set method specialised to an identity
/// Hessian. Throws InfeasibleError or NonconvergenceError.
QpSolution solve(const QpProblem& problem, const SolveOptions& options = {});

/// True iff {A x >= b, E x = d} is nonempty.
bool check_feasible(const QpProblem& problem);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;  // max constraint violation
  double dual = 0.0;    // max(0, -min lambda)
  double complementarity = 0.0;
};

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& solution);

}  // namespace dset::qp
