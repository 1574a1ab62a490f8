#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

namespace dset {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Feasibility residual accepted for projected points.
inline constexpr double kFeasibilityTol = 1e-9;

struct Ball {
  Vector center;
  double radius = 1.0;
};

/// Non-convex: the projection is multivalued at the center.
struct Sphere {
  Vector center;
  double radius = 1.0;
};

/// Componentwise bounds; infinite entries are allowed.
struct Box {
  Vector lower;
  Vector upper;
};

/// Probability simplex {x >= 0, sum x = 1} in R^dimension.
struct Simplex {
  int dimension = 1;
};

/// {x : A x >= b, E x = d}. Either block may have zero rows.
struct Polyhedron {
  Matrix A;
  Vector b;
  Matrix E;
  Vector d;
};

/// rows x cols table flattened row-major, with every entry nonnegative and
/// cumulative row sums nondecreasing down the table:
///   sum_{k<=j} x[i+1][k] >= sum_{k<=j} x[i][k]  for all i < rows, j <= cols.
struct StochasticDominance {
  int rows = 1;
  int cols = 1;
};

struct ProjectionResult {
  Vector point;
  double distance = 0.0;
  bool unique = true;
};

/// A closed set known through its Euclidean projection operator.
class ConstraintSet {
 public:
  using Kind = std::variant<Ball, Sphere, Box, Simplex, Polyhedron, StochasticDominance>;

  /// Validates the parameters; a Polyhedron is checked for feasibility here
  /// so that projection never fails on an empty set.
  explicit ConstraintSet(Kind kind);

  static ConstraintSet whole_space(int dim);
  static ConstraintSet halfline_upper(double upper);  // (-inf, upper] in R^1
  static ConstraintSet interval(double lower, double upper);

  const Kind& kind() const { return kind_; }
  int dim() const { return dim_; }
  bool convex() const { return !std::holds_alternative<Sphere>(kind_); }
  std::string name() const;

  /// Exact membership test; `tol` relaxes equality-type constraints and is
  /// applied to inequalities as well when positive.
  bool contains(const Vector& theta, double tol = 0.0) const;

  /// Halfspace description {A x >= b, E x = d} for the polyhedral kinds
  /// (Box with finite bounds, Simplex, Polyhedron, StochasticDominance).
  Polyhedron halfspaces() const;

 private:
  Kind kind_;
  int dim_ = 0;
};

/// Nearest point of `set` to `theta` with its distance.
ProjectionResult project(const ConstraintSet& set, const Vector& theta);

/// Gradient of dist(theta, set)^2 / 2, i.e. theta - P(theta).
Vector dist_sq_grad(const ConstraintSet& set, const Vector& theta);

struct SubgradResult {
  Vector direction;
  bool near_boundary = false;
};

/// Unit outward normal (theta - P)/||theta - P|| off the set, zero on it.
/// Distances in (0, 1e-12) return zero with `near_boundary` raised.
SubgradResult unsquared_dist_subgrad(const ConstraintSet& set, const Vector& theta);

/// Sort-and-threshold projection onto the probability simplex.
Vector project_simplex(const Vector& y);

}  // namespace dset
