#pragma once

#include <memory>
#include <random>
#include <string>
#include <variant>

#include "dset/constraint_set.hpp"

namespace dset {

/// Unnormalized log density log L(theta | y) pi(theta) with its derivatives.
class LogTarget {
 public:
  virtual ~LogTarget() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  /// Support indicator. logp is finite wherever this returns true.
  virtual bool in_support(const Vector& theta) const { return theta.allFinite(); }
  virtual double logp(const Vector& theta) const = 0;
  virtual Vector grad(const Vector& theta) const = 0;
  /// Hessian of logp. The default uses central differences of grad.
  virtual Matrix hessian(const Vector& theta) const;
  /// A draw used to seed samplers before projection onto the constraint.
  virtual Vector initial_point(std::mt19937_64& rng) const;
};

using LogTargetPtr = std::shared_ptr<const LogTarget>;

struct SquaredDistance {
  double rho = 1.0;
};
/// (rho / 2) * dist(theta, set); the non-smooth comparator.
struct UnsquaredDistance {
  double rho = 1.0;
};
/// rho * |theta' theta - 1|; defined for the unit sphere only.
struct LevelSetSphere {
  double rho = 1.0;
};
/// Hard indicator of the set.
struct Sharp {};

using PenaltyFlavor = std::variant<SquaredDistance, UnsquaredDistance, LevelSetSphere, Sharp>;

std::string flavor_name(const PenaltyFlavor& flavor);
/// rho of the flavor; Sharp reports +infinity.
double flavor_rho(const PenaltyFlavor& flavor);

/// One evaluation of the relaxed log density at a point.
struct Evaluation {
  double logp = 0.0;
  Vector grad;
  double dist_sq = 0.0;  // dist(theta, set)^2
  bool in_support = true;
  bool near_boundary = false;  // unsquared subgradient hit its degenerate band
};

/// base.logp(theta) - penalty(theta).
class RelaxedPosterior {
 public:
  RelaxedPosterior(LogTargetPtr base, ConstraintSet set, PenaltyFlavor flavor);

  const LogTarget& base() const { return *base_; }
  const LogTargetPtr& base_ptr() const { return base_; }
  const ConstraintSet& set() const { return set_; }
  const PenaltyFlavor& flavor() const { return flavor_; }
  int dim() const { return base_->dim(); }

  /// Off-support points evaluate to -infinity; Sharp also returns -infinity
  /// off the set.
  double logp(const Vector& theta) const;
  /// Not available for Sharp, which has no penalty gradient; it falls back to
  /// the base gradient.
  Vector grad(const Vector& theta) const;
  double penalty(const Vector& theta) const;
  Evaluation evaluate(const Vector& theta, bool with_grad = true) const;

 private:
  LogTargetPtr base_;
  ConstraintSet set_;
  PenaltyFlavor flavor_;
};

inline double logp_relaxed(const RelaxedPosterior& post, const Vector& theta) { return post.logp(theta); }
inline Vector grad_relaxed(const RelaxedPosterior& post, const Vector& theta) { return post.grad(theta); }

}  // namespace dset
