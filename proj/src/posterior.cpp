#include "dset/posterior.hpp"

#include <cmath>
#include <limits>

#include "dset/errors.hpp"

namespace dset {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string flavor_name(const PenaltyFlavor& flavor) {
  switch (flavor.index()) {
    case 0: return "squared";
    case 1: return "unsquared";
    case 2: return "level_set";
    default: return "sharp";
  }
}

double flavor_rho(const PenaltyFlavor& flavor) {
  if (const auto* f = std::get_if<SquaredDistance>(&flavor)) return f->rho;
  if (const auto* f = std::get_if<UnsquaredDistance>(&flavor)) return f->rho;
  if (const auto* f = std::get_if<LevelSetSphere>(&flavor)) return f->rho;
  return std::numeric_limits<double>::infinity();
}

RelaxedPosterior::RelaxedPosterior(LogTargetPtr base, ConstraintSet set, PenaltyFlavor flavor)
    : base_(std::move(base)), set_(std::move(set)), flavor_(flavor) {
  if (!base_) throw InputError("relaxed posterior: missing base target");
  if (base_->dim() != set_.dim()) {
    throw InputError("relaxed posterior: model dimension " + std::to_string(base_->dim()) +
                     " does not match constraint dimension " + std::to_string(set_.dim()));
  }
  if (!std::holds_alternative<Sharp>(flavor_) && !(flavor_rho(flavor_) > 0.0)) {
    throw InputError("relaxed posterior: rho must be positive");
  }
  if (std::holds_alternative<LevelSetSphere>(flavor_)) {
    const auto* sphere = std::get_if<Sphere>(&set_.kind());
    if (sphere == nullptr || sphere->radius != 1.0 || !sphere->center.isZero(0.0)) {
      throw InputError("level-set penalty is only defined for the unit sphere centred at the origin");
    }
  }
}

Evaluation RelaxedPosterior::evaluate(const Vector& theta, bool with_grad) const {
  Evaluation ev;
  if (!base_->in_support(theta)) {
    ev.in_support = false;
    ev.logp = kNegInf;
    if (with_grad) ev.grad = Vector::Zero(theta.size());
    return ev;
  }
  const auto proj = project(set_, theta);
  ev.dist_sq = proj.distance * proj.distance;
  ev.logp = base_->logp(theta);
  if (with_grad) ev.grad = base_->grad(theta);

  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, SquaredDistance>) {
          ev.logp -= 0.5 * f.rho * ev.dist_sq;
          if (with_grad) ev.grad -= f.rho * (theta - proj.point);
        } else if constexpr (std::is_same_v<F, UnsquaredDistance>) {
          ev.logp -= 0.5 * f.rho * proj.distance;
          if (with_grad && proj.distance > 0.0) {
            if (proj.distance < 1e-12) {
              ev.near_boundary = true;
            } else {
              ev.grad -= (0.5 * f.rho / proj.distance) * (theta - proj.point);
            }
          }
        } else if constexpr (std::is_same_v<F, LevelSetSphere>) {
          const double level = theta.squaredNorm() - 1.0;
          ev.logp -= f.rho * std::abs(level);
          if (with_grad && level != 0.0) ev.grad -= (f.rho * (level > 0.0 ? 2.0 : -2.0)) * theta;
        } else {
          if (!set_.contains(theta)) ev.logp = kNegInf;
        }
      },
      flavor_);
  return ev;
}

double RelaxedPosterior::logp(const Vector& theta) const { return evaluate(theta, false).logp; }

Vector RelaxedPosterior::grad(const Vector& theta) const { return evaluate(theta, true).grad; }

double RelaxedPosterior::penalty(const Vector& theta) const {
  if (!base_->in_support(theta)) return std::numeric_limits<double>::infinity();
  return base_->logp(theta) - logp(theta);
}

}  // namespace dset
