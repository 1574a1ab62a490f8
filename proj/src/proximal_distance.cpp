#include "dset/proximal_distance.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "dset/errors.hpp"
#include "dset/models.hpp"

namespace dset::prox {

namespace {

double surrogate(const LogTarget& base, const Vector& x, const Vector& anchor, double rho) {
  if (!base.in_support(x)) return std::numeric_limits<double>::infinity();
  return -base.logp(x) + 0.5 * rho * (x - anchor).squaredNorm();
}

}  // namespace

std::vector<double> default_rho_schedule() { return {1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6}; }

Vector prox_step(const LogTarget& base, const Vector& anchor, double rho, const Vector& start, double grad_tol) {
  Vector x = start;
  const auto n = x.size();
  for (int it = 0; it < 200; ++it) {
    const Vector g = -base.grad(x) + rho * (x - anchor);
    if (g.norm() <= grad_tol) return x;
    Matrix H = -base.hessian(x) + rho * Matrix::Identity(n, n);
    Eigen::LDLT<Matrix> ldlt(H);
    Vector direction;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
      direction = -ldlt.solve(g);
    } else {
      direction = -g / rho;
    }
    const double f0 = surrogate(base, x, anchor, rho);
    const double slope = g.dot(direction);
    double step = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Vector trial = x + step * direction;
      const double f1 = surrogate(base, trial, anchor, rho);
      if (std::isfinite(f1) && f1 <= f0 + 1e-4 * step * slope) {
        x = trial;
        moved = true;
        break;
      }
    }
    if (!moved) return x;  // no further decrease representable
  }
  return x;
}

MmResult map_fixed_rho(const RelaxedPosterior& post, const Vector& init, const MmOptions& options) {
  const auto* flavor = std::get_if<SquaredDistance>(&post.flavor());
  if (flavor == nullptr) throw InputError("map: the proximal distance algorithm needs the squared-distance flavour");
  if (init.size() != post.dim()) throw InputError("map: init has the wrong dimension");
  if (!post.base().in_support(init)) throw InputError("map: init lies outside the model support");
  const double rho = flavor->rho;

  std::optional<Eigen::LDLT<Matrix>> ridge;
  const auto* gaussian = dynamic_cast<const GaussianLinear*>(&post.base());
  if (gaussian != nullptr) {
    const auto n = post.dim();
    ridge.emplace(gaussian->precision() + rho * Matrix::Identity(n, n));
  }

  MmResult result;
  Vector x = init;
  double objective = -post.logp(x);
  if (options.record_trace) result.trace.push_back({x, objective, 0, 0.0, rho});

  for (int k = 1; k <= options.max_iterations; ++k) {
    const Vector anchor = project(post.set(), x).point;
    Vector next;
    if (ridge) {
      next = ridge->solve(gaussian->linear_term() + rho * anchor);
    } else {
      next = prox_step(post.base(), anchor, rho, x, options.tol / 10.0);
    }
    const double next_objective = -post.logp(next);
    if (next_objective > objective + 1e-12 * std::max(1.0, std::abs(objective))) {
      throw MmViolationError("map: objective increased from " + std::to_string(objective) + " to " +
                             std::to_string(next_objective) + " at iteration " + std::to_string(k));
    }
    const double step = (next - x).norm();
    x = std::move(next);
    objective = next_objective;
    if (options.record_trace) result.trace.push_back({x, objective, k, step, rho});
    if (step <= options.tol) {
      result.theta = x;
      result.iterations = k;
      return result;
    }
  }
  throw NonconvergenceError("map: no convergence within " + std::to_string(options.max_iterations) +
                            " iterations at rho = " + std::to_string(rho));
}

ScheduleResult map_rho_schedule(const LogTargetPtr& base, const ConstraintSet& set, const std::vector<double>& rhos,
                                const Vector& init, const MmOptions& options) {
  if (rhos.empty()) throw InputError("map: empty rho schedule");
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    if (!(rhos[k] > 0.0) || (k > 0 && !(rhos[k] > rhos[k - 1]))) {
      throw InputError("map: rho schedule must be positive and strictly increasing");
    }
  }
  ScheduleResult out;
  Vector x = init;
  for (double rho : rhos) {
    RelaxedPosterior post(base, set, SquaredDistance{rho});
    auto r = map_fixed_rho(post, x, options);
    x = r.theta;
    out.rhos.push_back(rho);
    out.solutions.push_back(x);
    out.trace.insert(out.trace.end(), r.trace.begin(), r.trace.end());
  }
  out.theta = x;
  return out;
}

}  // namespace dset::prox
