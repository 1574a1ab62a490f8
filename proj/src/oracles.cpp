#include <cmath>
#include <limits>
#include <random>

#include "dset/diagnostics.hpp"
#include "dset/errors.hpp"
#include "dset/proximal_distance.hpp"

namespace dset::diag {

Vector finite_difference_grad(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double step = h * std::max(1.0, std::abs(x(k)));
    Vector plus = x;
    Vector minus = x;
    plus(k) += step;
    minus(k) -= step;
    g(k) = (f(plus) - f(minus)) / (2.0 * step);
  }
  return g;
}

double relative_error(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(b.norm(), 1.0); }

GradientCheckReport gradient_check(const RelaxedPosterior& post, const Vector& center, double scale, int points,
                                   std::uint64_t seed, double min_dist) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const bool level_set = std::holds_alternative<LevelSetSphere>(post.flavor());
  GradientCheckReport report;
  int attempts = 0;
  while (report.points < points) {
    if (++attempts > 1000 * points) throw InputError("gradient_check: too few admissible points");
    Vector x = center;
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) += scale * normal(rng);
    if (!post.base().in_support(x)) continue;
    const double dist = project(post.set(), x).distance;
    if (dist > 0.0 && dist <= min_dist) continue;
    if (level_set && std::abs(x.squaredNorm() - 1.0) <= min_dist) continue;
    ++report.points;
    const Vector fd = finite_difference_grad([&](const Vector& v) { return post.logp(v); }, x);
    const double err = relative_error(post.grad(x), fd);
    if (err > report.max_relative_error || report.worst_point.size() == 0) {
      report.max_relative_error = std::max(err, report.max_relative_error);
      report.worst_point = x;
    }
  }
  return report;
}

namespace {

// Constrained maximiser of a concave log density: best admissible grid cell,
// refined by projected gradient ascent with step 1 / ||Hessian||.
Vector constrained_map(const LogTarget& base, const ConstraintSet& set, const GridDensity& lattice) {
  double best = -std::numeric_limits<double>::infinity();
  Vector x;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const Vector c = lattice.center(i);
    if (!set.contains(c) || !base.in_support(c)) continue;
    const double v = base.logp(c);
    if (v > best) {
      best = v;
      x = c;
    }
  }
  if (x.size() == 0) x = project(set, lattice.center(lattice.size() / 2)).point;

  for (int it = 0; it < 200000; ++it) {
    const Matrix H = base.hessian(x);
    const double lipschitz = std::max(H.operatorNorm(), 1e-12);
    const Vector next = project(set, x + base.grad(x) / lipschitz).point;
    const double step = (next - x).norm();
    x = next;
    if (step <= 1e-15 * (1.0 + x.norm())) break;
  }
  return x;
}

}  // namespace

Theorem1Report theorem1_check(const LogTargetPtr& base, const ConstraintSet& set, const std::vector<double>& rhos,
                              int dims, std::array<double, 2> lower, std::array<double, 2> upper,
                              std::array<int, 2> cells, double tol) {
  if (base->dim() != dims || set.dim() != dims) throw InputError("theorem1_check: problem must be 1-D or 2-D");
  auto lattice = make_grid_density([&](const Vector& x) { return base->logp(x); }, dims, lower, upper, cells);

  Theorem1Report report;
  report.constrained_map = constrained_map(*base, set, lattice);

  const auto peak = std::max_element(lattice.log_values.begin(), lattice.log_values.end());
  const Vector init = lattice.center(static_cast<std::size_t>(peak - lattice.log_values.begin()));
  prox::MmOptions options;
  options.record_trace = false;
  const auto schedule = prox::map_rho_schedule(base, set, rhos, init, options);

  report.rhos = schedule.rhos;
  report.relaxed_maps = schedule.solutions;
  for (const auto& s : schedule.solutions) report.errors.push_back((s - report.constrained_map).norm());
  report.monotone = true;
  for (std::size_t k = 1; k < report.errors.size(); ++k) {
    if (report.errors[k] > report.errors[k - 1] + 1e-12) report.monotone = false;
  }
  report.converged = !report.errors.empty() && report.errors.back() <= tol;
  return report;
}

Theorem2Report theorem2_check(const LogTargetPtr& base, const ConstraintSet& set, const std::vector<double>& rhos,
                              int dims, std::array<double, 2> lower, std::array<double, 2> upper,
                              std::array<int, 2> cells) {
  const RelaxedPosterior sharp(base, set, Sharp{});
  const auto constrained =
      make_grid_density([&](const Vector& x) { return sharp.logp(x); }, dims, lower, upper, cells);
  Theorem2Report report;
  report.strictly_decreasing = true;
  for (double rho : rhos) {
    const RelaxedPosterior relaxed(base, set, SquaredDistance{rho});
    const auto g = make_grid_density([&](const Vector& x) { return relaxed.logp(x); }, dims, lower, upper, cells);
    report.rhos.push_back(rho);
    report.tv.push_back(tv_distance_grid(g, constrained));
    const auto k = report.tv.size();
    if (k > 1 && !(report.tv[k - 1] < report.tv[k - 2])) report.strictly_decreasing = false;
  }
  return report;
}

}  // namespace dset::diag
