#include "dset/tilting.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <optional>

#include "dset/errors.hpp"

namespace dset::tilting {

std::vector<double> half_sq_distances(const ConstraintSet& set, const std::vector<Vector>& draws) {
  std::vector<double> out(draws.size());
  const auto n = static_cast<long>(draws.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const double d = project(set, draws[static_cast<std::size_t>(i)]).distance;
    out[static_cast<std::size_t>(i)] = 0.5 * d * d;
  }
  return out;
}

std::vector<double> half_sq_distances_serial(const ConstraintSet& set, const std::vector<Vector>& draws) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& x : draws) {
    const double d = project(set, x).distance;
    out.push_back(0.5 * d * d);
  }
  return out;
}

std::vector<Vector> pooled_draws(const std::vector<hmc::SampleChain>& chains) {
  std::vector<Vector> out;
  for (const auto& c : chains) out.insert(out.end(), c.draws.begin(), c.draws.end());
  return out;
}

std::vector<double> tilt_weights(std::span<const double> half_sq, double delta_lambda) {
  if (half_sq.empty()) throw InputError("tilting: no reference draws");
  const double shift = *std::min_element(half_sq.begin(), half_sq.end());
  std::vector<double> w(half_sq.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(-delta_lambda * (half_sq[i] - shift));
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

namespace {

TiltedMoment estimate(std::span<const double> half_sq, double lambda, double base_lambda) {
  if (!(lambda >= 0.0)) throw InputError("tilting: lambda must be nonnegative");
  if (lambda < base_lambda) throw InputError("tilting: lambda below the reference tilt");
  const auto w = tilt_weights(half_sq, lambda - base_lambda);
  TiltedMoment out;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.moment += w[i] * half_sq[i];
    sum_sq += w[i] * w[i];
  }
  double var = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double c = half_sq[i] - out.moment;
    var += w[i] * w[i] * c * c;
  }
  out.std_error = std::sqrt(var);
  out.weight_ess = 1.0 / sum_sq;
  return out;
}

void require_ess(const TiltedMoment& m, double lambda) {
  if (m.weight_ess < kMinWeightEss) {
    throw WeightDegeneracyError(fmt::format(
        "tilting: weight ESS {:.1f} below {} at lambda = {:.6g}; use more reference draws or staged tilting",
        m.weight_ess, kMinWeightEss, lambda));
  }
}

}  // namespace

TiltedMoment tilted_moment(std::span<const double> half_sq, double lambda, double base_lambda) {
  const auto m = estimate(half_sq, lambda, base_lambda);
  require_ess(m, lambda);
  return m;
}

TiltedMoment tilted_moment(const TiltingProblem& problem, double lambda) {
  const auto g = half_sq_distances(problem.set, pooled_draws(problem.reference));
  return tilted_moment(g, lambda, problem.base_lambda);
}

namespace {

TiltingSolution calibrate_on(std::span<const double> g, const TiltingProblem& problem) {
  const double budget = problem.budget;
  if (!(budget > 0.0)) throw InputError("tilting: budget must be positive");
  const double base = problem.base_lambda;
  const auto at_base = estimate(g, base, base);
  if (at_base.moment <= budget) {
    throw CalibrationError(fmt::format(
        "calibration refused: the {} moment E[dist^2/2] = {:.6g} does not exceed the budget D = {:.6g}",
        base == 0.0 ? "unconstrained" : "reference", at_base.moment, budget));
  }

  double lo = std::max(problem.lambda_lo, base);
  double hi = std::max(problem.lambda_hi, lo > 0.0 ? 2.0 * lo : 1.0);
  if (estimate(g, lo, base).moment <= budget) lo = base;
  while (estimate(g, hi, base).moment >= budget) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) {
      throw CalibrationError(fmt::format("calibration: budget D = {:.6g} unreachable below lambda = 1e12", budget));
    }
  }

  TiltingSolution sol;
  sol.unconstrained_moment = at_base.moment;
  for (int step = 0; step < 200; ++step) {
    const double mid = 0.5 * (lo + hi);
    const auto m = estimate(g, mid, base);
    sol.lambda = mid;
    sol.achieved_moment = m.moment;
    sol.mc_std_error = m.std_error;
    sol.ess_of_weights = m.weight_ess;
    sol.bisection_steps = step + 1;
    if (std::abs(m.moment - budget) <= 1e-3 * budget || hi - lo <= 1e-3 * mid) break;
    if (m.moment > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  require_ess(estimate(g, sol.lambda, base), sol.lambda);
  return sol;
}

// Largest extra tilt keeping the weight ESS at or above a quarter of the draws.
double stage_advance(std::span<const double> g) {
  const double target = 0.25 * static_cast<double>(g.size());
  auto ess = [&](double delta) {
    const auto w = tilt_weights(g, delta);
    double s = 0.0;
    for (double v : w) s += v * v;
    return 1.0 / s;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (ess(hi) >= target && hi < 1e12) {
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (ess(mid) >= target ? lo : hi) = mid;
  }
  return lo > 0.0 ? lo : hi;
}

}  // namespace

TiltingSolution calibrate(const TiltingProblem& problem) {
  const auto g = half_sq_distances(problem.set, pooled_draws(problem.reference));
  return calibrate_on(g, problem);
}

TiltingSolution calibrate_staged(const LogTargetPtr& base, const ConstraintSet& set, double budget,
                                 const StageSampler& sampler, int max_stages) {
  if (max_stages < 1) throw InputError("tilting: max_stages must be at least 1");
  double stage_lambda = 0.0;
  double unconstrained = 0.0;
  std::optional<TiltingSolution> previous;
  for (int stage = 1;; ++stage) {
    TiltingProblem problem{base, set, budget, sampler(stage_lambda), stage_lambda, 2.0 * stage_lambda + 1.0,
                           stage_lambda};
    const auto g = half_sq_distances(set, pooled_draws(problem.reference));
    if (stage == 1) unconstrained = estimate(g, 0.0, 0.0).moment;
    std::optional<TiltingSolution> sol;
    try {
      sol = calibrate_on(g, problem);
      sol->stages = stage;
      sol->unconstrained_moment = unconstrained;
    } catch (const WeightDegeneracyError&) {
      if (stage >= max_stages) throw;
    } catch (const CalibrationError&) {
      // The new stage overshot the root; the last usable estimate stands.
      if (stage == 1 || !previous) throw;
      return *previous;
    }
    if (sol && (stage >= max_stages || sol->ess_of_weights >= kStageEssFraction * static_cast<double>(g.size()))) {
      return *sol;
    }
    double advance = stage_advance(g);
    if (sol) {
      advance = std::min(advance, 0.5 * (sol->lambda - stage_lambda));
      previous = sol;
    }
    stage_lambda += advance;
  }
}

}  // namespace dset::tilting
