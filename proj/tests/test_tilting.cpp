#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dset/errors.hpp"
#include "dset/models.hpp"
#include "dset/tilting.hpp"
#include "support/oracles.hpp"

using namespace dset;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

LogTargetPtr standard_normal() { return build_model(GaussianLinearSpec{Matrix::Ones(1, 1), vec({0}), 1.0}); }

// Exact i.i.d. N(0,1) draws packaged as one chain.
std::vector<hmc::SampleChain> iid_reference(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  hmc::SampleChain c;
  for (int i = 0; i < n; ++i) c.draws.push_back(vec({normal(rng)}));
  return {c};
}

tilting::TiltingProblem halfline_problem(double budget, int n = 200000) {
  return {standard_normal(), ConstraintSet::halfline_upper(0.0), budget, iid_reference(n, 99)};
}

}  // namespace

TEST_SUITE("tilting_calibration") {
  TEST_CASE("lambda zero is the plain average") {
    const auto p = halfline_problem(0.05, 10000);
    const auto g = tilting::half_sq_distances(p.set, tilting::pooled_draws(p.reference));
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    const auto m = tilting::tilted_moment(p, 0.0);
    CHECK(m.moment == doctest::Approx(mean).epsilon(1e-12));
    CHECK(m.weight_ess == doctest::Approx(10000.0));
  }

  TEST_CASE("tilted moment matches quadrature") {
    const auto p = halfline_problem(0.05);
    for (double lambda : {0.5, 1.0, 5.0}) {
      const auto m = tilting::tilted_moment(p, lambda);
      CHECK(std::abs(m.moment - testing::halfline_tilted_moment(lambda)) < 3 * m.std_error);
    }
  }

  TEST_CASE("tilted moment is non-increasing in lambda on a fixed sample") {
    const auto p = halfline_problem(0.05, 20000);
    double previous = tilting::tilted_moment(p, 0.0).moment;
    for (double lambda = 0.25; lambda < 200; lambda *= 1.5) {
      const double m = tilting::tilted_moment(p, lambda).moment;
      CHECK(m <= previous + 1e-15);
      previous = m;
    }
  }

  TEST_CASE("weights sum to one") {
    const auto p = halfline_problem(0.05, 5000);
    const auto g = tilting::half_sq_distances(p.set, tilting::pooled_draws(p.reference));
    for (double lambda : {0.0, 1.0, 30.0}) {
      const auto w = tilting::tilt_weights(g, lambda);
      CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("parallel and serial distances agree") {
    const auto p = halfline_problem(0.05, 5000);
    const auto draws = tilting::pooled_draws(p.reference);
    CHECK(tilting::half_sq_distances(p.set, draws) == tilting::half_sq_distances_serial(p.set, draws));
  }

  TEST_CASE("calibration matches the quadrature root and is monotone in the budget") {
    double previous_lambda = std::numeric_limits<double>::infinity();
    for (double budget : {0.01, 0.05, 0.1}) {
      const auto p = halfline_problem(budget);
      const auto s = tilting::calibrate(p);
      const double root =
          testing::bisect([&](double l) { return testing::halfline_tilted_moment(l) - budget; }, 0.0, 1e4);
      CHECK(std::abs(s.lambda - root) / root < 0.1);
      CHECK(std::abs(s.achieved_moment - budget) <= std::max(3 * s.mc_std_error, 1e-3 * budget));
      CHECK(s.lambda < previous_lambda);
      previous_lambda = s.lambda;
    }
  }

  TEST_CASE("budget just below the untilted moment gives a small lambda") {
    auto p = halfline_problem(0.05, 50000);
    const auto m0 = tilting::tilted_moment(p, 0.0);
    p.budget = m0.moment - m0.std_error;
    const auto s = tilting::calibrate(p);
    CHECK(s.lambda < 0.2);
  }

  TEST_CASE("refusals") {
    auto p = halfline_problem(1.0, 10000);
    CHECK_THROWS_AS(tilting::calibrate(p), CalibrationError);
    // Every draw far outside the set: the weights collapse before the budget is met.
    p.set = ConstraintSet::halfline_upper(-50.0);
    p.budget = 1.0;
    CHECK_THROWS_AS(tilting::calibrate(p), CalibrationError);
    const auto g = tilting::half_sq_distances(p.set, tilting::pooled_draws(p.reference));
    CHECK_THROWS_AS(tilting::tilted_moment(g, 1e3), WeightDegeneracyError);
  }

  TEST_CASE("staged calibration recovers when one stage degenerates") {
    // Almost all reference mass lies outside (-inf, -3], so a single untilted
    // sample cannot resolve a small budget.
    const double bound = -3.0;
    const double budget = 0.01;
    const auto base = standard_normal();
    const auto set = ConstraintSet::halfline_upper(bound);
    int calls = 0;
    const auto sampler = [&](double lambda) {
      ++calls;
      hmc::HmcConfig config;
      config.num_warmup = 500;
      config.num_samples = 40000;
      config.seed = 100 + static_cast<std::uint64_t>(calls);
      config.integration_time = 2.0;
      const auto post = lambda == 0.0 ? RelaxedPosterior(base, ConstraintSet::whole_space(1), SquaredDistance{1.0})
                                      : RelaxedPosterior(base, set, SquaredDistance{lambda});
      return hmc::sample_chains(post, config);
    };
    const auto sol = tilting::calibrate_staged(base, set, budget, sampler);
    const double root =
        testing::bisect([&](double l) { return testing::halfline_tilted_moment(l, bound) - budget; }, 0, 1e6);
    CHECK(sol.stages > 1);
    CHECK(std::abs(sol.lambda - root) / root < 0.1);
    CHECK(sol.unconstrained_moment == doctest::Approx(5.0).epsilon(0.1));
  }
}
