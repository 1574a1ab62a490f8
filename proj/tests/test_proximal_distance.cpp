#include <doctest.h>

#include <cmath>
#include <random>

#include "dset/diagnostics.hpp"
#include "dset/errors.hpp"
#include "dset/models.hpp"
#include "dset/proximal_distance.hpp"
#include "support/oracles.hpp"

using namespace dset;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// N(1, 1) in one dimension.
LogTargetPtr shifted_normal() { return build_model(GaussianLinearSpec{Matrix::Ones(1, 1), vec({1}), 1.0}); }

// Non-Gaussian 1-D target with the same mode, so the Newton inner solver is used.
class Quartic final : public LogTarget {
 public:
  int dim() const override { return 1; }
  std::string name() const override { return "quartic"; }
  double logp(const Vector& t) const override {
    const double u = t(0) - 1.0;
    return -0.5 * u * u - 0.25 * u * u * u * u;
  }
  Vector grad(const Vector& t) const override {
    const double u = t(0) - 1.0;
    return vec({-u - u * u * u});
  }
};

void check_descent(const std::vector<prox::MmState>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].rho != trace[k - 1].rho) continue;
    CHECK(trace[k].objective <= trace[k - 1].objective + 1e-12 * std::max(1.0, std::abs(trace[k - 1].objective)));
  }
}

}  // namespace

TEST_SUITE("proximal_distance") {
  TEST_CASE("halfline fixed points are 1 / (1 + rho)") {
    const auto half = ConstraintSet::halfline_upper(0.0);
    for (double rho : {1.0, 1e3}) {
      const RelaxedPosterior post(shifted_normal(), half, SquaredDistance{rho});
      const auto r = prox::map_fixed_rho(post, vec({2.0}));
      CHECK(std::abs(r.theta(0) - 1.0 / (1.0 + rho)) < 1e-8);
      check_descent(r.trace);
      // 1-D grid search oracle.
      double best = -1e300, arg = 0;
      for (int i = 0; i <= 200000; ++i) {
        const double t = -0.5 + 1.5 * i / 200000.0;
        const double v = post.logp(vec({t}));
        if (v > best) best = v, arg = t;
      }
      CHECK(std::abs(r.theta(0) - arg) < 1e-5);
    }
  }

  TEST_CASE("the Newton inner solver agrees with the grid") {
    const RelaxedPosterior post(std::make_shared<Quartic>(), ConstraintSet::halfline_upper(0.0), SquaredDistance{3.0});
    const auto r = prox::map_fixed_rho(post, vec({2.0}));
    CHECK(std::abs(post.grad(r.theta)(0)) < 1e-6);
    check_descent(r.trace);
  }

  TEST_CASE("starting at the optimum returns immediately") {
    const RelaxedPosterior post(shifted_normal(), ConstraintSet::halfline_upper(0.0), SquaredDistance{1.0});
    const auto r = prox::map_fixed_rho(post, vec({0.5}));
    CHECK(r.iterations == 1);
    CHECK(r.trace.back().step_norm <= 1e-10);
    CHECK(r.theta(0) == doctest::Approx(0.5));
  }

  TEST_CASE("schedule converges to the constrained MAP") {
    const std::vector<double> rhos{1, 10, 100, 1000, 1e4};
    const auto s = prox::map_rho_schedule(shifted_normal(), ConstraintSet::halfline_upper(0.0), rhos, vec({2.0}));
    REQUIRE(s.solutions.size() == rhos.size());
    for (std::size_t k = 0; k < rhos.size(); ++k) {
      CHECK(std::abs(s.solutions[k](0) - 1.0 / (1.0 + rhos[k])) < 1e-8);
      CHECK(std::abs(s.solutions[k](0)) <= 2.0 / rhos[k]);
    }
    check_descent(s.trace);
  }

  TEST_CASE("whole space gives the unconstrained maximiser") {
    std::mt19937_64 rng(1);
    const Matrix X = testing::random_vector(rng, 40).reshaped(20, 2);
    const Vector y = testing::random_vector(rng, 20);
    const auto base = build_model(GaussianLinearSpec{X, y, 1.0});
    const Vector ols = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    const auto s = prox::map_rho_schedule(base, ConstraintSet::whole_space(2), {1, 100}, Vector::Zero(2));
    CHECK((s.theta - ols).norm() < 1e-9);
  }

  TEST_CASE("ridge over the ball reaches the constrained optimum") {
    std::mt19937_64 rng(2);
    const Matrix X = testing::random_vector(rng, 200).reshaped(100, 2);
    const Vector y = X * vec({-1.295, -0.532}) + testing::random_vector(rng, 100);
    const auto base = build_model(GaussianLinearSpec{X, y, 1.0});
    const ConstraintSet ball(Ball{Vector::Zero(2), 1.0});
    const auto s = prox::map_rho_schedule(base, ball, prox::default_rho_schedule(), Vector::Zero(2));
    CHECK(project(ball, s.theta).distance <= 1e-4);
    // Projected gradient ascent as the independent oracle.
    const Matrix H = X.transpose() * X;
    const double step = 1.0 / H.operatorNorm();
    Vector b = Vector::Zero(2);
    for (int it = 0; it < 100000; ++it) {
      Vector next = b + step * (X.transpose() * (y - X * b));
      if (next.norm() > 1.0) next /= next.norm();
      b = next;
    }
    CHECK((s.theta - b).norm() < 1e-3);
    check_descent(s.trace);
  }

  TEST_CASE("fixed-rho MAP is a stationary point of the relaxed gradient") {
    std::mt19937_64 rng(3);
    const auto base = build_model(StudentTLocationSpec{vec({0.6, 0.6, 0.6}), 3.0, 0.1});
    const RelaxedPosterior post(base, ConstraintSet(Sphere{Vector::Zero(3), 1.0}), SquaredDistance{100.0});
    const auto r = prox::map_fixed_rho(post, vec({0.5, 0.4, 0.3}));
    CHECK(post.grad(r.theta).norm() <= 1e-6);
  }

  TEST_CASE("bad inputs") {
    const RelaxedPosterior unsq(shifted_normal(), ConstraintSet::halfline_upper(0.0), UnsquaredDistance{1.0});
    CHECK_THROWS_AS(prox::map_fixed_rho(unsq, vec({1.0})), InputError);
    CHECK_THROWS_AS(prox::map_rho_schedule(shifted_normal(), ConstraintSet::halfline_upper(0.0), {10, 1}, vec({1})),
                    InputError);
    const RelaxedPosterior post(build_model(StudentTLocationSpec{vec({0.6, 0.6, 0.6}), 3.0, 0.1}),
                                ConstraintSet(Sphere{Vector::Zero(3), 1.0}), SquaredDistance{100.0});
    prox::MmOptions opts;
    opts.max_iterations = 2;
    CHECK_THROWS_AS(prox::map_fixed_rho(post, vec({0.5, 0.4, 0.3}), opts), NonconvergenceError);
  }

  TEST_CASE("default schedule") {
    const auto s = prox::default_rho_schedule();
    REQUIRE(s.size() == 7);
    CHECK(s.front() == 1.0);
    CHECK(s.back() == 1e6);
  }
}
