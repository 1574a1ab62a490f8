#include <doctest.h>

#include <cmath>
#include <random>

#include "dset/diagnostics.hpp"
#include "dset/errors.hpp"
#include "dset/models.hpp"
#include "dset/posterior.hpp"
#include "support/oracles.hpp"

using namespace dset;
using dset::testing::random_vector;
using dset::testing::simpson;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

LogTargetPtr standard_normal(int n) {
  return build_model(GaussianLinearSpec{Matrix::Identity(n, n), Vector::Zero(n), 1.0});
}

// logp == 0 everywhere.
class Flat final : public LogTarget {
 public:
  explicit Flat(int n) : n_(n) {}
  int dim() const override { return n_; }
  std::string name() const override { return "flat"; }
  double logp(const Vector&) const override { return 0.0; }
  Vector grad(const Vector& t) const override { return Vector::Zero(t.size()); }

 private:
  int n_;
};

}  // namespace

TEST_SUITE("posterior_core") {
  TEST_CASE("hand-computed relaxed log density") {
    const RelaxedPosterior post(standard_normal(1), ConstraintSet(Ball{Vector::Zero(1), 1.0}), SquaredDistance{2.0});
    CHECK(post.logp(vec({2})) == doctest::Approx(-3.0));
    CHECK(post.penalty(vec({0.3})) == 0.0);
  }

  TEST_CASE("penalty vanishes on the set and never raises the density") {
    std::mt19937_64 rng(1);
    const RelaxedPosterior post(standard_normal(3), ConstraintSet(Ball{Vector::Zero(3), 1.0}), SquaredDistance{10});
    for (int t = 0; t < 100; ++t) {
      const Vector x = random_vector(rng, 3, 1.5);
      CHECK(post.logp(x) <= post.base().logp(x));
      if (x.norm() <= 1.0) CHECK(post.logp(x) == post.base().logp(x));
    }
  }

  TEST_CASE("interior gradient equals the base gradient exactly") {
    const RelaxedPosterior post(standard_normal(2), ConstraintSet(Ball{Vector::Zero(2), 1.0}), SquaredDistance{1e3});
    const Vector x = vec({0.3, -0.4});
    CHECK(post.grad(x) == post.base().grad(x));
  }

  TEST_CASE("flat base on a ball") {
    const RelaxedPosterior post(std::make_shared<Flat>(2), ConstraintSet(Ball{Vector::Zero(2), 1.0}),
                                SquaredDistance{4.0});
    CHECK(post.grad(vec({2, 0})).isApprox(vec({-4, 0})));
  }

  TEST_CASE("Sharp is -inf off the set") {
    const RelaxedPosterior post(standard_normal(1), ConstraintSet(Ball{Vector::Zero(1), 1.0}), Sharp{});
    CHECK(std::isinf(post.logp(vec({1.5}))));
    CHECK(post.logp(vec({0.5})) == doctest::Approx(-0.125));
  }

  TEST_CASE("model gradients match finite differences") {
    std::mt19937_64 rng(2);
    const double s3 = 1.0 / std::sqrt(3.0);
    Matrix X = random_vector(rng, 30).reshaped(10, 3);
    const std::vector<LogTargetPtr> models{
        build_model(GaussianLinearSpec{X, random_vector(rng, 10), 0.7}),
        build_model(StudentTLocationSpec{vec({s3, s3, s3}), 3.0, 0.1}),
    };
    for (const auto& m : models) {
      for (int t = 0; t < 50; ++t) {
        const Vector x = random_vector(rng, 3);
        const auto fd = diag::finite_difference_grad([&](const Vector& v) { return m->logp(v); }, x);
        CHECK(diag::relative_error(m->grad(x), fd) < 1e-6);
      }
    }
  }

  TEST_CASE("analytic Hessians agree with differenced gradients") {
    std::mt19937_64 rng(3);
    Eigen::MatrixXi counts(2, 3);
    counts << 3, 5, 2, 4, 1, 6;
    const auto table = build_model(MultinomialDirichletTableSpec{counts, Matrix::Ones(2, 3)});
    const auto t = build_model(StudentTLocationSpec{vec({0.2, 0.1, -0.3}), 3.0, 0.1});
    const Vector x = vec({0.3, 0.2, 0.25, 0.15});
    CHECK((table->hessian(x) - table->LogTarget::hessian(x)).norm() < 1e-4 * table->hessian(x).norm());
    const Vector y = random_vector(rng, 3);
    CHECK((t->hessian(y) - t->LogTarget::hessian(y)).norm() < 1e-5 * std::max(1.0, t->hessian(y).norm()));
  }

  TEST_CASE("model examples") {
    const auto g = build_model(GaussianLinearSpec{Matrix::Identity(2, 2), Vector::Zero(2), 1.0});
    CHECK(g->grad(vec({0.5, -1})).isApprox(vec({-0.5, 1})));
    CHECK(g->logp(vec({1, 1})) == doctest::Approx(-1.0));

    const double s3 = 1.0 / std::sqrt(3.0);
    const auto t = build_model(StudentTLocationSpec{vec({s3, s3, s3}), 3.0, 0.1});
    CHECK(t->grad(vec({s3, s3, s3})).isZero(0.0));

    Eigen::MatrixXi counts(2, 2);
    counts << 1, 1, 1, 1;
    const auto table = build_model(MultinomialDirichletTableSpec{counts, Matrix::Ones(2, 2)});
    CHECK(table->dim() == 2);
    CHECK(table->grad(vec({0.5, 0.5})).norm() < 1e-14);
  }

  TEST_CASE("contingency model support and full table") {
    Eigen::MatrixXi counts(2, 3);
    counts << 3, 5, 2, 4, 1, 6;
    const auto base = build_model(MultinomialDirichletTableSpec{counts, Matrix::Ones(2, 3)});
    const auto& table = dynamic_cast<const MultinomialDirichletTable&>(*base);
    CHECK(table.in_support(vec({0.3, 0.2, 0.1, 0.1})));
    CHECK_FALSE(table.in_support(vec({0.6, 0.5, 0.1, 0.1})));
    CHECK_FALSE(table.in_support(vec({-0.1, 0.5, 0.1, 0.1})));
    CHECK(std::isinf(table.logp(vec({0.6, 0.5, 0.1, 0.1}))));
    const Matrix full = table.full_table(vec({0.3, 0.2, 0.1, 0.1}));
    CHECK(full.rows() == 2);
    CHECK(full(0, 2) == doctest::Approx(0.5));
    CHECK(full(1, 2) == doctest::Approx(0.8));

    std::mt19937_64 rng(9);
    for (int k = 0; k < 20; ++k) CHECK(table.in_support(table.initial_point(rng)));
  }

  TEST_CASE("invalid model specifications are rejected") {
    CHECK_THROWS_AS(build_model(GaussianLinearSpec{Matrix::Identity(2, 2), Vector::Zero(3), 1.0}), InputError);
    CHECK_THROWS_AS(build_model(GaussianLinearSpec{Matrix::Identity(2, 2), Vector::Zero(2), 0.0}), InputError);
    CHECK_THROWS_AS(build_model(StudentTLocationSpec{vec({1}), -1.0, 1.0}), InputError);
    Eigen::MatrixXi counts(1, 2);
    counts << -1, 2;
    CHECK_THROWS_AS(build_model(MultinomialDirichletTableSpec{counts, Matrix::Ones(1, 2)}), InputError);
    CHECK_THROWS_AS(RelaxedPosterior(standard_normal(2), ConstraintSet(Ball{Vector::Zero(3), 1.0}),
                                     SquaredDistance{1.0}),
                    InputError);
    CHECK_THROWS_AS(RelaxedPosterior(standard_normal(2), ConstraintSet(Ball{Vector::Zero(2), 1.0}),
                                     SquaredDistance{0.0}),
                    InputError);
    CHECK_THROWS_AS(RelaxedPosterior(standard_normal(2), ConstraintSet(Ball{Vector::Zero(2), 1.0}),
                                     LevelSetSphere{1.0}),
                    InputError);
  }

  TEST_CASE("relaxed gradients match finite differences for every flavor") {
    std::mt19937_64 rng(4);
    const auto base = build_model(StudentTLocationSpec{vec({0.3, 0.3, 0.3}), 3.0, 0.1});
    const std::vector<RelaxedPosterior> posts{
        RelaxedPosterior(base, ConstraintSet(Sphere{Vector::Zero(3), 1.0}), SquaredDistance{1e3}),
        RelaxedPosterior(base, ConstraintSet(Sphere{Vector::Zero(3), 1.0}), LevelSetSphere{1e3}),
        RelaxedPosterior(base, ConstraintSet(Ball{Vector::Zero(3), 1.0}), UnsquaredDistance{1e3}),
    };
    for (const auto& post : posts) {
      int checked = 0;
      while (checked < 50) {
        const Vector x = random_vector(rng, 3, 1.0);
        if (post.penalty(x) == 0.0 || project(post.set(), x).distance < 1e-3) continue;
        if (std::abs(x.squaredNorm() - 1.0) < 1e-3) continue;
        ++checked;
        const auto fd = diag::finite_difference_grad([&](const Vector& v) { return post.logp(v); }, x);
        CHECK(diag::relative_error(post.grad(x), fd) < 1e-5);
      }
    }
  }

  TEST_CASE("relaxed log density decreases in rho off the set") {
    const auto base = standard_normal(2);
    const ConstraintSet ball(Ball{Vector::Zero(2), 1.0});
    const Vector x = vec({1.5, 0.2});
    double previous = base->logp(x);
    for (double rho : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
      const double v = RelaxedPosterior(base, ball, SquaredDistance{rho}).logp(x);
      CHECK(v < previous);
      previous = v;
    }
  }

  TEST_CASE("relaxed densities are integrable") {
    const auto base = standard_normal(1);
    const ConstraintSet interval(Box{vec({-1}), vec({1})});
    const std::vector<PenaltyFlavor> flavors{SquaredDistance{5}, UnsquaredDistance{5}, Sharp{}};
    for (const auto& flavor : flavors) {
      const RelaxedPosterior post(base, interval, flavor);
      auto density = [&](double t) { return std::exp(post.logp(vec({t}))); };
      const double narrow = simpson(density, -20, 20, 400000);
      const double wide = simpson(density, -40, 40, 800000);
      CHECK(std::isfinite(narrow));
      CHECK(std::abs(narrow - wide) < 1e-6);
    }
  }

  TEST_CASE("squared penalty gradient is continuous across the boundary, unsquared jumps by rho/2") {
    const double rho = 100.0;
    const auto flat = std::make_shared<Flat>(2);
    const ConstraintSet ball(Ball{Vector::Zero(2), 1.0});
    const RelaxedPosterior sq(flat, ball, SquaredDistance{rho});
    const RelaxedPosterior un(flat, ball, UnsquaredDistance{rho});
    const Vector dir = vec({0.6, 0.8});
    const double h = 1e-6;
    const double sq_in = sq.grad((1 - h) * dir).dot(dir), sq_out = sq.grad((1 + h) * dir).dot(dir);
    const double un_in = un.grad((1 - h) * dir).dot(dir), un_out = un.grad((1 + h) * dir).dot(dir);
    CHECK(std::abs(sq_out - sq_in) <= rho * 2 * h * 1.01);
    CHECK(std::abs(un_out - un_in) == doctest::Approx(rho / 2).epsilon(0.05));
  }
}
