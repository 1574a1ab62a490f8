#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dset/constraint_set.hpp"
#include "dset/errors.hpp"
#include "support/oracles.hpp"

using namespace dset;
using dset::testing::random_vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<ConstraintSet> convex_sets() {
  Matrix A(2, 3);
  A << 1, 1, 0, 0, -1, 1;
  return {
      ConstraintSet(Ball{vec({0.5, -0.2, 0.0}), 1.3}),
      ConstraintSet(Box{vec({-1, 0, -2}), vec({1, 0.5, 3})}),
      ConstraintSet(Simplex{3}),
      ConstraintSet(Polyhedron{A, vec({0.5, -1.0}), Matrix::Zero(0, 3), Vector::Zero(0)}),
      ConstraintSet(StochasticDominance{3, 1}),
  };
}

}  // namespace

TEST_SUITE("constraint_sets") {
  TEST_CASE("ball projection scales radially") {
    const ConstraintSet ball(Ball{Vector::Zero(2), 1.0});
    const auto r = project(ball, vec({2, 0}));
    CHECK(r.point.isApprox(vec({1, 0})));
    CHECK(r.distance == doctest::Approx(1.0));
    CHECK(r.unique);
  }

  TEST_CASE("sphere projection normalises") {
    const ConstraintSet sphere(Sphere{Vector::Zero(2), 1.0});
    CHECK_FALSE(sphere.convex());
    const auto r = project(sphere, vec({3, 4}));
    CHECK(r.point.isApprox(vec({0.6, 0.8})));
    CHECK(r.distance == doctest::Approx(4.0));
  }

  TEST_CASE("sphere at its centre picks center + radius e1 and reports non-uniqueness") {
    const ConstraintSet sphere(Sphere{vec({1, 2, 3}), 2.0});
    const auto r = project(sphere, vec({1, 2, 3}));
    CHECK(r.point.isApprox(vec({3, 2, 3})));
    CHECK_FALSE(r.unique);
    CHECK(r.distance == doctest::Approx(2.0));
  }

  TEST_CASE("sphere projection agrees with the radial formula") {
    std::mt19937_64 rng(3);
    const ConstraintSet sphere(Sphere{vec({0.1, -0.3, 0.2}), 1.5});
    for (int t = 0; t < 200; ++t) {
      const Vector x = random_vector(rng, 3, 2.0);
      const Vector c = vec({0.1, -0.3, 0.2});
      const Vector expected = c + (x - c) * (1.5 / (x - c).norm());
      CHECK((project(sphere, x).point - expected).norm() == 0.0);
    }
  }

  TEST_CASE("simplex sort-and-threshold matches the QP enumeration oracle") {
    const ConstraintSet simplex(Simplex{3});
    const auto h = simplex.halfspaces();
    std::mt19937_64 rng(11);
    std::vector<Vector> points{vec({0.2, 0.3, 0.1})};
    for (int t = 0; t < 100; ++t) points.push_back(random_vector(rng, 3, 1.5));
    for (const auto& y : points) {
      const auto oracle = dset::testing::enumerate_projection(y, h.A, h.b, h.E, h.d);
      REQUIRE(oracle.has_value());
      CHECK((project(simplex, y).point - *oracle).norm() < 1e-10);
    }
    // (0.2, 0.3, 0.1) shifts every coordinate up by 0.4/3.
    const auto r = project(simplex, vec({0.2, 0.3, 0.1}));
    CHECK(r.point.isApprox(vec({0.2 + 0.4 / 3, 0.3 + 0.4 / 3, 0.1 + 0.4 / 3})));
  }

  TEST_CASE("points inside a set project onto themselves") {
    for (const auto& set : convex_sets()) {
      Vector inside = project(set, Vector::Constant(set.dim(), 0.3)).point;
      const auto r = project(set, inside);
      CHECK((r.point - inside).norm() < 1e-12);
      CHECK(r.distance < 1e-12);
    }
  }

  TEST_CASE("projection is idempotent and lands in the set") {
    std::mt19937_64 rng(5);
    for (const auto& set : convex_sets()) {
      for (int t = 0; t < 50; ++t) {
        const Vector x = random_vector(rng, set.dim(), 2.0);
        const auto r = project(set, x);
        CHECK(set.contains(r.point, kFeasibilityTol));
        CHECK((project(set, r.point).point - r.point).norm() < 1e-10);
        CHECK(std::abs(r.distance - (x - r.point).norm()) <= 1e-12 * std::max(1.0, r.distance));
      }
    }
  }

  TEST_CASE("projection onto convex sets is nonexpansive") {
    std::mt19937_64 rng(7);
    for (const auto& set : convex_sets()) {
      for (int t = 0; t < 50; ++t) {
        const Vector a = random_vector(rng, set.dim(), 2.0);
        const Vector b = random_vector(rng, set.dim(), 2.0);
        CHECK((project(set, a).point - project(set, b).point).norm() <= (a - b).norm() + 1e-12);
      }
    }
  }

  TEST_CASE("dist_sq_grad is theta - P(theta)") {
    const ConstraintSet ball(Ball{Vector::Zero(2), 1.0});
    CHECK(dist_sq_grad(ball, vec({0.5, 0})).isZero(0.0));
    CHECK(dist_sq_grad(ball, vec({2, 0})).isApprox(vec({1, 0})));

    const ConstraintSet box(Box{vec({-1}), vec({1})});
    for (double h : {1e-3, 1e-2}) {
      const Vector x = vec({1 + h});
      const Vector g = dist_sq_grad(box, x);
      CHECK(g(0) == doctest::Approx(h).epsilon(1e-9));
      const double step = 1e-7;
      auto half_sq = [&](double t) {
        const double d = project(box, vec({t})).distance;
        return 0.5 * d * d;
      };
      const double fd = (half_sq(x(0) + step) - half_sq(x(0) - step)) / (2 * step);
      CHECK(std::abs(fd - g(0)) / h < 1e-6);
    }
  }

  TEST_CASE("dist_sq_grad matches finite differences away from the boundary") {
    std::mt19937_64 rng(9);
    for (const auto& set : convex_sets()) {
      int checked = 0;
      for (int t = 0; t < 200 && checked < 30; ++t) {
        const Vector x = random_vector(rng, set.dim(), 2.0);
        if (project(set, x).distance < 1e-2) continue;
        ++checked;
        Vector fd(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) {
          const double h = 1e-6;
          Vector p = x, m = x;
          p(k) += h;
          m(k) -= h;
          const double dp = project(set, p).distance, dm = project(set, m).distance;
          fd(k) = (0.5 * dp * dp - 0.5 * dm * dm) / (2 * h);
        }
        const Vector g = dist_sq_grad(set, x);
        CHECK((g - fd).norm() / std::max(1.0, g.norm()) < 1e-5);
      }
    }
  }

  TEST_CASE("unsquared subgradient is the unit normal off the set") {
    const ConstraintSet ball(Ball{Vector::Zero(2), 1.0});
    CHECK(unsquared_dist_subgrad(ball, vec({2, 0})).direction.isApprox(vec({1, 0})));
    const auto inside = unsquared_dist_subgrad(ball, vec({0.5, 0.5}));
    CHECK(inside.direction.isZero(0.0));
    CHECK_FALSE(inside.near_boundary);
    const auto edge = unsquared_dist_subgrad(ball, vec({1 + 1e-13, 0}));
    CHECK(edge.direction.isZero(0.0));
    CHECK(edge.near_boundary);
  }

  TEST_CASE("stochastic dominance projection satisfies every cumulative constraint") {
    const ConstraintSet sd(StochasticDominance{4, 5});
    const auto h = sd.halfspaces();
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 0.4);
    for (int t = 0; t < 30; ++t) {
      Vector x(20);
      for (int k = 0; k < 20; ++k) x(k) = u(rng);
      const auto r = project(sd, x);
      CHECK(((h.A * r.point - h.b).array() >= -1e-9).all());
    }
  }

  TEST_CASE("invalid sets are rejected at construction") {
    CHECK_THROWS_AS(ConstraintSet(Box{vec({1}), vec({0})}), InputError);
    CHECK_THROWS_AS(ConstraintSet(Ball{vec({0}), -1.0}), InputError);
    Matrix A(2, 1);
    A << 1, -1;
    CHECK_THROWS_AS(ConstraintSet(Polyhedron{A, vec({0, 1}), Matrix::Zero(0, 1), Vector::Zero(0)}), InputError);
  }

  TEST_CASE("dimension mismatch is an input error") {
    const ConstraintSet ball(Ball{Vector::Zero(2), 1.0});
    CHECK_THROWS_AS(project(ball, vec({1, 2, 3})), InputError);
    CHECK_THROWS_AS(dist_sq_grad(ball, vec({1})), InputError);
  }

  TEST_CASE("whole space and halfline helpers") {
    const auto all = ConstraintSet::whole_space(3);
    CHECK(project(all, vec({5, -7, 1e6})).distance == 0.0);
    const auto half = ConstraintSet::halfline_upper(0.0);
    CHECK(project(half, vec({2.5})).point(0) == 0.0);
    CHECK(project(half, vec({-2.5})).point(0) == -2.5);
  }
}
