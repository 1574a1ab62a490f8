#include "dset/constraint_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dset/errors.hpp"
#include "dset/qp.hpp"

namespace dset {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Polyhedron dominance_halfspaces(int rows, int cols) {
  const int n = rows * cols;
  const int m_dom = (rows - 1) * cols;
  Polyhedron p;
  p.A = Matrix::Zero(m_dom + n, n);
  p.b = Vector::Zero(m_dom + n);
  int r = 0;
  for (int i = 0; i + 1 < rows; ++i) {
    for (int j = 0; j < cols; ++j, ++r) {
      for (int k = 0; k <= j; ++k) {
        p.A(r, (i + 1) * cols + k) += 1.0;
        p.A(r, i * cols + k) -= 1.0;
      }
    }
  }
  for (int k = 0; k < n; ++k, ++r) p.A(r, k) = 1.0;
  p.E = Matrix::Zero(0, n);
  p.d = Vector::Zero(0);
  return p;
}

ProjectionResult finish(const Vector& theta, Vector point, bool unique = true) {
  ProjectionResult out;
  out.distance = (theta - point).norm();
  out.point = std::move(point);
  out.unique = unique;
  return out;
}

ProjectionResult project_polyhedron(const Polyhedron& p, const Vector& theta) {
  qp::QpProblem problem{theta, p.A, p.b, p.E, p.d};
  auto sol = qp::solve(problem);
  return finish(theta, std::move(sol.x));
}

}  // namespace

ConstraintSet::ConstraintSet(Kind kind) : kind_(std::move(kind)) {
  dim_ = std::visit(
      Overloaded{
          [](const Ball& b) {
            if (!(b.radius > 0.0)) throw InputError("ball: radius must be positive");
            return static_cast<int>(b.center.size());
          },
          [](const Sphere& s) {
            if (!(s.radius > 0.0)) throw InputError("sphere: radius must be positive");
            return static_cast<int>(s.center.size());
          },
          [](const Box& b) {
            if (b.lower.size() != b.upper.size()) throw InputError("box: bound sizes differ");
            for (Eigen::Index i = 0; i < b.lower.size(); ++i) {
              if (std::isnan(b.lower(i)) || std::isnan(b.upper(i)) || b.lower(i) > b.upper(i)) {
                throw InputError("box: requires lower <= upper componentwise");
              }
            }
            return static_cast<int>(b.lower.size());
          },
          [](const Simplex& s) {
            if (s.dimension < 1) throw InputError("simplex: dimension must be positive");
            return s.dimension;
          },
          [](const Polyhedron& p) {
            const auto n = std::max(p.A.cols(), p.E.cols());
            qp::QpProblem problem{Vector::Zero(n), p.A, p.b, p.E, p.d};
            if (p.A.rows() > 0 && p.E.rows() > 0 && p.A.cols() != p.E.cols()) {
              throw InputError("polyhedron: A and E column counts differ");
            }
            if (!qp::check_feasible(problem)) throw InputError("polyhedron: feasible region is empty");
            return static_cast<int>(n);
          },
          [](const StochasticDominance& s) {
            if (s.rows < 1 || s.cols < 1) throw InputError("stochastic dominance: rows and cols must be positive");
            return s.rows * s.cols;
          },
      },
      kind_);
  if (dim_ < 1) throw InputError("constraint set: dimension must be positive");
}

ConstraintSet ConstraintSet::whole_space(int dim) {
  return ConstraintSet(Box{Vector::Constant(dim, -kInf), Vector::Constant(dim, kInf)});
}

ConstraintSet ConstraintSet::halfline_upper(double upper) {
  return ConstraintSet(Box{Vector::Constant(1, -kInf), Vector::Constant(1, upper)});
}

ConstraintSet ConstraintSet::interval(double lower, double upper) {
  return ConstraintSet(Box{Vector::Constant(1, lower), Vector::Constant(1, upper)});
}

std::string ConstraintSet::name() const {
  return std::visit(Overloaded{
                        [](const Ball&) { return std::string("ball"); },
                        [](const Sphere&) { return std::string("sphere"); },
                        [](const Box&) { return std::string("box"); },
                        [](const Simplex&) { return std::string("simplex"); },
                        [](const Polyhedron&) { return std::string("polyhedron"); },
                        [](const StochasticDominance&) { return std::string("stochastic_dominance"); },
                    },
                    kind_);
}

bool ConstraintSet::contains(const Vector& theta, double tol) const {
  if (theta.size() != dim_) throw InputError("contains: dimension mismatch");
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return (theta - b.center).norm() <= b.radius + tol; },
          [&](const Sphere& s) { return std::abs((theta - s.center).norm() - s.radius) <= tol; },
          [&](const Box& b) {
            return ((theta.array() >= b.lower.array() - tol) && (theta.array() <= b.upper.array() + tol)).all();
          },
          [&](const Simplex&) {
            return (theta.array() >= -tol).all() && std::abs(theta.sum() - 1.0) <= std::max(tol, 1e-12);
          },
          [&](const Polyhedron& p) {
            if (p.A.rows() > 0 && ((p.A * theta - p.b).array() < -tol).any()) return false;
            if (p.E.rows() > 0 && ((p.E * theta - p.d).cwiseAbs().array() > std::max(tol, 1e-12)).any()) return false;
            return true;
          },
          [&](const StochasticDominance& s) {
            const auto h = dominance_halfspaces(s.rows, s.cols);
            return !((h.A * theta - h.b).array() < -tol).any();
          },
      },
      kind_);
}

Polyhedron ConstraintSet::halfspaces() const {
  return std::visit(
      Overloaded{
          [](const Ball&) -> Polyhedron { throw InputError("ball has no finite halfspace description"); },
          [](const Sphere&) -> Polyhedron { throw InputError("sphere has no halfspace description"); },
          [](const Box& b) {
            const auto n = b.lower.size();
            std::vector<std::pair<Vector, double>> rows;
            for (Eigen::Index i = 0; i < n; ++i) {
              if (std::isfinite(b.lower(i))) {
                Vector a = Vector::Zero(n);
                a(i) = 1.0;
                rows.emplace_back(a, b.lower(i));
              }
              if (std::isfinite(b.upper(i))) {
                Vector a = Vector::Zero(n);
                a(i) = -1.0;
                rows.emplace_back(a, -b.upper(i));
              }
            }
            Polyhedron p;
            p.A.resize(static_cast<Eigen::Index>(rows.size()), n);
            p.b.resize(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t r = 0; r < rows.size(); ++r) {
              p.A.row(static_cast<Eigen::Index>(r)) = rows[r].first.transpose();
              p.b(static_cast<Eigen::Index>(r)) = rows[r].second;
            }
            p.E = Matrix::Zero(0, n);
            p.d = Vector::Zero(0);
            return p;
          },
          [](const Simplex& s) {
            Polyhedron p;
            p.A = Matrix::Identity(s.dimension, s.dimension);
            p.b = Vector::Zero(s.dimension);
            p.E = Matrix::Ones(1, s.dimension);
            p.d = Vector::Ones(1);
            return p;
          },
          [](const Polyhedron& p) { return p; },
          [](const StochasticDominance& s) { return dominance_halfspaces(s.rows, s.cols); },
      },
      kind_);
}

Vector project_simplex(const Vector& y) {
  const auto n = y.size();
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - t > 0.0) threshold = t;
  }
  return (y.array() - threshold).cwiseMax(0.0).matrix();
}

ProjectionResult project(const ConstraintSet& set, const Vector& theta) {
  if (theta.size() != set.dim()) throw InputError("project: dimension mismatch for " + set.name());
  return std::visit(
      Overloaded{
          [&](const Ball& b) {
            const Vector offset = theta - b.center;
            const double r = offset.norm();
            if (r <= b.radius) return finish(theta, theta);
            return finish(theta, b.center + offset * (b.radius / r));
          },
          [&](const Sphere& s) {
            const Vector offset = theta - s.center;
            const double r = offset.norm();
            if (r == 0.0) {
              // Every point of the sphere is nearest; pick center + radius * e1.
              Vector point = s.center;
              point(0) += s.radius;
              return finish(theta, std::move(point), false);
            }
            return finish(theta, s.center + offset * (s.radius / r));
          },
          [&](const Box& b) {
            return finish(theta, theta.cwiseMax(b.lower).cwiseMin(b.upper));
          },
          [&](const Simplex&) { return finish(theta, project_simplex(theta)); },
          [&](const Polyhedron& p) { return project_polyhedron(p, theta); },
          [&](const StochasticDominance& s) {
            if (set.contains(theta)) return finish(theta, theta);
            return project_polyhedron(dominance_halfspaces(s.rows, s.cols), theta);
          },
      },
      set.kind());
}

Vector dist_sq_grad(const ConstraintSet& set, const Vector& theta) {
  return theta - project(set, theta).point;
}

SubgradResult unsquared_dist_subgrad(const ConstraintSet& set, const Vector& theta) {
  const auto proj = project(set, theta);
  SubgradResult out;
  out.direction = Vector::Zero(theta.size());
  if (proj.distance == 0.0) return out;
  if (proj.distance < 1e-12) {
    out.near_boundary = true;
    return out;
  }
  out.direction = (theta - proj.point) / proj.distance;
  return out;
}

}  // namespace dset
