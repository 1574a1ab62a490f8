#include "dset/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dset/errors.hpp"

namespace dset::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One active constraint, expressed as n^T x >= rhs (equalities are stored with
// the sign that makes them violated-from-below when they were added).
struct ActiveRow {
  int index;      // stacked index: [0, me) equalities, [me, me + mi) inequalities
  bool equality;
  double sign;    // +1 or -1, applied to the stored row
  double multiplier;
};

class DualActiveSet {
 public:
  explicit DualActiveSet(const QpProblem& p) : p_(p), me_(p.num_eq()), mi_(p.num_ineq()) {}

  Vector normal(const ActiveRow& r) const {
    if (r.equality) return r.sign * p_.E.row(r.index).transpose();
    return p_.A.row(r.index - me_).transpose();
  }
  double rhs(const ActiveRow& r) const {
    if (r.equality) return r.sign * p_.d(r.index);
    return p_.b(r.index - me_);
  }

  Matrix active_normals() const {
    Matrix N(p_.dim(), static_cast<Eigen::Index>(active_.size()));
    for (std::size_t k = 0; k < active_.size(); ++k) N.col(static_cast<Eigen::Index>(k)) = normal(active_[k]);
    return N;
  }

  std::vector<int> certificate(int extra) const {
    std::vector<int> out;
    for (const auto& r : active_) out.push_back(r.index);
    out.push_back(extra);
    return out;
  }

  // Adds constraint `row` (currently violated) to the active set, dropping
  // inequality constraints whose multipliers hit zero along the way.
  void add_constraint(ActiveRow row) {
    const Vector np = normal(row);
    const double bp = rhs(row);
    double up = 0.0;
    for (;;) {
      if (++iterations_ > max_iterations_) {
        throw NonconvergenceError("qp: iteration cap of " + std::to_string(max_iterations_) +
                                  " exceeded");
      }
      const auto q = static_cast<Eigen::Index>(active_.size());
      Vector r(q);
      Vector z = np;
      if (q > 0) {
        const Matrix N = active_normals();
        r = N.householderQr().solve(np);
        z = np - N * r;
      }

      // Dual step length: first active inequality whose multiplier reaches 0.
      double t1 = kInf;
      int drop = -1;
      for (Eigen::Index k = 0; k < q; ++k) {
        const auto& a = active_[static_cast<std::size_t>(k)];
        if (a.equality || r(k) <= 0.0) continue;
        const double ratio = a.multiplier / r(k);
        if (ratio < t1) {
          t1 = ratio;
          drop = static_cast<int>(k);
        }
      }

      // Primal step length: reach the constraint boundary.
      const double curvature = z.dot(np);
      double t2 = kInf;
      if (curvature > 1e-14 * np.squaredNorm()) {
        const double slack = np.dot(x_) - bp;
        t2 = std::max(0.0, -slack / curvature);
      }

      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        // A linearly dependent equality that already holds is redundant.
        if (row.equality && std::abs(np.dot(x_) - bp) <= 1e-12 * (1.0 + std::abs(bp))) return;
        throw InfeasibleError("qp: constraints are inconsistent", certificate(row.index));
      }

      if (std::isfinite(t2)) x_ += t * z;
      for (Eigen::Index k = 0; k < q; ++k) active_[static_cast<std::size_t>(k)].multiplier -= t * r(k);
      up += t;

      if (t2 <= t1) {
        row.multiplier = up;
        active_.push_back(row);
        return;
      }
      active_.erase(active_.begin() + drop);
    }
  }

  QpSolution run(int max_iterations) {
    max_iterations_ = max_iterations;
    x_ = p_.target;

    for (int k = 0; k < me_; ++k) {
      const double s = p_.E.row(k).dot(x_) - p_.d(k);
      add_constraint(ActiveRow{k, true, s > 0.0 ? -1.0 : 1.0, 0.0});
    }

    for (;;) {
      int worst = -1;
      double worst_violation = 0.0;
      for (int i = 0; i < mi_; ++i) {
        if (is_active(me_ + i)) continue;
        const double norm = p_.A.row(i).norm();
        if (norm == 0.0) {
          if (p_.b(i) > 0.0) throw InfeasibleError("qp: zero row with positive bound", {me_ + i});
          continue;
        }
        const double s = (p_.A.row(i).dot(x_) - p_.b(i)) / norm;
        if (s < -1e-13 && s < worst_violation) {
          worst_violation = s;
          worst = i;
        }
      }
      if (worst < 0) break;
      add_constraint(ActiveRow{me_ + worst, false, 1.0, 0.0});
    }
    return finish();
  }

  bool is_active(int index) const {
    return std::any_of(active_.begin(), active_.end(), [&](const ActiveRow& r) { return r.index == index; });
  }

  QpSolution finish() const {
    QpSolution sol;
    sol.x = x_;
    sol.ineq_multipliers = Vector::Zero(mi_);
    sol.eq_multipliers = Vector::Zero(me_);
    for (const auto& r : active_) {
      if (r.equality) {
        sol.eq_multipliers(r.index) = r.sign * r.multiplier;
      } else {
        sol.active_set.push_back(r.index - me_);
        sol.ineq_multipliers(r.index - me_) = r.multiplier;
      }
    }
    sol.iterations = iterations_;
    return sol;
  }

 private:
  const QpProblem& p_;
  int me_;
  int mi_;
  Vector x_;
  std::vector<ActiveRow> active_;
  int iterations_ = 0;
  int max_iterations_ = 0;
};

// Solves the projection with every row in `ineq_active` (and all equalities)
// held at equality. Returns nothing if the working set is rank deficient.
std::optional<QpSolution> solve_on_working_set(const QpProblem& p, const std::vector<int>& ineq_active) {
  const int me = p.num_eq();
  const auto q = static_cast<Eigen::Index>(me + static_cast<int>(ineq_active.size()));
  QpSolution sol;
  if (q == 0) {
    sol.x = p.target;
  } else {
    Matrix N(p.dim(), q);
    Vector rhs(q);
    for (int k = 0; k < me; ++k) {
      N.col(k) = p.E.row(k).transpose();
      rhs(k) = p.d(k);
    }
    for (std::size_t k = 0; k < ineq_active.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(me + static_cast<int>(k));
      N.col(col) = p.A.row(ineq_active[k]).transpose();
      rhs(col) = p.b(ineq_active[k]);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(N);
    if (qr.rank() < q) return std::nullopt;
    // x = y + N u with N^T x = rhs  =>  (N^T N) u = rhs - N^T y
    const Matrix gram = N.transpose() * N;
    const Vector u = gram.ldlt().solve(rhs - N.transpose() * p.target);
    sol.x = p.target + N * u;
    sol.eq_multipliers = u.head(me);
    sol.ineq_multipliers = Vector::Zero(p.num_ineq());
    for (std::size_t k = 0; k < ineq_active.size(); ++k) {
      sol.ineq_multipliers(ineq_active[k]) = u(me + static_cast<Eigen::Index>(k));
    }
    sol.active_set = ineq_active;
  }
  if (sol.eq_multipliers.size() == 0) sol.eq_multipliers = Vector::Zero(me);
  if (sol.ineq_multipliers.size() == 0) sol.ineq_multipliers = Vector::Zero(p.num_ineq());
  return sol;
}

bool satisfies_kkt(const QpProblem& p, const QpSolution& s) {
  const auto r = kkt_residuals(p, s);
  return r.primal <= 1e-11 && r.dual <= 1e-12 && r.stationarity <= 1e-10;
}

void validate(const QpProblem& p) {
  const auto n = p.target.size();
  if (p.A.rows() > 0 && p.A.cols() != n) throw InputError("qp: A has wrong column count");
  if (p.E.rows() > 0 && p.E.cols() != n) throw InputError("qp: E has wrong column count");
  if (p.A.rows() != p.b.size()) throw InputError("qp: A and b disagree in rows");
  if (p.E.rows() != p.d.size()) throw InputError("qp: E and d disagree in rows");
}

}  // namespace

QpSolution solve(const QpProblem& problem, const SolveOptions& options) {
  validate(problem);
  if (options.warm_start != nullptr) {
    if (auto s = solve_on_working_set(problem, *options.warm_start); s && satisfies_kkt(problem, *s)) {
      return *s;
    }
  }
  const int cap = options.max_iterations.value_or(50 * (problem.num_ineq() + problem.num_eq() + problem.dim()));
  DualActiveSet solver(problem);
  QpSolution sol = solver.run(cap);
  // Polish on the final working set: restores exact stationarity lost to
  // accumulated step updates.
  if (auto polished = solve_on_working_set(problem, sol.active_set); polished) {
    const auto before = kkt_residuals(problem, sol);
    const auto after = kkt_residuals(problem, *polished);
    if (after.primal <= std::max(before.primal, 1e-12) && after.dual <= std::max(before.dual, 1e-12)) {
      polished->iterations = sol.iterations;
      return *polished;
    }
  }
  return sol;
}

bool check_feasible(const QpProblem& problem) {
  QpProblem phase_one = problem;
  phase_one.target = Vector::Zero(problem.dim());
  try {
    solve(phase_one);
    return true;
  } catch (const InfeasibleError&) {
    return false;
  }
}

KktResiduals kkt_residuals(const QpProblem& p, const QpSolution& s) {
  KktResiduals r;
  Vector station = s.x - p.target;
  if (p.num_ineq() > 0) station -= p.A.transpose() * s.ineq_multipliers;
  if (p.num_eq() > 0) station -= p.E.transpose() * s.eq_multipliers;
  r.stationarity = station.lpNorm<Eigen::Infinity>();
  for (int i = 0; i < p.num_ineq(); ++i) {
    const double slack = p.A.row(i).dot(s.x) - p.b(i);
    r.primal = std::max(r.primal, -slack);
    r.dual = std::max(r.dual, -s.ineq_multipliers(i));
    r.complementarity = std::max(r.complementarity, std::abs(s.ineq_multipliers(i) * slack));
  }
  for (int k = 0; k < p.num_eq(); ++k) {
    r.primal = std::max(r.primal, std::abs(p.E.row(k).dot(s.x) - p.d(k)));
  }
  return r;
}

}  // namespace dset::qp
