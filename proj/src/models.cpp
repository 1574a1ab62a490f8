#include "dset/models.hpp"

#include <cmath>
#include <limits>

#include "dset/errors.hpp"

namespace dset {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Matrix LogTarget::hessian(const Vector& theta) const {
  const int n = dim();
  Matrix H(n, n);
  for (int k = 0; k < n; ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta(k)));
    Vector plus = theta;
    Vector minus = theta;
    plus(k) += h;
    minus(k) -= h;
    H.col(k) = (grad(plus) - grad(minus)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

Vector LogTarget::initial_point(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal;
  Vector out(dim());
  for (int k = 0; k < dim(); ++k) out(k) = normal(rng);
  return out;
}

// ---------------------------------------------------------------------------

GaussianLinear::GaussianLinear(GaussianLinearSpec spec) : spec_(std::move(spec)) {
  if (spec_.X.rows() < 1 || spec_.X.cols() < 1) throw InputError("gaussian_linear: X must be non-empty");
  if (spec_.X.rows() != spec_.y.size()) throw InputError("gaussian_linear: X rows must match y length");
  if (!(spec_.sigma2 > 0.0)) throw InputError("gaussian_linear: sigma2 must be positive");
  precision_ = spec_.X.transpose() * spec_.X / spec_.sigma2;
  linear_ = spec_.X.transpose() * spec_.y / spec_.sigma2;
}

double GaussianLinear::logp(const Vector& beta) const {
  return -(spec_.y - spec_.X * beta).squaredNorm() / (2.0 * spec_.sigma2);
}

Vector GaussianLinear::grad(const Vector& beta) const { return linear_ - precision_ * beta; }

Matrix GaussianLinear::hessian(const Vector&) const { return -precision_; }

// ---------------------------------------------------------------------------

StudentTLocation::StudentTLocation(StudentTLocationSpec spec) : spec_(std::move(spec)) {
  if (spec_.F.size() < 1) throw InputError("student_t_location: F must be non-empty");
  if (!(spec_.dof > 0.0)) throw InputError("student_t_location: degrees of freedom must be positive");
  if (!(spec_.sigma2 > 0.0)) throw InputError("student_t_location: sigma2 must be positive");
  const double p = static_cast<double>(spec_.F.size()) - 1.0;
  exponent_ = 0.5 * (spec_.dof + p);
  scale_ = spec_.dof * spec_.sigma2;
}

double StudentTLocation::logp(const Vector& theta) const {
  return -exponent_ * std::log1p((spec_.F - theta).squaredNorm() / scale_);
}

Vector StudentTLocation::grad(const Vector& theta) const {
  const Vector diff = theta - spec_.F;
  return (-2.0 * exponent_ / (scale_ + diff.squaredNorm())) * diff;
}

Matrix StudentTLocation::hessian(const Vector& theta) const {
  const Vector diff = theta - spec_.F;
  const double denom = scale_ + diff.squaredNorm();
  const auto n = diff.size();
  return (-2.0 * exponent_ / denom) * Matrix::Identity(n, n) +
         (4.0 * exponent_ / (denom * denom)) * diff * diff.transpose();
}

// ---------------------------------------------------------------------------

MultinomialDirichletTable::MultinomialDirichletTable(MultinomialDirichletTableSpec spec)
    : rows_(static_cast<int>(spec.counts.rows())), cols_(static_cast<int>(spec.counts.cols())) {
  if (rows_ < 1 || cols_ < 2) throw InputError("multinomial_dirichlet_table: need at least 1 row and 2 columns");
  if (spec.alpha.rows() != rows_ || spec.alpha.cols() != cols_) {
    throw InputError("multinomial_dirichlet_table: alpha must match the counts shape");
  }
  if ((spec.counts.array() < 0).any()) throw InputError("multinomial_dirichlet_table: counts must be nonnegative");
  if (!(spec.alpha.array() > 0.0).all()) throw InputError("multinomial_dirichlet_table: alpha must be positive");
  shape_ = spec.counts.cast<double>() + spec.alpha - Matrix::Ones(rows_, cols_);
  alpha_ = spec.alpha;
}

bool MultinomialDirichletTable::in_support(const Vector& theta) const {
  if (theta.size() != dim() || !theta.allFinite()) return false;
  const int m = cols_ - 1;
  for (int i = 0; i < rows_; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < m; ++j) {
      const double v = theta(i * m + j);
      if (!(v > 0.0)) return false;
      row_sum += v;
    }
    if (!(row_sum < 1.0)) return false;
  }
  return true;
}

double MultinomialDirichletTable::logp(const Vector& theta) const {
  if (!in_support(theta)) return kNegInf;
  const int m = cols_ - 1;
  double total = 0.0;
  for (int i = 0; i < rows_; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < m; ++j) {
      const double v = theta(i * m + j);
      total += shape_(i, j) * std::log(v);
      row_sum += v;
    }
    total += shape_(i, m) * std::log1p(-row_sum);
  }
  return total;
}

Vector MultinomialDirichletTable::grad(const Vector& theta) const {
  const int m = cols_ - 1;
  Vector g(dim());
  for (int i = 0; i < rows_; ++i) {
    const double last = 1.0 - theta.segment(i * m, m).sum();
    const double pull = shape_(i, m) / last;
    for (int j = 0; j < m; ++j) g(i * m + j) = shape_(i, j) / theta(i * m + j) - pull;
  }
  return g;
}

Matrix MultinomialDirichletTable::hessian(const Vector& theta) const {
  const int m = cols_ - 1;
  Matrix H = Matrix::Zero(dim(), dim());
  for (int i = 0; i < rows_; ++i) {
    const double last = 1.0 - theta.segment(i * m, m).sum();
    H.block(i * m, i * m, m, m).setConstant(-shape_(i, m) / (last * last));
    for (int j = 0; j < m; ++j) {
      const double v = theta(i * m + j);
      H(i * m + j, i * m + j) -= shape_(i, j) / (v * v);
    }
  }
  return H;
}

Vector MultinomialDirichletTable::initial_point(std::mt19937_64& rng) const {
  const int m = cols_ - 1;
  Vector out(dim());
  for (int i = 0; i < rows_; ++i) {
    Vector draws(cols_);
    for (int j = 0; j < cols_; ++j) {
      std::gamma_distribution<double> gamma(alpha_(i, j), 1.0);
      draws(j) = gamma(rng);
    }
    draws /= draws.sum();
    out.segment(i * m, m) = draws.head(m);
  }
  return out;
}

Matrix MultinomialDirichletTable::full_table(const Vector& reduced) const {
  const int m = cols_ - 1;
  Matrix table(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < m; ++j) table(i, j) = reduced(i * m + j);
    table(i, m) = 1.0 - reduced.segment(i * m, m).sum();
  }
  return table;
}

// ---------------------------------------------------------------------------

LogTargetPtr build_model(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> LogTargetPtr {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianLinearSpec>) return std::make_shared<GaussianLinear>(s);
        if constexpr (std::is_same_v<T, StudentTLocationSpec>) return std::make_shared<StudentTLocation>(s);
        if constexpr (std::is_same_v<T, MultinomialDirichletTableSpec>) {
          return std::make_shared<MultinomialDirichletTable>(s);
        }
      },
      spec);
}

}  // namespace dset
