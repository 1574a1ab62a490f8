#pragma once

#include <variant>

#include "dset/posterior.hpp"

namespace dset {

/// y | beta ~ N(X beta, sigma2 I) with a flat prior on beta.
struct GaussianLinearSpec {
  Matrix X;
  Vector y;
  double sigma2 = 1.0;
};

/// Multivariate Student-t kernel centred at F:
///   logp = -((m + p) / 2) log(1 + ||F - theta||^2 / (m sigma2)),  p = dim - 1.
struct StudentTLocationSpec {
  Vector F;
  double dof = 3.0;
  double sigma2 = 1.0;
};

/// Independent multinomial rows with Dirichlet priors, in the reduced
/// parameterisation over the first J - 1 columns of each row (row-major).
struct MultinomialDirichletTableSpec {
  Eigen::MatrixXi counts;
  Matrix alpha;
};

using ModelSpec = std::variant<GaussianLinearSpec, StudentTLocationSpec, MultinomialDirichletTableSpec>;

LogTargetPtr build_model(const ModelSpec& spec);

class GaussianLinear final : public LogTarget {
 public:
  explicit GaussianLinear(GaussianLinearSpec spec);
  int dim() const override { return static_cast<int>(spec_.X.cols()); }
  std::string name() const override { return "gaussian_linear"; }
  double logp(const Vector& beta) const override;
  Vector grad(const Vector& beta) const override;
  Matrix hessian(const Vector& beta) const override;

  const GaussianLinearSpec& spec() const { return spec_; }
  /// X'X / sigma2 and X'y / sigma2, the pieces of the closed-form prox.
  const Matrix& precision() const { return precision_; }
  const Vector& linear_term() const { return linear_; }

 private:
  GaussianLinearSpec spec_;
  Matrix precision_;
  Vector linear_;
};

class StudentTLocation final : public LogTarget {
 public:
  explicit StudentTLocation(StudentTLocationSpec spec);
  int dim() const override { return static_cast<int>(spec_.F.size()); }
  std::string name() const override { return "student_t_location"; }
  double logp(const Vector& theta) const override;
  Vector grad(const Vector& theta) const override;
  Matrix hessian(const Vector& theta) const override;

 private:
  StudentTLocationSpec spec_;
  double exponent_;  // (m + p) / 2
  double scale_;     // m sigma2
};

class MultinomialDirichletTable final : public LogTarget {
 public:
  explicit MultinomialDirichletTable(MultinomialDirichletTableSpec spec);
  int dim() const override { return rows_ * (cols_ - 1); }
  std::string name() const override { return "multinomial_dirichlet_table"; }
  /// Every reduced entry positive and every reduced row sum below one.
  bool in_support(const Vector& theta) const override;
  double logp(const Vector& theta) const override;
  Vector grad(const Vector& theta) const override;
  Matrix hessian(const Vector& theta) const override;
  /// Independent Dirichlet(alpha) rows, reduced.
  Vector initial_point(std::mt19937_64& rng) const override;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  /// Restores the dropped last column: rows x cols, each row summing to one.
  Matrix full_table(const Vector& reduced) const;

 private:
  int rows_;
  int cols_;
  Matrix shape_;  // n_ij + alpha_ij - 1
  Matrix alpha_;
};

}  // namespace dset
