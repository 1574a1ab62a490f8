// dset-infer: run experiments, MAP estimation, calibration and oracle checks
// from a config file.

#include <CLI11.hpp>
#include <cmath>
#include <fmt/format.h>
#include <iostream>

#include "dset/diagnostics.hpp"
#include "dset/experiment.hpp"

using namespace dset;

namespace {

int fail(const std::exception& e) {
  std::cerr << "dset-infer: error " << e.what() << "\n";
  return experiment::exit_code_for(e);
}

config::ExperimentConfig load(const std::string& path) {
  try {
    return config::load_config(path);
  } catch (const experiment::StageError&) {
    throw;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (msg.rfind("config: ", 0) == 0) msg.erase(0, 8);
    throw experiment::StageError("config", msg, experiment::exit_code_for(e));
  }
}

int cmd_run(const std::string& path) {
  const auto config = load(path);
  const auto report = experiment::run(config);
  if (report.calibration) {
    fmt::print("calibrated rho = {:.6g} (moment {:.6g} +/- {:.2g})\n", report.calibration->lambda,
               report.calibration->achieved_moment, report.calibration->mc_std_error);
  }
  std::cout << experiment::summary_table(report.runs);
  if (report.table) std::cout << "\n" << experiment::table_quantiles_text(*report.table);
  fmt::print("wrote {} files to {} in {:.1f} s\n", report.files.size(), report.output_dir.string(),
             report.wall_seconds);
  return 0;
}

int cmd_map(const std::string& path) {
  const auto config = load(path);
  const auto report = experiment::map(config);
  for (std::size_t k = 0; k < report.result.rhos.size(); ++k) {
    std::string row = fmt::format("rho = {:<10g}", report.result.rhos[k]);
    for (Eigen::Index i = 0; i < report.result.solutions[k].size(); ++i) {
      row += fmt::format(" {:>12.8f}", report.result.solutions[k](i));
    }
    std::cout << row << "\n";
  }
  fmt::print("trace: {}\n", report.trace_file.string());
  return 0;
}

int cmd_calibrate(const std::string& path) {
  const auto config = load(path);
  const auto report = experiment::calibrate(config);
  const auto& s = report.solution;
  fmt::print("budget D = {:.6g}\nlambda = rho = {:.6g}\nachieved moment = {:.6g} (SE {:.2g}, weight ESS {:.1f}, {} stage{})\n",
             report.budget, s.lambda, s.achieved_moment, s.mc_std_error, s.ess_of_weights, s.stages,
             s.stages == 1 ? "" : "s");
  fmt::print("report: {}\n", report.file.string());
  return 0;
}

bool line(bool ok, const std::string& what) {
  fmt::print("{} {}\n", ok ? "PASS" : "FAIL", what);
  return ok;
}

int cmd_check() {
  bool ok = true;
  const auto normal1 = build_model(GaussianLinearSpec{Matrix::Ones(1, 1), Vector::Ones(1), 1.0});

  {
    const std::vector<double> rhos{1, 10, 100, 1000, 1e4};
    const auto r = diag::theorem1_check(normal1, ConstraintSet::halfline_upper(0.0), rhos, 1, {-8, 0}, {8, 0},
                                        {100000, 1}, 2.0 / rhos.back());
    double worst = 0.0;
    for (std::size_t k = 0; k < rhos.size(); ++k) worst = std::max(worst, std::abs(r.errors[k] - 1.0 / (1.0 + rhos[k])));
    ok &= line(worst <= 1e-8 && r.monotone && r.converged,
               fmt::format("MAP convergence: N(1,1) on (-inf,0], |error - 1/(1+rho)| <= {:.1e}, final error {:.2e}",
                           worst, r.errors.back()));
  }
  {
    const auto r = diag::theorem2_check(normal1, ConstraintSet(Box{Vector::Constant(1, -1.0), Vector::Ones(1)}),
                                        {1, 10, 100, 1000}, 1, {-8, 0}, {8, 0}, {100000, 1});
    std::string tv;
    for (double v : r.tv) tv += fmt::format(" {:.4g}", v);
    ok &= line(r.strictly_decreasing, "TV convergence: N(1,1) on [-1,1], TV at rho = 1, 10, 100, 1000:" + tv);
  }
  {
    const double s3 = 1.0 / std::sqrt(3.0);
    Eigen::MatrixXi counts(2, 3);
    counts << 12, 7, 5, 4, 9, 11;
    struct Case {
      std::string name;
      LogTargetPtr base;
      ConstraintSet set;
      Vector center;
      double scale;
    };
    const Matrix X = (Matrix(4, 3) << 1, 0.2, -0.3, 0.5, 1, 0.1, -0.4, 0.3, 1, 0.2, 0.2, 0.2).finished();
    const std::vector<Case> cases{
        {"gaussian_linear", build_model(GaussianLinearSpec{X, Vector::Ones(4), 0.5}), ConstraintSet(Ball{Vector::Zero(3), 1.0}),
         Vector::Zero(3), 1.0},
        {"student_t_location", build_model(StudentTLocationSpec{Vector::Constant(3, s3), 3.0, 0.1}),
         ConstraintSet(Sphere{Vector::Zero(3), 1.0}), Vector::Constant(3, s3), 0.5},
        {"multinomial_dirichlet_table", build_model(MultinomialDirichletTableSpec{counts, Matrix::Ones(2, 3)}),
         ConstraintSet(StochasticDominance{2, 2}), Vector::Constant(4, 0.3), 0.15},
    };
    for (const auto& c : cases) {
      for (double rho : {1e3, 1e6}) {
        const RelaxedPosterior sq(c.base, c.set, SquaredDistance{rho});
        const auto a = diag::gradient_check(sq, c.center, c.scale, 100, 11);
        ok &= line(a.max_relative_error < 1e-5,
                   fmt::format("gradient {} squared rho={:g}: max relative error {:.2e}", c.name, rho,
                               a.max_relative_error));
        const auto unit = ConstraintSet(Sphere{Vector::Zero(c.base->dim()), 1.0});
        const RelaxedPosterior ls(c.base, unit, LevelSetSphere{rho});
        const auto b = diag::gradient_check(ls, c.center, c.scale, 100, 12);
        ok &= line(b.max_relative_error < 1e-5,
                   fmt::format("gradient {} level_set rho={:g}: max relative error {:.2e}", c.name, rho,
                               b.max_relative_error));
      }
    }
  }
  return ok ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian inference under set constraints with distance-to-set priors"};
  app.require_subcommand(1);
  std::string path;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", path, "config file")->required();
  auto* map = app.add_subcommand("map", "proximal distance MAP over the rho schedule; writes map_trace.csv");
  map->add_option("config", path, "config file")->required();
  auto* cal = app.add_subcommand("calibrate", "choose rho from the expected distance budget");
  cal->add_option("config", path, "config file")->required();
  auto* check = app.add_subcommand("check", "MAP and TV convergence oracles and gradient checks");
  (void)check;
  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(path);
    if (map->parsed()) return cmd_map(path);
    if (cal->parsed()) return cmd_calibrate(path);
    return cmd_check();
  } catch (const std::exception& e) {
    return fail(e);
  }
}
