#include "dset/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>

#include "dset/svg.hpp"

#ifndef DSET_VERSION
#define DSET_VERSION "0.0.0"
#endif

namespace dset::experiment {

namespace fs = std::filesystem;
using config::ExperimentConfig;
using config::ExperimentKind;

int exit_code_for(const std::exception& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
  if (dynamic_cast<const InputError*>(&e)) return 2;
  if (dynamic_cast<const CalibrationError*>(&e)) return 3;
  if (dynamic_cast<const InitializationError*>(&e) || dynamic_cast<const NonconvergenceError*>(&e) ||
      dynamic_cast<const MmViolationError*>(&e) || dynamic_cast<const InfeasibleError*>(&e)) {
    return 4;
  }
  return 1;
}

namespace {

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), exit_code_for(e));
  }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

void write_file(const fs::path& path, const std::string& text, std::vector<std::string>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  files.push_back(path.filename().string());
}

std::string rho_tag(double rho) { return fmt::format("{:g}", rho); }

struct Problem {
  LogTargetPtr base;
  ConstraintSet set;
};

Problem build_problem(const ExperimentConfig& c) {
  return stage("model", [&] {
    auto base = build_model(config::model_spec(c));
    auto set = config::constraint_set(c, base->dim());
    return Problem{base, set};
  });
}

std::vector<std::string> run_flavors(const ExperimentConfig& c) {
  std::vector<std::string> out{c.penalty.flavor};
  for (const auto& f : c.penalty.compare) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

FlavorRun sample_flavor(const ExperimentConfig& c, const Problem& p, const std::string& flavor, double rho,
                        const fs::path& dir, std::vector<std::string>& files) {
  FlavorRun run;
  run.flavor = flavor;
  run.rho = rho;
  const RelaxedPosterior post = stage("model", [&] { return RelaxedPosterior(p.base, p.set, config::make_flavor(flavor, rho)); });
  run.chains = stage("sampling", [&] { return hmc::sample_chains(post, c.hmc_config()); });
  run.summary = stage("diagnostics", [&] { return diag::summarize(run.chains); });
  run.chain_file = flavor == "sharp" ? "chains_sharp.csv" : fmt::format("chains_{}_rho{}.csv", flavor, rho_tag(rho));
  stage("output", [&] { write_file(dir / run.chain_file, chains_csv(run.chains), files); });
  return run;
}

std::vector<std::vector<double>> coordinate_chains(const std::vector<hmc::SampleChain>& chains, int k) {
  std::vector<std::vector<double>> out;
  for (const auto& ch : chains) out.push_back(ch.coordinate(k));
  return out;
}

void standard_plots(const FlavorRun& run, const std::string& coord_name, int k, const fs::path& dir,
                    std::vector<std::string>& files) {
  const std::string tag = run.flavor == "sharp" ? "sharp" : fmt::format("{}_rho{}", run.flavor, rho_tag(run.rho));
  write_file(dir / fmt::format("trace_{}.svg", tag),
             svg::trace_plot(coordinate_chains(run.chains, k), fmt::format("{} trace ({}, rho = {:g})", coord_name,
                                                                          run.flavor, run.rho),
                             coord_name),
             files);
  write_file(dir / fmt::format("acf_{}.svg", tag),
             svg::acf_plot(run.summary.coords[static_cast<std::size_t>(k)].acf,
                           fmt::format("{} autocorrelation ({}, rho = {:g})", coord_name, run.flavor, run.rho)),
             files);
}

std::vector<std::array<double, 2>> first_two(const std::vector<hmc::SampleChain>& chains) {
  std::vector<std::array<double, 2>> out;
  for (const auto& c : chains) {
    for (const auto& d : c.draws) out.push_back({d(0), d(1)});
  }
  return out;
}

std::optional<svg::Circle> circle_of(const ConstraintSet& set) {
  if (const auto* b = std::get_if<Ball>(&set.kind())) return svg::Circle{b->center(0), b->center(1), b->radius};
  if (const auto* s = std::get_if<Sphere>(&set.kind())) return svg::Circle{s->center(0), s->center(1), s->radius};
  return std::nullopt;
}

nlohmann::json solution_json(const tilting::TiltingSolution& s, double budget) {
  return {{"budget", budget},
          {"lambda", s.lambda},
          {"rho", s.lambda},
          {"achieved_moment", s.achieved_moment},
          {"mc_std_error", s.mc_std_error},
          {"ess_of_weights", s.ess_of_weights},
          {"unconstrained_moment", s.unconstrained_moment},
          {"stages", s.stages},
          {"bisection_steps", s.bisection_steps}};
}

std::string solution_text(const tilting::TiltingSolution& s, double budget) {
  std::string out = "calibration\n";
  out += fmt::format("  budget D               {:.6g}\n", budget);
  out += fmt::format("  lambda (= rho)         {:.6g}\n", s.lambda);
  out += fmt::format("  achieved moment        {:.6g}\n", s.achieved_moment);
  out += fmt::format("  MC standard error      {:.3g}\n", s.mc_std_error);
  out += fmt::format("  weight ESS             {:.1f}\n", s.ess_of_weights);
  out += fmt::format("  unconstrained moment   {:.6g}\n", s.unconstrained_moment);
  out += fmt::format("  stages                 {}\n", s.stages);
  return out;
}

void write_metadata(const ExperimentConfig& c, const ExperimentReport& r, std::optional<double> budget,
                    const fs::path& dir, std::vector<std::string>& files) {
  nlohmann::json meta;
  meta["experiment"] = config::to_string(c.experiment);
  meta["seed"] = c.seed;
  meta["version"] = DSET_VERSION;
  meta["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  meta["compiler"] = __VERSION__;
  meta["wall_seconds"] = r.wall_seconds;
  meta["runs"] = nlohmann::json::array();
  for (const auto& run : r.runs) {
    meta["runs"].push_back({{"flavor", run.flavor},
                            {"rho", run.rho},
                            {"chains", run.summary.num_chains},
                            {"draws_per_chain", run.summary.num_draws},
                            {"acceptance_rate", run.summary.acceptance_rate},
                            {"divergences", run.summary.divergences},
                            {"chain_file", run.chain_file}});
  }
  if (r.calibration && budget) meta["calibration"] = solution_json(*r.calibration, *budget);
  if (r.ridge) {
    meta["ridge"] = {{"mean_dist_sq", r.ridge->mean_dist_sq},
                     {"fraction_within_0.1", r.ridge->fraction_within},
                     {"mode_to_map", r.ridge->mode_to_map}};
  }
  write_file(dir / "metadata.json", meta.dump(2) + "\n", files);
}

std::string interval_table(const FlavorRun& run, const std::vector<std::string>& names) {
  std::string out = fmt::format("{} prior, rho = {:g}: 95% equi-tailed credible intervals\n", run.flavor, run.rho);
  out += fmt::format("  {:<10}{:>12}{:>12}{:>12}{:>12}\n", "param", "mean", "2.5%", "97.5%", "ESS");
  for (std::size_t k = 0; k < run.summary.coords.size(); ++k) {
    const auto& s = run.summary.coords[k];
    out += fmt::format("  {:<10}{:>12.4f}{:>12.4f}{:>12.4f}{:>12.1f}\n", names[k], s.mean, s.q025, s.q975, s.ess);
  }
  return out;
}

// ---------------------------------------------------------------------------

void run_ridge(const ExperimentConfig& c, const Problem& p, const fs::path& dir, ExperimentReport& r) {
  const double rho = c.rho_values().front();
  for (const auto& f : run_flavors(c)) r.runs.push_back(sample_flavor(c, p, f, rho, dir, r.files));

  const RelaxedPosterior post(p.base, p.set, SquaredDistance{rho});
  const Vector map = stage("map", [&] {
    prox::MmOptions opts;
    opts.tol = c.map.tol;
    opts.max_iterations = c.map.max_iterations;
    opts.record_trace = false;
    return prox::map_fixed_rho(post, Vector::Zero(p.base->dim()), opts).theta;
  });
  const auto& primary = r.runs.front();
  r.ridge = ridge_metrics(post, primary.chains, map);

  stage("output", [&] {
    std::vector<std::string> names;
    for (int k = 0; k < p.base->dim(); ++k) names.push_back(fmt::format("beta{}", k + 1));
    std::string text;
    std::vector<svg::Interval> ladder;
    for (const auto& run : r.runs) {
      text += interval_table(run, names) + "\n";
      for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& s = run.summary.coords[k];
        ladder.push_back({fmt::format("{} ({})", names[k], run.flavor), s.q025, s.q50, s.q975});
      }
    }
    text += fmt::format("proximal distance MAP (rho = {:g}):", rho);
    for (Eigen::Index k = 0; k < map.size(); ++k) text += fmt::format(" {:.6f}", map(k));
    text += fmt::format("\nhighest-density draw:");
    for (Eigen::Index k = 0; k < map.size(); ++k) text += fmt::format(" {:.6f}", r.ridge->mode(k));
    text += fmt::format("\nmode to MAP distance: {:.6f}\n", r.ridge->mode_to_map);
    text += fmt::format("mean dist^2: {:.6g}   (10 / rho = {:.6g})\n", r.ridge->mean_dist_sq, 10.0 / rho);
    text += fmt::format("fraction of draws with dist <= 0.1: {:.4f}\n", r.ridge->fraction_within);
    write_file(dir / "intervals.txt", text, r.files);
    write_file(dir / "intervals.svg", svg::interval_ladder(ladder, "95% credible intervals"), r.files);
    if (p.base->dim() >= 2) {
      write_file(dir / "scatter.svg",
                 svg::scatter_plot(first_two(primary.chains), fmt::format("posterior draws ({}, rho = {:g})",
                                                                          primary.flavor, rho),
                                   "beta1", "beta2", circle_of(p.set)),
                 r.files);
    }
    for (const auto& run : r.runs) standard_plots(run, "beta1", 0, dir, r.files);
  });
}

void run_vmf(const ExperimentConfig& c, const Problem& p, const fs::path& dir, ExperimentReport& r) {
  for (double rho : c.rho_values()) {
    for (const auto& f : run_flavors(c)) r.runs.push_back(sample_flavor(c, p, f, rho, dir, r.files));
  }
  stage("output", [&] {
    for (const auto& run : r.runs) {
      standard_plots(run, "theta1", 0, dir, r.files);
      if (p.base->dim() >= 2) {
        write_file(dir / fmt::format("scatter_{}_rho{}.svg", run.flavor, rho_tag(run.rho)),
                   svg::scatter_plot(first_two(run.chains),
                                     fmt::format("theta1 vs theta2 ({}, rho = {:g})", run.flavor, run.rho), "theta1",
                                     "theta2", circle_of(p.set)),
                   r.files);
      }
    }
  });
}

void run_table(const ExperimentConfig& c, const Problem& p, const fs::path& dir, ExperimentReport& r) {
  const auto& model = dynamic_cast<const MultinomialDirichletTable&>(*p.base);
  for (double rho : c.rho_values()) {
    for (const auto& f : run_flavors(c)) r.runs.push_back(sample_flavor(c, p, f, rho, dir, r.files));
  }
  const auto& primary = r.runs.front();
  r.table = table_quantiles(model, primary.chains);
  stage("output", [&] {
    write_file(dir / "quantiles.txt", table_quantiles_text(*r.table), r.files);
    std::vector<svg::Interval> ladder;
    for (Eigen::Index i = 0; i < r.table->q50.rows(); ++i) {
      for (Eigen::Index j = 0; j + 1 < r.table->q50.cols(); ++j) {
        ladder.push_back({fmt::format("F{}{}", i + 1, j + 1), r.table->q025(i, j), r.table->q50(i, j),
                          r.table->q975(i, j)});
      }
    }
    write_file(dir / "cumulative_intervals.svg", svg::interval_ladder(ladder, "cumulative sums, 95% intervals"),
               r.files);
    standard_plots(primary, "theta11", 0, dir, r.files);
  });
}

void run_custom(const ExperimentConfig& c, const Problem& p, const fs::path& dir, ExperimentReport& r) {
  const auto rhos = c.rho_values();
  for (double rho : rhos.empty() ? std::vector<double>{0.0} : rhos) {
    for (const auto& f : run_flavors(c)) r.runs.push_back(sample_flavor(c, p, f, rho, dir, r.files));
  }
  stage("output", [&] {
    for (const auto& run : r.runs) standard_plots(run, "theta1", 0, dir, r.files);
    if (p.base->dim() == 2) {
      write_file(dir / "scatter.svg",
                 svg::scatter_plot(first_two(r.runs.front().chains), "posterior draws", "theta1", "theta2",
                                   circle_of(p.set)),
                 r.files);
    }
  });
}

ExperimentReport run_with_rho(const ExperimentConfig& c, std::optional<tilting::TiltingSolution> calibration,
                              std::optional<double> budget) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  r.calibration = calibration;
  r.output_dir = resolve_output_dir(c);
  stage("output", [&] { fs::create_directories(r.output_dir); });
  const Problem p = build_problem(c);
  switch (c.experiment) {
    case ExperimentKind::RidgeBall: run_ridge(c, p, r.output_dir, r); break;
    case ExperimentKind::RobustVmf: run_vmf(c, p, r.output_dir, r); break;
    case ExperimentKind::ContingencyTable: run_table(c, p, r.output_dir, r); break;
    case ExperimentKind::Custom: run_custom(c, p, r.output_dir, r); break;
  }
  stage("output", [&] {
    write_file(r.output_dir / "summary.csv", summary_csv(r.runs), r.files);
    std::string table = summary_table(r.runs);
    if (calibration && budget) table = solution_text(*calibration, *budget) + "\n" + table;
    write_file(r.output_dir / "summary.txt", table, r.files);
    if (calibration && budget) {
      write_file(r.output_dir / "calibration.txt", solution_text(*calibration, *budget), r.files);
      write_file(r.output_dir / "calibration.json", solution_json(*calibration, *budget).dump(2) + "\n", r.files);
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_metadata(c, r, budget, r.output_dir, r.files);
  });
  return r;
}

tilting::TiltingSolution calibrate_problem(const ExperimentConfig& c, const Problem& p) {
  return stage("calibration", [&] {
    int round = 0;
    const auto sampler = [&](double lambda) {
      auto h = c.hmc_config();
      h.seed = c.seed + static_cast<std::uint64_t>(1000 * ++round);
      const RelaxedPosterior post = lambda == 0.0
                                        ? RelaxedPosterior(p.base, ConstraintSet::whole_space(p.base->dim()),
                                                           SquaredDistance{1.0})
                                        : RelaxedPosterior(p.base, p.set, SquaredDistance{lambda});
      return hmc::sample_chains(post, h);
    };
    return tilting::calibrate_staged(p.base, p.set, *c.penalty.budget, sampler, c.calibration.max_stages);
  });
}

}  // namespace

fs::path resolve_output_dir(const ExperimentConfig& c) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(c.output_dir);
}

ExperimentReport run(const ExperimentConfig& c) {
  stage("config", [&] { config::validate(c); });
  if (c.calibration_mode()) return calibrate_then_run(c);
  return run_with_rho(c, std::nullopt, std::nullopt);
}

ExperimentReport calibrate_then_run(const ExperimentConfig& c) {
  stage("config", [&] {
    config::validate(c);
    if (!c.calibration_mode()) throw InputError("calibrate_then_run needs penalty.budget");
  });
  const Problem p = build_problem(c);
  const auto solution = calibrate_problem(c, p);
  ExperimentConfig tuned = c;
  tuned.penalty.budget.reset();
  tuned.penalty.rho_grid.clear();
  tuned.penalty.rho = solution.lambda;
  auto report = run_with_rho(tuned, solution, c.penalty.budget);
  return report;
}

CalibrationReport calibrate(const ExperimentConfig& c) {
  stage("config", [&] {
    config::validate(c);
    if (!c.calibration_mode()) throw InputError("calibrate needs penalty.budget");
  });
  const Problem p = build_problem(c);
  CalibrationReport out;
  out.budget = *c.penalty.budget;
  out.solution = calibrate_problem(c, p);
  const auto dir = resolve_output_dir(c);
  stage("output", [&] {
    fs::create_directories(dir);
    std::vector<std::string> files;
    write_file(dir / "calibration.txt", solution_text(out.solution, out.budget), files);
    write_file(dir / "calibration.json", solution_json(out.solution, out.budget).dump(2) + "\n", files);
  });
  out.file = dir / "calibration.txt";
  return out;
}

MapReport map(const ExperimentConfig& c) {
  stage("config", [&] {
    config::validate(c);
    if (c.penalty.flavor != "squared") throw InputError("map needs the squared flavor");
  });
  const Problem p = build_problem(c);
  std::vector<double> schedule = c.map.rho_schedule;
  if (schedule.empty()) schedule = c.rho_values();
  if (schedule.empty()) schedule = prox::default_rho_schedule();
  MapReport out;
  out.result = stage("map", [&] {
    const RelaxedPosterior post(p.base, p.set, SquaredDistance{schedule.front()});
    auto rng = hmc::chain_rng(c.seed, 0);
    const Vector init = hmc::default_initial_point(post, rng);
    prox::MmOptions opts;
    opts.tol = c.map.tol;
    opts.max_iterations = c.map.max_iterations;
    return prox::map_rho_schedule(p.base, p.set, schedule, init, opts);
  });
  const auto dir = resolve_output_dir(c);
  stage("output", [&] {
    fs::create_directories(dir);
    std::string csv = "rho,iteration,objective,step_norm";
    for (int k = 0; k < p.base->dim(); ++k) csv += fmt::format(",theta{}", k + 1);
    csv += "\n";
    for (const auto& s : out.result.trace) {
      csv += fmt::format("{},{},{},{}", num(s.rho), s.iteration, num(s.objective), num(s.step_norm));
      for (Eigen::Index k = 0; k < s.theta.size(); ++k) csv += "," + num(s.theta(k));
      csv += "\n";
    }
    std::vector<std::string> files;
    write_file(dir / "map_trace.csv", csv, files);
  });
  out.trace_file = dir / "map_trace.csv";
  return out;
}

RidgeMetrics ridge_metrics(const RelaxedPosterior& post, const std::vector<hmc::SampleChain>& chains,
                           const Vector& map) {
  RidgeMetrics m;
  m.map = map;
  std::size_t n = 0, within = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : chains) {
    for (std::size_t i = 0; i < c.draws.size(); ++i) {
      const double d2 = c.penalty_values[i];
      m.mean_dist_sq += d2;
      if (std::sqrt(d2) <= 0.1) ++within;
      ++n;
      const double lp = post.logp(c.draws[i]);
      if (lp > best) {
        best = lp;
        m.mode = c.draws[i];
      }
    }
  }
  m.mean_dist_sq /= static_cast<double>(n);
  m.fraction_within = static_cast<double>(within) / static_cast<double>(n);
  m.mode_to_map = (m.mode - map).norm();
  return m;
}

TableQuantiles table_quantiles(const MultinomialDirichletTable& model, const std::vector<hmc::SampleChain>& chains) {
  const int I = model.rows(), J = model.cols();
  std::vector<std::vector<double>> cum(static_cast<std::size_t>(I * J)), cell(static_cast<std::size_t>(I * J));
  for (const auto& c : chains) {
    for (const auto& d : c.draws) {
      const Matrix full = model.full_table(d);
      for (int i = 0; i < I; ++i) {
        double s = 0.0;
        for (int j = 0; j < J; ++j) {
          s += full(i, j);
          cum[static_cast<std::size_t>(i * J + j)].push_back(s);
          cell[static_cast<std::size_t>(i * J + j)].push_back(full(i, j));
        }
      }
    }
  }
  TableQuantiles q;
  q.q025.resize(I, J);
  q.q50.resize(I, J);
  q.q975.resize(I, J);
  q.theta_median.resize(I, J);
  q.cell_median.resize(I, J);
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < J; ++j) {
      const auto& v = cum[static_cast<std::size_t>(i * J + j)];
      q.q025(i, j) = diag::quantile(v, 0.025);
      q.q50(i, j) = diag::quantile(v, 0.5);
      q.q975(i, j) = diag::quantile(v, 0.975);
      q.theta_median(i, j) = q.q50(i, j) - (j > 0 ? q.q50(i, j - 1) : 0.0);
      q.cell_median(i, j) = diag::quantile(cell[static_cast<std::size_t>(i * J + j)], 0.5);
    }
  }
  return q;
}

std::string chains_csv(const std::vector<hmc::SampleChain>& chains) {
  std::string out = "chain,iteration";
  const int dim = chains.empty() ? 0 : chains.front().dim();
  for (int k = 0; k < dim; ++k) out += fmt::format(",theta{}", k + 1);
  out += ",accept,energy,dist_sq\n";
  for (const auto& c : chains) {
    for (std::size_t i = 0; i < c.draws.size(); ++i) {
      out += fmt::format("{},{}", c.chain_index, i);
      for (int k = 0; k < dim; ++k) out += "," + num(c.draws[i](k));
      out += fmt::format(",{},{},{}\n", c.accept_flags[i] ? 1 : 0, num(c.energies[i]), num(c.penalty_values[i]));
    }
  }
  return out;
}

std::string summary_csv(const std::vector<FlavorRun>& runs) {
  std::string out = "flavor,rho,coordinate,mean,sd,q2.5,q50,q97.5,ess,acceptance_rate,divergences\n";
  for (const auto& r : runs) {
    for (std::size_t k = 0; k < r.summary.coords.size(); ++k) {
      const auto& s = r.summary.coords[k];
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.flavor, num(r.rho), k + 1, num(s.mean), num(s.sd),
                         num(s.q025), num(s.q50), num(s.q975), num(s.ess), num(r.summary.acceptance_rate),
                         r.summary.divergences);
    }
  }
  return out;
}

std::string summary_table(const std::vector<FlavorRun>& runs) {
  if (runs.empty()) return "";
  const auto dim = runs.front().summary.coords.size();
  std::string head = fmt::format("{:<10}{:>10}", "prior", "rho");
  std::string rule;
  for (std::size_t k = 0; k < dim; ++k) {
    head += fmt::format(" |{:>8}{:>8}{:>8}{:>9}", fmt::format("Mean{}", k + 1), "2.5%", "97.5%", "ESS");
  }
  head += fmt::format(" |{:>8}\n", "accept");
  rule.assign(head.size() - 1, '-');
  std::string out = head + rule + "\n";
  for (const auto& r : runs) {
    out += fmt::format("{:<10}{:>10}", r.flavor, r.flavor == "sharp" ? "inf" : fmt::format("{:.3g}", r.rho));
    for (const auto& s : r.summary.coords) {
      out += fmt::format(" |{:>8.2f}{:>8.2f}{:>8.2f}{:>9.2f}", s.mean, s.q025, s.q975, s.ess);
    }
    out += fmt::format(" |{:>8.3f}\n", r.summary.acceptance_rate);
  }
  return out;
}

std::string table_quantiles_text(const TableQuantiles& q) {
  std::string out;
  auto block = [&](const char* title, const Matrix& m) {
    out += fmt::format("{}\n", title);
    out += fmt::format("{:<8}", "row");
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += fmt::format("{:>10}", fmt::format("col{}", j + 1));
    out += "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out += fmt::format("{:<8}", i + 1);
      for (Eigen::Index j = 0; j < m.cols(); ++j) out += fmt::format("{:>10.4f}", m(i, j));
      out += "\n";
    }
    out += "\n";
  };
  block("2.5% quantiles of cumulative sums", q.q025);
  block("50% quantiles of cumulative sums", q.q50);
  block("97.5% quantiles of cumulative sums", q.q975);
  block("median table (differences of median cumulative sums)", q.theta_median);
  block("marginal medians of cell probabilities", q.cell_median);
  return out;
}

}  // namespace dset::experiment
