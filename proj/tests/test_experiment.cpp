#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dset/config.hpp"
#include "dset/errors.hpp"
#include "dset/experiment.hpp"

using namespace dset;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

config::ExperimentConfig small_ridge(const fs::path& out) {
  auto c = config::load_config(fs::path(DSET_SOURCE_DIR) / "configs" / "ridge_ball.toml");
  c.hmc.num_warmup = 200;
  c.hmc.num_samples = 200;
  c.output_dir = out.string();
  return c;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "dset_experiment_tests" / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("same config and seed give byte-identical chain files") {
    const auto a = experiment::run(small_ridge(scratch("a")));
    const auto b = experiment::run(small_ridge(scratch("b")));
    REQUIRE(a.runs.size() == 2);
    for (const auto& run : a.runs) {
      const auto left = slurp(a.output_dir / run.chain_file);
      CHECK(!left.empty());
      CHECK(left == slurp(b.output_dir / run.chain_file));
    }
    CHECK(slurp(a.output_dir / "summary.csv") == slurp(b.output_dir / "summary.csv"));
    for (const char* f : {"summary.txt", "metadata.json", "intervals.txt", "intervals.svg", "scatter.svg"}) {
      CHECK_MESSAGE(fs::exists(a.output_dir / f), f);
    }
  }

  TEST_CASE("chain CSV layout") {
    hmc::SampleChain c;
    c.draws = {Vector::Constant(2, 0.5), Vector::Constant(2, -1.0)};
    c.accept_flags = {true, false};
    c.energies = {1.0, 2.0};
    c.penalty_values = {0.0, 0.25};
    c.chain_index = 1;
    const auto csv = experiment::chains_csv({c});
    CHECK(csv.rfind("chain,iteration,theta1,theta2,accept,energy,dist_sq\n", 0) == 0);
    CHECK(csv.find("\n1,1,-1,-1,0,2,0.25\n") != std::string::npos);
  }

  TEST_CASE("output directory override") {
    const auto out = scratch("override");
    setenv(experiment::kOutputDirEnv, out.string().c_str(), 1);
    const auto c = small_ridge(scratch("ignored"));
    CHECK(experiment::resolve_output_dir(c) == out);
    unsetenv(experiment::kOutputDirEnv);
    CHECK(experiment::resolve_output_dir(c) == fs::path(c.output_dir));
  }

  TEST_CASE("MAP writes a trace over the schedule") {
    auto c = small_ridge(scratch("map"));
    c.map.rho_schedule = {1, 10, 100, 1000};
    const auto r = experiment::map(c);
    CHECK(r.result.rhos.size() == 4);
    for (std::size_t k = 1; k < r.result.solutions.size(); ++k) {
      CHECK(r.result.solutions[k].norm() < r.result.solutions[k - 1].norm());
    }
    CHECK(r.result.solutions.back().norm() < 1.05);
    const auto trace = slurp(r.trace_file);
    CHECK(trace.rfind("rho,iteration,objective,step_norm,theta1,theta2\n", 0) == 0);
  }

  TEST_CASE("calibration then run uses the calibrated rho") {
    auto c = config::load_config(fs::path(DSET_SOURCE_DIR) / "configs" / "calibration.toml");
    c.hmc.num_samples = 5000;
    c.output_dir = scratch("calibration").string();
    const auto r = experiment::run(c);
    REQUIRE(r.calibration.has_value());
    REQUIRE(r.runs.size() == 1);
    CHECK(r.runs.front().rho == r.calibration->lambda);
    CHECK(r.calibration->lambda > 1.0);
    CHECK(r.calibration->lambda < 5.0);
    CHECK(fs::exists(r.output_dir / "calibration.json"));
  }

  TEST_CASE("stage errors map to exit codes") {
    CHECK(experiment::exit_code_for(InputError("x")) == 2);
    CHECK(experiment::exit_code_for(CalibrationError("x")) == 3);
    CHECK(experiment::exit_code_for(NonconvergenceError("x")) == 4);
    CHECK(experiment::exit_code_for(std::runtime_error("x")) == 1);
    const experiment::StageError e("sample", "bad", 4);
    CHECK(std::string(e.what()) == "[sample] bad");
    CHECK(experiment::exit_code_for(e) == 4);
  }

  TEST_CASE("an unreachable budget fails in the calibration stage") {
    auto c = config::parse_config(R"(experiment = "custom"
[model]
kind = "gaussian_linear"
X = [[1.0]]
y = [0.0]
[constraint]
kind = "box"
lower = [5.0]
upper = [6.0]
[penalty]
budget = 1e-30
[hmc]
num_warmup = 200
num_samples = 200
)");
    c.output_dir = scratch("unreachable").string();
    try {
      experiment::run(c);
      FAIL("expected StageError");
    } catch (const experiment::StageError& e) {
      CHECK(e.stage() == "calibration");
      CHECK(e.exit_code() == 3);
    }
  }
}
