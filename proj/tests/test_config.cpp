#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dset/config.hpp"
#include "dset/errors.hpp"

using namespace dset;
using namespace dset::config;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "dset_config_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kMinimal = R"(experiment = "custom"
[model]
kind = "gaussian_linear"
X = [[1.0]]
y = [0.0]
[constraint]
kind = "box"
lower = [-inf]
upper = [0.0]
[penalty]
rho = 10.0
)";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("document parser handles the supported subset") {
    const auto doc = parse_document(R"(
# comment
top = 3  # trailing
[s]
name = "a \"quoted\" \\ string"
flag = true
neg = -1.5e-3
big = inf
nested = [[1, 2],
          [3, 4]]   # multi-line
empty = []
)");
    CHECK(std::get<double>(doc.at("").at("top").data) == 3.0);
    CHECK(std::get<std::string>(doc.at("s").at("name").data) == "a \"quoted\" \\ string");
    CHECK(std::get<bool>(doc.at("s").at("flag").data));
    CHECK(std::get<double>(doc.at("s").at("neg").data) == -1.5e-3);
    CHECK(std::isinf(std::get<double>(doc.at("s").at("big").data)));
    const auto& nested = std::get<Value::Array>(doc.at("s").at("nested").data);
    REQUIRE(nested.size() == 2);
    CHECK(std::get<double>(std::get<Value::Array>(nested[1].data)[0].data) == 3.0);
    CHECK(std::get<Value::Array>(doc.at("s").at("empty").data).empty());
  }

  TEST_CASE("document errors carry line numbers") {
    try {
      parse_document("a = 1\nb = [1, 2\n");
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("opened on line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_document("a = 1\na = 2\n"), InputError);
    CHECK_THROWS_AS(parse_document("[s\n"), InputError);
    CHECK_THROWS_AS(parse_document("a = \"open\n"), InputError);
  }

  TEST_CASE("parse, serialize, parse is the identity") {
    const auto dir = fs::path(DSET_SOURCE_DIR) / "configs";
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".toml") continue;
      ++seen;
      std::ifstream in(entry.path());
      const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const auto first = parse_config(text);
      const auto text2 = serialize_config(first);
      const auto second = parse_config(text2);
      CHECK_MESSAGE(first == second, entry.path().string());
      CHECK(serialize_config(second) == text2);
    }
    CHECK(seen >= 4);
  }

  TEST_CASE("unknown sections and keys are rejected") {
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[extra]\nx = 1\n"), InputError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[hmc]\nstep = 0.1\n"), InputError);
    CHECK_THROWS_AS(parse_config(std::string("experiment = \"nope\"\n")), InputError);
  }

  TEST_CASE("validation") {
    const auto ok = parse_config(kMinimal);
    CHECK_NOTHROW(validate(ok));

    auto both = ok;
    both.penalty.budget = 0.1;
    CHECK_THROWS_AS(validate(both), InputError);

    auto neither = ok;
    neither.penalty.rho.reset();
    CHECK_THROWS_AS(validate(neither), InputError);

    auto sharp = neither;
    sharp.penalty.flavor = "sharp";
    CHECK_NOTHROW(validate(sharp));

    auto budget_unsquared = neither;
    budget_unsquared.penalty.budget = 0.1;
    budget_unsquared.penalty.flavor = "unsquared";
    CHECK_THROWS_AS(validate(budget_unsquared), InputError);

    auto bad_flavor = ok;
    bad_flavor.penalty.compare = {"cubic"};
    CHECK_THROWS_AS(validate(bad_flavor), InputError);

    auto bad_kind = ok;
    bad_kind.constraint.kind = "torus";
    CHECK_THROWS_AS(validate(bad_kind), InputError);

    auto bad_hmc = ok;
    bad_hmc.hmc.target_accept = 1.5;
    CHECK_THROWS_AS(validate(bad_hmc), InputError);

    auto missing_counts = ok;
    missing_counts.model = {};
    missing_counts.model.kind = "multinomial_dirichlet_table";
    missing_counts.model.counts_file = "/nonexistent/counts.csv";
    CHECK_THROWS_AS(validate(missing_counts), InputError);
  }

  TEST_CASE("relative data paths resolve against the config directory") {
    const auto c = load_config(fs::path(DSET_SOURCE_DIR) / "configs" / "contingency_table.toml");
    CHECK(fs::exists(c.model.counts_file));
    CHECK(fs::path(c.model.counts_file).is_absolute());
  }

  TEST_CASE("counts CSV with and without header") {
    const auto with = scratch("with_header.csv");
    write(with, "a,b,c\n1, 2 ,3\n4,5,6\n");
    const auto m = read_counts_csv(with);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 6);
    CHECK(m(0, 1) == 2);

    const auto without = scratch("without_header.csv");
    write(without, "1,2\r\n3,4\r\n\n");
    CHECK(read_counts_csv(without) == (Eigen::MatrixXi(2, 2) << 1, 2, 3, 4).finished());

    const auto ragged = scratch("ragged.csv");
    write(ragged, "1,2\n3\n");
    CHECK_THROWS_AS(read_counts_csv(ragged), InputError);
    const auto negative = scratch("negative.csv");
    write(negative, "1,-2\n");
    CHECK_THROWS_AS(read_counts_csv(negative), InputError);
    const auto fractional = scratch("fractional.csv");
    write(fractional, "1,2\n3,4.5\n");
    CHECK_THROWS_AS(read_counts_csv(fractional), InputError);
  }

  TEST_CASE("bundled counts") {
    const auto m = read_counts_csv(fs::path(DSET_SOURCE_DIR) / "data" / "agresti_counts.csv");
    CHECK(m.rows() == 4);
    CHECK(m.cols() == 5);
    CHECK(m.sum() == 802);
  }

  TEST_CASE("simulated regression data is reproducible from data_seed") {
    auto c = parse_config(kMinimal);
    c.model.X.clear();
    c.model.y.clear();
    c.model.n = 50;
    c.model.beta_true = {-1.295, -0.532};
    c.model.data_seed = 4;
    const auto a = std::get<GaussianLinearSpec>(model_spec(c));
    const auto b = std::get<GaussianLinearSpec>(model_spec(c));
    CHECK(a.X.rows() == 50);
    CHECK(a.X.cols() == 2);
    CHECK(a.X == b.X);
    CHECK(a.y == b.y);
    c.model.data_seed = 5;
    CHECK(std::get<GaussianLinearSpec>(model_spec(c)).y != a.y);
  }

  TEST_CASE("stochastic dominance dimensions default to the reduced table") {
    const auto c = load_config(fs::path(DSET_SOURCE_DIR) / "configs" / "contingency_table.toml");
    const auto set = constraint_set(c, 16);
    CHECK(set.dim() == 16);
    const auto& sd = std::get<StochasticDominance>(set.kind());
    CHECK(sd.rows == 4);
    CHECK(sd.cols == 4);
  }
}
