#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <doctest.h>

#include "fpot/io.hpp"
#include "fpot/measure.hpp"

using namespace fpot;

namespace {

std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "fpot_io_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string stage(const std::string& name, const std::string& content) {
  std::string path = temp_path(name);
  write_text_file(path, content);
  return path;
}

std::string data_file(const std::string& name) {
  return std::string(FPOT_TEST_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("format_double round trips through strtod") {
  const double values[] = {0.0,    1.0,    -1.0,     1.0 / 3.0, 0.1,  1e-308,
                           6.02e23, -17.25, 1e16 + 1, 2.5e-17,   -0.0, 4.9406564584124654e-324};
  for (double x : values) {
    std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  Rng rng(7);
  for (int k = 0; k < 1000; ++k) {
    double x = (rng.uniform() - 0.5) * std::pow(10.0, 300.0 * (rng.uniform() - 0.5));
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("csv fields quote separators and double quotes") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("") == "");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("write_csv emits the exact header and rows") {
  Matrix rows(2, 3);
  rows << 0, 0.5, 1, 1, 0.25, -2;
  std::string path = temp_path("table.csv");
  write_csv(path, {"n", "a,b", "value"}, rows);
  CHECK(read_text_file(path) == "n,\"a,b\",value\n0,0.5,1\n1,0.25,-2\n");

  write_csv(path, {"only"}, Matrix());
  CHECK(read_text_file(path) == "only\n");

  CHECK_THROWS_AS(write_csv(path, {"a", "b"}, rows), std::invalid_argument);
  CHECK_THROWS_AS(write_csv(path, {}, Matrix()), std::invalid_argument);
}

TEST_CASE("text file round trip and missing file error") {
  std::string path = temp_path("note.txt");
  write_text_file(path, "line\nline2");
  CHECK(read_text_file(path) == "line\nline2");
  CHECK_THROWS_WITH_AS(read_text_file(temp_path("absent.txt")),
                       doctest::Contains("cannot read file"), std::runtime_error);
}

TEST_CASE("discrete loader builds the instance from a linear-feature file") {
  std::string path = stage("lin.json", R"({
    "type": "discrete",
    "epsilon": 0.25,
    "kappa": 2.0,
    "mu1": {"points": [0.0, 1.0], "weights": [0.5, 0.5]},
    "mu2": {"points": [[0.0], [2.0]], "weights": [0.75, 0.25]},
    "features": {"kind": "linear"},
    "targets": [0.5]
  })");
  CHECK(peek_file_kind(path) == FileKind::kDiscrete);
  DiscreteFile file = load_discrete_file(path);
  CHECK(file.epsilon == 0.25);
  CHECK(file.has_kappa);
  CHECK(file.kappa == 2.0);
  CHECK(file.problem.source_size() == 2);
  CHECK(file.problem.target_size() == 2);
  CHECK(file.problem.feature_count() == 1);
  CHECK(file.problem.features2()(0, 0) == 0.0);
  CHECK(file.problem.features2()(0, 1) == 2.0);
  CHECK(file.problem.targets()(0) == 0.5);
  CHECK(file.problem.cost()(0, 1) == 2.0);
  CHECK(file.problem.cost()(1, 1) == 0.5);
  CHECK(file.problem.mu2().weights()(0) == 0.75);
}

TEST_CASE("discrete loader accepts quadratic and tabulated features") {
  std::string quad = stage("quad.json", R"({
    "type": "discrete",
    "epsilon": 1.0,
    "mu1": {"points": [[0.0, 0.0], [1.0, 1.0]], "weights": [0.5, 0.5]},
    "mu2": {"points": [[0.0, 1.0], [1.0, 2.0]], "weights": [0.5, 0.5]},
    "features": {"kind": "quadratic"},
    "targets": [0.5, 1.5, 0.5, 1.0, 2.5]
  })");
  DiscreteFile qf = load_discrete_file(quad);
  CHECK(qf.problem.feature_count() == 5);
  CHECK_FALSE(qf.has_kappa);
  // Monomials at y = (1, 2): y1, y2, y1^2, y1 y2, y2^2.
  CHECK(qf.problem.features2()(2, 1) == 1.0);
  CHECK(qf.problem.features2()(3, 1) == 2.0);
  CHECK(qf.problem.features2()(4, 1) == 4.0);

  std::string tab = stage("tab.json", R"({
    "type": "discrete",
    "epsilon": 1.0,
    "mu1": {"points": [0.0], "weights": [1.0]},
    "mu2": {"points": [0.0, 1.0, 2.0], "weights": [0.25, 0.5, 0.25]},
    "features": {"kind": "tabulated", "values": [[3.0, 1.0, 4.0], [1.0, 5.0, 9.0]]},
    "targets": [2.0, 5.0]
  })");
  DiscreteFile tf = load_discrete_file(tab);
  CHECK(tf.problem.feature_count() == 2);
  CHECK(tf.problem.features2()(1, 2) == 9.0);
  CHECK(tf.problem.residuals2()(0, 0) == 1.0);
}

TEST_CASE("discrete loader names the offending field") {
  std::string missing_eps = stage("bad1.json", R"({
    "type": "discrete",
    "mu1": {"points": [0.0], "weights": [1.0]},
    "mu2": {"points": [0.0], "weights": [1.0]},
    "features": {"kind": "linear"},
    "targets": [0.0]
  })");
  CHECK_THROWS_WITH_AS(load_discrete_file(missing_eps), "field epsilon: missing",
                       std::invalid_argument);

  std::string bad_weights = stage("bad2.json", R"({
    "type": "discrete",
    "epsilon": 1.0,
    "mu1": {"points": [0.0, 1.0], "weights": [0.5, 0.9]},
    "mu2": {"points": [0.0], "weights": [1.0]},
    "features": {"kind": "linear"},
    "targets": [0.0]
  })");
  CHECK_THROWS_WITH_AS(load_discrete_file(bad_weights), doctest::Contains("field mu1:"),
                       std::invalid_argument);

  std::string bad_targets = stage("bad3.json", R"({
    "type": "discrete",
    "epsilon": 1.0,
    "mu1": {"points": [0.0], "weights": [1.0]},
    "mu2": {"points": [0.0], "weights": [1.0]},
    "features": {"kind": "linear"},
    "targets": [0.0, 1.0]
  })");
  CHECK_THROWS_WITH_AS(load_discrete_file(bad_targets), doctest::Contains("field targets:"),
                       std::invalid_argument);

  std::string bad_kind = stage("bad4.json", R"({
    "type": "discrete",
    "epsilon": 1.0,
    "mu1": {"points": [0.0], "weights": [1.0]},
    "mu2": {"points": [0.0], "weights": [1.0]},
    "features": {"kind": "fourier"},
    "targets": [0.0]
  })");
  CHECK_THROWS_WITH_AS(load_discrete_file(bad_kind), doctest::Contains("features.kind"),
                       std::invalid_argument);

  std::string ragged = stage("bad5.json", R"({
    "type": "discrete",
    "epsilon": 1.0,
    "mu1": {"points": [[0.0, 1.0], [2.0]], "weights": [0.5, 0.5]},
    "mu2": {"points": [0.0], "weights": [1.0]},
    "features": {"kind": "linear"},
    "targets": [0.0]
  })");
  CHECK_THROWS_WITH_AS(load_discrete_file(ragged), doctest::Contains("mu1.points"),
                       std::invalid_argument);

  CHECK_THROWS_WITH_AS(load_discrete_file(stage("bad6.json", "{not json")),
                       doctest::Contains("not valid JSON"), std::invalid_argument);

  std::string wrong_type = stage("bad7.json", R"({"type": "gaussian", "epsilon": 1.0,
    "m_y": [0.0], "m2_y": [[1.0]]})");
  CHECK_THROWS_WITH_AS(load_discrete_file(wrong_type), doctest::Contains("field type:"),
                       std::invalid_argument);
}

TEST_CASE("gaussian loader round trips and validates shape") {
  std::string path = stage("gauss.json", R"({
    "type": "gaussian",
    "epsilon": 0.5,
    "m_y": [1.0, -1.0],
    "m2_y": [[2.0, 0.5], [0.5, 3.0]]
  })");
  CHECK(peek_file_kind(path) == FileKind::kGaussian);
  GaussianFile file = load_gaussian_file(path);
  CHECK(file.epsilon == 0.5);
  CHECK(file.target.m_y(1) == -1.0);
  CHECK(file.target.sigma_y()(0, 0) == doctest::Approx(1.0));
  CHECK(file.target.sigma_y()(0, 1) == doctest::Approx(1.5));

  std::string bad = stage("gauss_bad.json", R"({
    "type": "gaussian",
    "epsilon": 0.5,
    "m_y": [1.0, -1.0],
    "m2_y": [[2.0, 0.5]]
  })");
  CHECK_THROWS_WITH_AS(load_gaussian_file(bad), doctest::Contains("m2_y"), std::invalid_argument);
}

TEST_CASE("markov loader replicates a homogeneous transition matrix") {
  std::string path = stage("markov.json", R"({
    "type": "markov",
    "epsilon": 0.5,
    "states": [0.0, 1.0],
    "nu0": [1.0, 0.0],
    "P": [[0.25, 0.75], [0.5, 0.5]],
    "u": [0.0, 1.0],
    "r": [0.5, 0.5, 0.5]
  })");
  CHECK(peek_file_kind(path) == FileKind::kMarkov);
  MarkovFile file = load_markov_file(path);
  CHECK(file.problem.steps() == 3);
  CHECK(file.problem.P.size() == 3);
  CHECK(file.problem.P[2](0, 1) == 0.75);

  std::string per_step = stage("markov2.json", R"({
    "type": "markov",
    "epsilon": 1.0,
    "states": [0.0, 1.0],
    "nu0": [0.5, 0.5],
    "P": [[[0.25, 0.75], [0.5, 0.5]], [[1.0, 0.0], [0.0, 1.0]]],
    "u": [0.0, 1.0],
    "r": [0.5, 0.5]
  })");
  MarkovFile two = load_markov_file(per_step);
  CHECK(two.problem.P[1](0, 0) == 1.0);

  std::string short_list = stage("markov3.json", R"({
    "type": "markov",
    "epsilon": 1.0,
    "states": [0.0, 1.0],
    "nu0": [0.5, 0.5],
    "P": [[[0.25, 0.75], [0.5, 0.5]]],
    "u": [0.0, 1.0],
    "r": [0.5, 0.5]
  })");
  CHECK_THROWS_WITH_AS(load_markov_file(short_list), "field P: need one transition matrix per target",
                       std::invalid_argument);

  std::string bad_rows = stage("markov4.json", R"({
    "type": "markov",
    "epsilon": 1.0,
    "states": [0.0, 1.0],
    "nu0": [0.5, 0.5],
    "P": [[0.25, 0.7], [0.5, 0.5]],
    "u": [0.0, 1.0],
    "r": [0.5]
  })");
  CHECK_THROWS_AS(load_markov_file(bad_rows), std::invalid_argument);
}

TEST_CASE("shipped sample files load") {
  DiscreteFile small = load_discrete_file(data_file("discrete_small.json"));
  CHECK(small.problem.source_size() == 2);
  CHECK(small.problem.target_size() == 3);
  // Targets sit at the mu2 moment, so the optimal multiplier is zero.
  CHECK(moments(small.problem.mu2(), linear_features(1, Vector::Zero(1)))(0) ==
        doctest::Approx(0.5));

  DiscreteFile infeasible = load_discrete_file(data_file("discrete_infeasible.json"));
  CHECK(infeasible.problem.targets()(0) > infeasible.problem.features2().row(0).maxCoeff());

  GaussianFile gauss = load_gaussian_file(data_file("gaussian_unit.json"));
  CHECK(gauss.target.sigma_y()(0, 0) == 1.0);

  MarkovFile markov = load_markov_file(data_file("markov_two_state.json"));
  CHECK(markov.problem.steps() == 3);
  CHECK(markov.problem.state_count() == 2);
}
