#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "depreg/data.hpp"
#include "depreg/error.hpp"

using namespace depreg;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = DEPREG_FIXTURES;

CitationPaths toy() {
  return {kFixtures + "/toy/nodes.csv", kFixtures + "/toy/edges.txt", kFixtures + "/toy/splits.json"};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("depreg_test_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

DataErrorKind error_kind(const CitationPaths& p) {
  try {
    load_citation(p);
  } catch (const DataError& e) {
    return e.kind();
  }
  FAIL("load_citation accepted a bad file");
  return DataErrorKind::missing_file;
}

}  // namespace

TEST_CASE("toy citation fixture loads with the expected counts") {
  const Dataset d = load_citation(toy());
  const DatasetCounts c = counts(d);
  CHECK(c.classes == 3);
  CHECK(c.nodes == 10);
  CHECK(c.edges == 12);
  CHECK(c.features == 2);
  REQUIRE(d.splits.has_value());
  CHECK(d.splits->train.size() == 6);
  CHECK(d.labels(7) == 1);
  CHECK(d.X(3, 1) == 0.125);
  CHECK(norms(d.A).infinity == doctest::Approx(1.0));
}

TEST_CASE("save then load is byte identical") {
  const Dataset d = load_citation(toy());
  const fs::path dir = scratch("roundtrip");
  const CitationPaths out{(dir / "nodes.csv").string(), (dir / "edges.txt").string(),
                          (dir / "splits.json").string()};
  save_citation(d, out);
  CHECK(slurp(out.nodes) == slurp(toy().nodes));
  CHECK(slurp(out.edges) == slurp(toy().edges));
  CHECK(slurp(out.splits) == slurp(toy().splits));
  const Dataset again = load_citation(out);
  CHECK(again.X == d.X);
  CHECK(again.labels == d.labels);
}

TEST_CASE("bad inputs raise distinct errors") {
  const std::string bad = kFixtures + "/bad/";
  CitationPaths p = toy();
  p.nodes = bad + "malformed_nodes.csv";
  CHECK(error_kind(p) == DataErrorKind::malformed_row);
  p = toy();
  p.nodes = bad + "duplicate_nodes.csv";
  CHECK(error_kind(p) == DataErrorKind::duplicate_id);
  p = toy();
  p.edges = bad + "dangling_edges.txt";
  CHECK(error_kind(p) == DataErrorKind::dangling_edge);
  p = toy();
  p.splits = bad + "overlapping_splits.json";
  CHECK(error_kind(p) == DataErrorKind::overlapping_splits);
  p = toy();
  p.edges = bad + "no_such_file.txt";
  CHECK(error_kind(p) == DataErrorKind::missing_file);
}

TEST_CASE("split validation") {
  Splits s{{0, 1}, {2}, {3}};
  CHECK_NOTHROW(validate_splits(s, 4));
  CHECK_THROWS_AS(validate_splits(s, 3), ConfigError);
  s.test.push_back(1);
  CHECK_THROWS_AS(validate_splits(s, 4), DataError);
}

TEST_CASE("stratified splits") {
  Eigen::VectorXi labels(100);
  for (int i = 0; i < 100; ++i) labels(i) = i % 2;
  const Splits a = make_splits(labels, {}, true, 1);
  CHECK(a.train.size() == 60);
  CHECK(a.val.size() == 20);
  CHECK(a.test.size() == 20);
  int ones = 0;
  for (Index i : a.train) ones += labels(i);
  CHECK(ones == 30);
  const Splits b = make_splits(labels, {}, true, 1);
  CHECK(a.train == b.train);
  const Splits c = make_splits(labels, {}, true, 2);
  CHECK(c.train.size() == 60);
  CHECK(c.train != a.train);

  const Splits all = make_splits(labels, {1.0, 0.0, 0.0}, false, 3);
  CHECK(all.train.size() == 100);
  CHECK(all.val.empty());

  Eigen::VectorXi tiny(8);
  tiny << 0, 0, 0, 0, 0, 0, 1, 1;
  std::vector<std::string> warnings;
  const Splits t = make_splits(tiny, {}, true, 0, &warnings);
  CHECK(warnings.size() == 1);
  CHECK(std::count(t.train.begin(), t.train.end(), 6) == 1);
  CHECK(std::count(t.train.begin(), t.train.end(), 7) == 1);
  validate_splits(t, 8);
}

TEST_CASE("synthetic data at zero temperature has independent marginals") {
  SyntheticSpec s;
  s.n = 4000;
  s.d = 2;
  s.beta_star = 0.0;
  s.seed = 5;
  const Dataset d = gen_synthetic(s);
  const Eigen::VectorXd h = d.X * d.ground_truth->theta.col(0);
  const Eigen::VectorXd resid = d.spins() - h.array().tanh().matrix();
  // mean residual is within a few standard errors of zero
  CHECK(std::abs(resid.mean()) < 4.0 / std::sqrt(4000.0));
  CHECK(d.ground_truth->theta.col(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("synthetic generation is deterministic and clips") {
  SyntheticSpec s;
  s.n = 50;
  s.d = 3;
  s.matrix.blocks = 5;
  s.beta_star = 0.4;
  s.seed = 9;
  const Dataset a = gen_synthetic(s);
  const Dataset b = gen_synthetic(s);
  CHECK(a.X == b.X);
  CHECK(a.labels == b.labels);
  s.seed = 10;
  CHECK(gen_synthetic(s).labels != a.labels);

  s.feature_law = FeatureLaw::ones;
  s.d = 1;
  s.theta_star = Eigen::VectorXd::Constant(1, 2.0);
  s.clip = 1.5;
  CHECK_THROWS_AS(gen_synthetic(s), ConfigError);  // every site would be clipped
  s.clip = 5.0;
  CHECK(gen_synthetic(s).ground_truth->clipped == 0);
}

TEST_CASE("synthetic marginals at n = 10 match enumeration") {
  SyntheticSpec s;
  s.n = 10;
  s.d = 1;
  s.feature_law = FeatureLaw::ones;
  s.theta_star = Eigen::VectorXd::Constant(1, 0.3);
  s.matrix.blocks = 2;
  s.beta_star = 0.6;
  s.gibbs = GibbsOptions{60, 1, 1, 0};
  const ExactSummary ex =
      exact_summary(IsingModel{build_matrix(s.matrix, 10), Eigen::VectorXd::Constant(10, 0.3), 0.6});
  const int draws = 4000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
  for (int k = 0; k < draws; ++k) {
    s.seed = static_cast<std::uint64_t>(k);
    mean += gen_synthetic(s).spins();
  }
  mean /= draws;
  for (int i = 0; i < 10; ++i) {
    const double mu = ex.marginal_means(i);
    CHECK(std::abs(mean(i) - mu) < 3.0 * std::sqrt((1 - mu * mu) / draws) + 1e-3);
  }
}

TEST_CASE("planted Potts dataset") {
  PlantedPottsSpec s;
  s.seed = 4;
  const Dataset d = gen_planted_potts(s);
  CHECK(d.size() == 200);
  CHECK(d.label_kind == LabelKind::class_id);
  CHECK(d.num_classes == 2);
  CHECK(d.edges.size() == 100);  // disjoint pairs
  REQUIRE(d.splits.has_value());
  validate_splits(*d.splits, 200);
  CHECK(d.splits->train.size() + d.splits->val.size() + d.splits->test.size() == 200);
  CHECK(d.labels == gen_planted_potts(s).labels);
}

TEST_CASE("shortest decimal formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-1.25e-7) == "-1.25e-07");
  for (double v : {1.0 / 3.0, 1e300, -2.5e-300, 123456.789})
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("feature and spin files") {
  const fs::path dir = scratch("csv");
  FeatureMatrix x(2, 3);
  x << 1, 0.5, -2, 1.0 / 3.0, 0, 7;
  write_features_csv((dir / "f.csv").string(), x);
  CHECK(read_features_csv((dir / "f.csv").string()) == x);
  Eigen::VectorXd s(3);
  s << 1, -1, 1;
  write_spins_csv((dir / "s.csv").string(), s);
  CHECK(read_spins_csv((dir / "s.csv").string()) == s);
  CHECK(slurp((dir / "s.csv").string()) == "spin\n1\n-1\n1\n");
}
