#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "depreg/error.hpp"
#include "depreg/table.hpp"

using namespace depreg;

namespace {

ExperimentTable sample_table() {
  ExperimentTable t;
  t.experiment_id = "demo";
  t.config_columns = {"x", "series"};
  for (int trial = 0; trial < 2; ++trial) {
    for (const char* x : {"16", "4", "64"}) {
      for (const char* s : {"a", "b"}) {
        t.add({x, s}, trial, 100 + trial, "err", std::stod(x) * (trial + 1) * (s[0] == 'a' ? 1.0 : 2.0));
      }
    }
  }
  t.add({"all", "a"}, -1, 0, "slope_err_vs_x", 1.0);
  return t;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t k = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++k;
  return k;
}

}  // namespace

TEST_CASE("csv round trip") {
  ExperimentTable t = sample_table();
  t.sort();
  CHECK(t.rows.front().config[0] == "4");   // numeric order, not lexicographic
  CHECK(t.rows.back().trial == -1);
  std::ostringstream out;
  write_csv(out, t);
  const std::string text = out.str();
  CHECK(text.rfind("experiment_id,x,series,trial,seed,metric,value\n", 0) == 0);
  std::istringstream in(text);
  const ExperimentTable back = read_csv(in);
  std::ostringstream again;
  write_csv(again, back);
  CHECK(again.str() == text);
  CHECK(back.rows.size() == t.rows.size());
}

TEST_CASE("selection helpers") {
  const ExperimentTable t = sample_table();
  CHECK(t.select("err").size() == 12);
  CHECK(t.select("err", 1).size() == 6);
  CHECK(t.value("err", {"64", "b"}, 1) == doctest::Approx(256.0));
  CHECK_FALSE(t.value("err", {"65", "b"}, 1).has_value());
  CHECK(t.column("series") == 1);
  CHECK(t.metrics().size() == 2);
}

TEST_CASE("cells are validated") {
  ExperimentTable t;
  t.config_columns = {"x"};
  CHECK_THROWS_AS(t.add({"1,2"}, 0, 0, "m", 1.0), ConfigError);
  CHECK_THROWS_AS(t.add({"1"}, 0, 0, "", 1.0), ConfigError);
  CHECK_THROWS_AS(t.add({"1", "2"}, 0, 0, "m", 1.0), ConfigError);
}

TEST_CASE("svg has one polyline per series") {
  const ExperimentTable t = sample_table();
  SvgOptions o;
  o.x_column = "x";
  o.series_column = "series";
  std::ostringstream out;
  write_svg(out, t, o);
  CHECK(count(out.str(), "<polyline") == 2);
  CHECK(count(out.str(), "class=\"chart\"") == 1);
  o.series_column.clear();
  std::ostringstream single;
  write_svg(single, t, o);
  CHECK(count(single.str(), "<polyline") == 1);
}

TEST_CASE("emit writes files and rejects empty tables") {
  const auto dir = std::filesystem::temp_directory_path() / "depreg_test_table";
  std::filesystem::remove_all(dir);
  SvgOptions o;
  o.x_column = "x";
  const auto paths = emit(sample_table(), dir.string(), "demo", o);
  REQUIRE(paths.size() == 2);
  CHECK(std::filesystem::exists(paths[0]));
  CHECK(std::filesystem::exists(paths[1]));
  ExperimentTable empty;
  empty.experiment_id = "none";
  CHECK_THROWS_AS(emit(empty, dir.string(), "none", std::nullopt), ConfigError);
}

TEST_CASE("log-log slope") {
  CHECK(log_log_slope({2, 8}, {3, 12}) == doctest::Approx(1.0));
  CHECK(log_log_slope({1, 10}, {5, 0.5}) == doctest::Approx(-1.0));
  CHECK(log_log_slope({1, 2, 4, 8}, {1, 0.25, 0.0625, 1.0 / 64}) == doctest::Approx(-2.0));
  CHECK_THROWS(log_log_slope({1}, {1}));
  CHECK_THROWS(log_log_slope({1, -2}, {1, 2}));
}
