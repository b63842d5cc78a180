#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace depreg {

/// One measurement. Summary rows (means, fitted slopes) use trial = -1.
struct TableRow {
  std::vector<std::string> config;  ///< aligned with ExperimentTable::config_columns
  int trial = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

/// Tidy long-format results: experiment_id, config..., trial, seed, metric, value.
struct ExperimentTable {
  std::string experiment_id;
  std::vector<std::string> config_columns;
  std::vector<TableRow> rows;

  void add(std::vector<std::string> config, int trial, std::uint64_t seed, std::string metric,
           double value);
  /// Stable sort by (config, trial, metric); summary rows last within a config.
  void sort();

  std::vector<std::string> metrics() const;
  /// Rows with the given metric and trial >= 0 (or exactly `trial` when set).
  std::vector<const TableRow*> select(const std::string& metric,
                                      std::optional<int> trial = std::nullopt) const;
  std::optional<double> value(const std::string& metric, const std::vector<std::string>& config,
                              int trial) const;
  std::size_t column(const std::string& name) const;
};

void write_csv(std::ostream& out, const ExperimentTable& table);
ExperimentTable read_csv(std::istream& in);

struct SvgOptions {
  std::string x_column;
  /// Config column whose distinct values become separate lines; empty means one line.
  std::string series_column;
  bool log_x = true;
  bool log_y = true;
};

/// One chart per metric over trial means; one polyline per series.
void write_svg(std::ostream& out, const ExperimentTable& table, const SvgOptions& options);

/// Writes <dir>/<stem>.csv and, when `svg` is set, <dir>/<stem>.svg. Returns the paths.
std::vector<std::string> emit(const ExperimentTable& table, const std::string& dir,
                              const std::string& stem, const std::optional<SvgOptions>& svg);

/// Ordinary least squares slope of log y on log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace depreg
