#include "depreg/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "depreg/data.hpp"
#include "depreg/error.hpp"

namespace depreg {

namespace {

std::optional<double> as_number(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool config_less(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
    if (a[k] == b[k]) continue;
    const auto x = as_number(a[k]);
    const auto y = as_number(b[k]);
    if (x && y) return *x < *y;
    if (x != y) return x.has_value();  // numbers before labels such as "all"
    return a[k] < b[k];
  }
  return a.size() < b.size();
}

void check_cell(const std::string& s) {
  require(s.find_first_of(",\"\n\r") == std::string::npos,
          "table cell '" + s + "' contains a separator character");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

void ExperimentTable::add(std::vector<std::string> config, int trial, std::uint64_t seed,
                          std::string metric, double value) {
  require(config.size() == config_columns.size(), "ExperimentTable::add: config width mismatch");
  for (const auto& c : config) check_cell(c);
  check_cell(metric);
  require(!metric.empty(), "ExperimentTable::add: empty metric name");
  rows.push_back({std::move(config), trial, seed, std::move(metric), value});
}

void ExperimentTable::sort() {
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    if (a.config != b.config) return config_less(a.config, b.config);
    const bool sa = a.trial < 0;
    const bool sb = b.trial < 0;
    if (sa != sb) return sb;
    return a.trial < b.trial;
  });
}

std::vector<std::string> ExperimentTable::metrics() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.metric) == out.end()) out.push_back(r.metric);
  }
  return out;
}

std::vector<const TableRow*> ExperimentTable::select(const std::string& metric,
                                                     std::optional<int> trial) const {
  std::vector<const TableRow*> out;
  for (const auto& r : rows) {
    if (r.metric != metric) continue;
    if (trial ? r.trial == *trial : r.trial >= 0) out.push_back(&r);
  }
  return out;
}

std::optional<double> ExperimentTable::value(const std::string& metric,
                                             const std::vector<std::string>& config,
                                             int trial) const {
  for (const auto& r : rows) {
    if (r.metric == metric && r.trial == trial && r.config == config) return r.value;
  }
  return std::nullopt;
}

std::size_t ExperimentTable::column(const std::string& name) const {
  const auto it = std::find(config_columns.begin(), config_columns.end(), name);
  require(it != config_columns.end(), "ExperimentTable: no config column '" + name + "'");
  return static_cast<std::size_t>(it - config_columns.begin());
}

void write_csv(std::ostream& out, const ExperimentTable& table) {
  check_cell(table.experiment_id);
  out << "experiment_id";
  for (const auto& c : table.config_columns) {
    check_cell(c);
    out << ',' << c;
  }
  out << ",trial,seed,metric,value\n";
  for (const auto& r : table.rows) {
    out << table.experiment_id;
    for (const auto& c : r.config) out << ',' << c;
    out << ',' << r.trial << ',' << r.seed << ',' << r.metric << ',' << format_double(r.value)
        << '\n';
  }
}

ExperimentTable read_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "read_csv: empty input");
  const auto header = split_csv(line);
  require(header.size() >= 5 && header.front() == "experiment_id" &&
              header[header.size() - 4] == "trial" && header[header.size() - 3] == "seed" &&
              header[header.size() - 2] == "metric" && header.back() == "value",
          "read_csv: unexpected header");
  ExperimentTable t;
  t.config_columns.assign(header.begin() + 1, header.end() - 4);
  const std::size_t width = header.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    require(cells.size() == width, "read_csv: line " + std::to_string(line_no) + " has " +
                                       std::to_string(cells.size()) + " cells");
    if (t.experiment_id.empty()) t.experiment_id = cells[0];
    TableRow r;
    r.config.assign(cells.begin() + 1, cells.end() - 4);
    const auto& trial = cells[width - 4];
    const auto& seed = cells[width - 3];
    auto e1 = std::from_chars(trial.data(), trial.data() + trial.size(), r.trial).ec;
    auto e2 = std::from_chars(seed.data(), seed.data() + seed.size(), r.seed).ec;
    r.metric = cells[width - 2];
    const auto v = as_number(cells[width - 1]);
    require(e1 == std::errc() && e2 == std::errc() && v.has_value(),
            "read_csv: bad numeric cell on line " + std::to_string(line_no));
    r.value = *v;
    t.rows.push_back(std::move(r));
  }
  return t;
}

void write_svg(std::ostream& out, const ExperimentTable& table, const SvgOptions& options) {
  const std::size_t xc = table.column(options.x_column);
  const std::optional<std::size_t> sc =
      options.series_column.empty() ? std::nullopt
                                    : std::optional<std::size_t>(table.column(options.series_column));

  std::vector<std::string> charted;
  for (const auto& m : table.metrics()) {
    if (!table.select(m).empty()) charted.push_back(m);
  }
  require(!charted.empty(), "write_svg: table has no per-trial metrics");

  const double w = 520, h = 340, left = 80, right = 150, top = 40, bottom = 60;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
      << h * static_cast<double>(charted.size()) << "\">\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  for (std::size_t c = 0; c < charted.size(); ++c) {
    const std::string& metric = charted[c];
    // series -> x -> (sum, count)
    std::map<std::string, std::map<double, std::pair<double, int>>> series;
    for (const TableRow* r : table.select(metric)) {
      const auto x = as_number(r->config[xc]);
      if (!x || !std::isfinite(r->value)) continue;
      if (options.log_x && *x <= 0.0) continue;
      auto& cell = series[sc ? r->config[*sc] : metric][*x];
      cell.first += r->value;
      cell.second += 1;
    }
    auto tx = [&](double v) { return options.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return options.log_y ? std::log10(v) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (auto& [name, pts] : series) {
      for (auto& [x, acc] : pts) {
        const double mean = acc.first / acc.second;
        if (options.log_y && mean <= 0.0) continue;
        x0 = std::min(x0, tx(x));
        x1 = std::max(x1, tx(x));
        y0 = std::min(y0, ty(mean));
        y1 = std::max(y1, ty(mean));
      }
    }
    if (!(x0 < x1)) { x0 -= 0.5; x1 += 0.5; }
    if (!(y0 < y1)) { y0 -= 0.5; y1 += 0.5; }
    const double oy = h * static_cast<double>(c);
    const double pw = w - left - right, ph = h - top - bottom;
    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return oy + top + ph - (v - y0) / (y1 - y0) * ph; };
    auto un = [](bool log, double v) { return log ? std::pow(10.0, v) : v; };

    out << "<g class=\"chart\" data-metric=\"" << metric << "\">\n";
    out << "<text x=\"" << svg_number(left) << "\" y=\"" << svg_number(oy + 22) << "\">" << metric
        << "</text>\n";
    out << "<line x1=\"" << svg_number(left) << "\" y1=\"" << svg_number(oy + top + ph) << "\" x2=\""
        << svg_number(left + pw) << "\" y2=\"" << svg_number(oy + top + ph)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << svg_number(left) << "\" y1=\"" << svg_number(oy + top) << "\" x2=\""
        << svg_number(left) << "\" y2=\"" << svg_number(oy + top + ph) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_number(left + pw / 2) << "\" y=\"" << svg_number(oy + h - 15)
        << "\" text-anchor=\"middle\">" << options.x_column << (options.log_x ? " (log)" : "")
        << "</text>\n";
    out << "<text x=\"15\" y=\"" << svg_number(oy + top + ph / 2) << "\" transform=\"rotate(-90 15 "
        << svg_number(oy + top + ph / 2) << ")\" text-anchor=\"middle\">" << metric
        << (options.log_y ? " (log)" : "") << "</text>\n";
    for (auto [v, anchor] : {std::pair{x0, "start"}, std::pair{x1, "end"}}) {
      out << "<text x=\"" << svg_number(px(v)) << "\" y=\"" << svg_number(oy + top + ph + 18)
          << "\" text-anchor=\"" << anchor << "\" font-size=\"11\">"
          << tick_label(un(options.log_x, v)) << "</text>\n";
    }
    for (double v : {y0, y1}) {
      out << "<text x=\"" << svg_number(left - 6) << "\" y=\"" << svg_number(py(v) + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(un(options.log_y, v))
          << "</text>\n";
    }
    std::size_t k = 0;
    for (auto& [name, pts] : series) {
      const char* color = colors[k % 6];
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" data-series=\"" << name
          << "\" points=\"";
      bool first = true;
      for (auto& [x, acc] : pts) {
        const double mean = acc.first / acc.second;
        if (options.log_y && mean <= 0.0) continue;
        out << (first ? "" : " ") << svg_number(px(tx(x))) << ',' << svg_number(py(ty(mean)));
        first = false;
      }
      out << "\"/>\n";
      out << "<text x=\"" << svg_number(left + pw + 10) << "\" y=\""
          << svg_number(oy + top + 14 * static_cast<double>(k + 1)) << "\" fill=\"" << color
          << "\" font-size=\"11\">" << name << "</text>\n";
      ++k;
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

std::vector<std::string> emit(const ExperimentTable& table, const std::string& dir,
                              const std::string& stem, const std::optional<SvgOptions>& svg) {
  require(!table.rows.empty(), "emit: table has no rows");
  require(!table.metrics().empty(), "emit: table has no metrics");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::string> paths;
  const std::string csv_path = (std::filesystem::path(dir) / (stem + ".csv")).string();
  {
    std::ofstream out(csv_path, std::ios::binary);
    require(static_cast<bool>(out), "emit: cannot write " + csv_path);
    write_csv(out, table);
    require(static_cast<bool>(out), "emit: write failed for " + csv_path);
  }
  paths.push_back(csv_path);
  if (svg) {
    const std::string svg_path = (std::filesystem::path(dir) / (stem + ".svg")).string();
    std::ofstream out(svg_path, std::ios::binary);
    require(static_cast<bool>(out), "emit: cannot write " + svg_path);
    write_svg(out, table, *svg);
    paths.push_back(svg_path);
  }
  return paths;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "log_log_slope: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    require(x[k] > 0.0 && y[k] > 0.0, "log_log_slope: values must be positive");
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]) - mx;
    sxy += lx * (std::log(y[k]) - my);
    sxx += lx * lx;
  }
  require(sxx > 0.0, "log_log_slope: x values must not all coincide");
  return sxy / sxx;
}

}  // namespace depreg
