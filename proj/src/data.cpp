#include "depreg/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "depreg/error.hpp"
#include "depreg/potts.hpp"

namespace depreg {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && !text.empty();
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorKind::missing_file, "cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

Eigen::VectorXd random_direction(Index d, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(d);
  do {
    for (Index k = 0; k < d; ++k) v(k) = normal(rng);
  } while (v.norm() == 0.0);
  return radius * v.normalized();
}

constexpr std::uint64_t kChainSalt = 0x9e3779b97f4a7c15ULL;

}  // namespace

Eigen::VectorXd Dataset::spins() const {
  require(label_kind == LabelKind::spin, "dataset labels are classes, not spins");
  return labels.cast<double>();
}

void validate_splits(const Splits& splits, Index n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (Index i : *part) {
      if (i < 0 || i >= n) {
        throw DataError(DataErrorKind::malformed_row,
                        "split index " + std::to_string(i) + " outside 0.." + std::to_string(n - 1));
      }
      if (seen[static_cast<std::size_t>(i)]) {
        throw DataError(DataErrorKind::overlapping_splits,
                        "node " + std::to_string(i) + " appears in more than one split entry");
      }
      seen[static_cast<std::size_t>(i)] = 1;
    }
  }
}

InteractionMatrix build_matrix(const MatrixSpec& spec, Index n) {
  switch (spec.kind) {
    case MatrixSpec::Kind::block:
      return InteractionMatrix::block_partition(n, spec.blocks);
    case MatrixSpec::Kind::curie_weiss:
      return InteractionMatrix::curie_weiss(n);
    case MatrixSpec::Kind::edges:
      return InteractionMatrix::from_adjacency(spec.edges, n);
  }
  throw ConfigError("unknown matrix kind");
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  require(spec.n >= 1 && spec.d >= 1, "gen_synthetic: n and d must be positive");
  require(spec.clip > 0.0, "gen_synthetic: clip level must be positive");
  std::mt19937_64 rng(spec.seed);
  Dataset out;
  out.A = build_matrix(spec.matrix, spec.n);
  if (spec.matrix.kind == MatrixSpec::Kind::edges) out.edges = spec.matrix.edges;

  Eigen::VectorXd theta;
  if (spec.theta_star) {
    theta = *spec.theta_star;
    require(theta.size() == spec.d, "gen_synthetic: theta_star has the wrong dimension");
  } else {
    theta = random_direction(spec.d, spec.theta_norm, rng);
  }

  switch (spec.feature_law) {
    case FeatureLaw::gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      out.X.resize(spec.n, spec.d);
      for (Index i = 0; i < spec.n; ++i) {
        for (Index k = 0; k < spec.d; ++k) out.X(i, k) = normal(rng);
      }
      break;
    }
    case FeatureLaw::given:
      require(spec.given_X.has_value(), "gen_synthetic: feature law 'given' needs a matrix");
      require(spec.given_X->rows() == spec.n && spec.given_X->cols() == spec.d,
              "gen_synthetic: given features have the wrong shape");
      out.X = *spec.given_X;
      break;
    case FeatureLaw::ones:
      out.X = FeatureMatrix::Ones(spec.n, spec.d);
      break;
  }

  Eigen::VectorXd h = out.X * theta;
  Index clipped = 0;
  for (Index i = 0; i < h.size(); ++i) {
    if (std::abs(h(i)) > spec.clip) {
      h(i) = std::copysign(spec.clip, h(i));
      ++clipped;
    }
  }
  if (10 * clipped > spec.n) {
    throw ConfigError("gen_synthetic: " + std::to_string(clipped) + " of " +
                      std::to_string(spec.n) + " field entries exceed |h| <= " +
                      std::to_string(spec.clip) + "; bounded-field assumption violated");
  }

  IsingModel model{out.A, h, spec.beta_star};
  GibbsOptions chain = spec.gibbs;
  chain.count = 1;
  chain.seed = spec.seed ^ kChainSalt;
  const SpinVector sigma = gibbs_sample(model, chain).front();
  out.labels = sigma.cast<int>();
  out.label_kind = LabelKind::spin;
  out.num_classes = 2;
  out.ground_truth = GroundTruth{theta, spec.beta_star, clipped};
  return out;
}

Dataset gen_planted_potts(const PlantedPottsSpec& spec) {
  require(spec.n >= 3 && spec.classes >= 2 && spec.d >= 1 && spec.degree >= 1 &&
              spec.clique_size >= 0 && spec.clique_size != 1,
          "gen_planted_potts: invalid sizes");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<Index> node(0, spec.n - 1);
  std::set<std::pair<Index, Index>> pairs;
  if (spec.clique_size >= 2) {
    std::vector<Index> order(static_cast<std::size_t>(spec.n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(spec.clique_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(spec.clique_size));
      for (std::size_t a = start; a < stop; ++a) {
        for (std::size_t b = a + 1; b < stop; ++b) {
          pairs.insert({std::min(order[a], order[b]), std::max(order[a], order[b])});
        }
      }
    }
  } else {
    for (Index i = 0; i < spec.n; ++i) {
      for (Index k = 0; k < spec.degree; ++k) {
        const Index j = node(rng);
        if (j != i) pairs.insert({std::min(i, j), std::max(i, j)});
      }
    }
  }
  Dataset out;
  out.edges.assign(pairs.begin(), pairs.end());
  out.A = InteractionMatrix::from_adjacency(out.edges, spec.n);

  std::normal_distribution<double> normal(0.0, 1.0);
  out.X.resize(spec.n, spec.d);
  for (Index i = 0; i < spec.n; ++i) {
    for (Index k = 0; k < spec.d; ++k) out.X(i, k) = normal(rng);
  }
  Eigen::MatrixXd theta(spec.d, spec.classes);
  for (int c = 0; c < spec.classes; ++c) theta.col(c) = random_direction(spec.d, spec.field_scale, rng);

  GibbsOptions chain = spec.gibbs;
  chain.count = 1;
  chain.seed = spec.seed ^ kChainSalt;
  out.labels = gibbs_sample_potts(out.A, out.X * theta, spec.beta_star, chain).front();
  out.label_kind = LabelKind::class_id;
  out.num_classes = spec.classes;
  out.ground_truth = GroundTruth{theta, spec.beta_star, 0};
  out.splits = make_splits(out.labels, {}, true, spec.seed);
  return out;
}

Splits make_splits(const Eigen::VectorXi& labels, const SplitFractions& fractions,
                   bool stratified, std::uint64_t seed, std::vector<std::string>* warnings) {
  const double f[3] = {fractions.train, fractions.val, fractions.test};
  require(f[0] >= 0.0 && f[1] >= 0.0 && f[2] >= 0.0, "make_splits: negative fraction");
  require(std::abs(f[0] + f[1] + f[2] - 1.0) <= 1e-9, "make_splits: fractions must sum to 1");

  std::map<int, std::vector<Index>> groups;
  for (Index i = 0; i < labels.size(); ++i) groups[stratified ? labels(i) : 0].push_back(i);

  std::mt19937_64 rng(seed);
  Splits out;
  std::vector<Index>* parts[3] = {&out.train, &out.val, &out.test};
  for (auto& [label, members] : groups) {
    const auto m = static_cast<Index>(members.size());
    if (stratified && m < 3) {
      if (warnings) {
        warnings->push_back("class " + std::to_string(label) + " has " + std::to_string(m) +
                            " member(s); assigned to train");
      }
      out.train.insert(out.train.end(), members.begin(), members.end());
      continue;
    }
    std::shuffle(members.begin(), members.end(), rng);
    Index sizes[3];
    double remainders[3];
    Index assigned = 0;
    for (int k = 0; k < 3; ++k) {
      const double exact = f[k] * static_cast<double>(m);
      sizes[k] = static_cast<Index>(std::floor(exact + 1e-9));
      remainders[k] = exact - static_cast<double>(sizes[k]);
      assigned += sizes[k];
    }
    std::array<int, 3> order{0, 1, 2};
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (Index r = 0; r < m - assigned; ++r) ++sizes[order[static_cast<std::size_t>(r % 3)]];
    Index pos = 0;
    for (int k = 0; k < 3; ++k) {
      parts[k]->insert(parts[k]->end(), members.begin() + pos, members.begin() + pos + sizes[k]);
      pos += sizes[k];
    }
  }
  for (auto* p : parts) std::sort(p->begin(), p->end());
  return out;
}

Dataset load_citation(const CitationPaths& paths) {
  Dataset out;
  out.label_kind = LabelKind::class_id;

  std::ifstream nodes = open_input(paths.nodes);
  std::string line;
  if (!std::getline(nodes, line)) {
    throw DataError(DataErrorKind::malformed_row, paths.nodes + ": missing header");
  }
  const auto header = split_fields(strip_cr(line), ',');
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    throw DataError(DataErrorKind::malformed_row, paths.nodes + ": header must start with id,label");
  }
  const auto d = static_cast<Index>(header.size() - 2);
  for (Index k = 0; k < d; ++k) {
    if (header[static_cast<std::size_t>(k + 2)] != "f" + std::to_string(k + 1)) {
      throw DataError(DataErrorKind::malformed_row,
                      paths.nodes + ": feature columns must be named f1..fd");
    }
  }

  std::vector<std::pair<Index, int>> rows;
  std::vector<std::vector<double>> features;
  std::set<Index> ids;
  std::size_t line_no = 1;
  while (std::getline(nodes, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    const std::string where = paths.nodes + ":" + std::to_string(line_no);
    if (static_cast<Index>(fields.size()) != d + 2) {
      throw DataError(DataErrorKind::malformed_row, where + ": expected " +
                                                        std::to_string(d + 2) + " fields, got " +
                                                        std::to_string(fields.size()));
    }
    Index id = 0;
    int label = 0;
    if (!parse_number(fields[0], id) || id < 0) {
      throw DataError(DataErrorKind::malformed_row, where + ": bad id '" + fields[0] + "'");
    }
    if (!parse_number(fields[1], label) || label < 0) {
      throw DataError(DataErrorKind::malformed_row, where + ": bad label '" + fields[1] + "'");
    }
    if (!ids.insert(id).second) {
      throw DataError(DataErrorKind::duplicate_id, where + ": duplicate id " + std::to_string(id));
    }
    std::vector<double> x(static_cast<std::size_t>(d));
    for (Index k = 0; k < d; ++k) {
      const auto& text = fields[static_cast<std::size_t>(k + 2)];
      if (!parse_number(text, x[static_cast<std::size_t>(k)])) {
        throw DataError(DataErrorKind::malformed_row, where + ": bad feature '" + text + "'");
      }
    }
    rows.emplace_back(id, label);
    features.push_back(std::move(x));
  }
  const auto n = static_cast<Index>(rows.size());
  if (n == 0) throw DataError(DataErrorKind::malformed_row, paths.nodes + ": no nodes");
  if (*ids.rbegin() != n - 1) {
    throw DataError(DataErrorKind::malformed_row, paths.nodes + ": ids must be exactly 0.." +
                                                      std::to_string(n - 1));
  }
  out.X.resize(n, d);
  out.labels.resize(n);
  int max_label = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index i = rows[r].first;
    out.labels(i) = rows[r].second;
    max_label = std::max(max_label, rows[r].second);
    for (Index k = 0; k < d; ++k) out.X(i, k) = features[r][static_cast<std::size_t>(k)];
  }
  out.num_classes = std::max(2, max_label + 1);

  std::ifstream edges = open_input(paths.edges);
  line_no = 0;
  std::vector<std::pair<Index, Index>> graph;
  while (std::getline(edges, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = paths.edges + ":" + std::to_string(line_no);
    std::istringstream ls(line);
    std::string a, b, extra;
    Index i = 0, j = 0;
    if (!(ls >> a >> b) || (ls >> extra) || !parse_number(a, i) || !parse_number(b, j)) {
      throw DataError(DataErrorKind::malformed_row, where + ": expected 'i j'");
    }
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw DataError(DataErrorKind::dangling_edge,
                      where + ": edge (" + a + "," + b + ") references an unknown node");
    }
    out.edges.emplace_back(i, j);
    if (i != j) graph.emplace_back(i, j);
  }
  if (graph.empty()) throw DataError(DataErrorKind::malformed_row, paths.edges + ": no edges");
  out.A = InteractionMatrix::from_adjacency(graph, n);

  std::ifstream sp = open_input(paths.splits);
  nlohmann::json j;
  try {
    sp >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataErrorKind::malformed_row, paths.splits + ": " + e.what());
  }
  Splits splits;
  try {
    splits.train = j.at("train").get<std::vector<Index>>();
    splits.val = j.at("val").get<std::vector<Index>>();
    splits.test = j.at("test").get<std::vector<Index>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataErrorKind::malformed_row, paths.splits + ": " + e.what());
  }
  validate_splits(splits, n);
  out.splits = std::move(splits);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw ConfigError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void save_citation(const Dataset& data, const CitationPaths& paths) {
  require(data.label_kind == LabelKind::class_id, "save_citation: labels must be class ids");
  require(data.splits.has_value(), "save_citation: dataset has no splits");
  {
    std::ofstream out = open_output(paths.nodes);
    out << "id,label";
    for (Index k = 0; k < data.X.cols(); ++k) out << ",f" << (k + 1);
    out << '\n';
    for (Index i = 0; i < data.size(); ++i) {
      out << i << ',' << data.labels(i);
      for (Index k = 0; k < data.X.cols(); ++k) out << ',' << format_double(data.X(i, k));
      out << '\n';
    }
  }
  {
    std::ofstream out = open_output(paths.edges);
    for (const auto& [i, j] : data.edges) out << i << ' ' << j << '\n';
  }
  {
    nlohmann::ordered_json j;
    j["train"] = data.splits->train;
    j["val"] = data.splits->val;
    j["test"] = data.splits->test;
    std::ofstream out = open_output(paths.splits);
    out << j.dump() << '\n';
  }
}

DatasetCounts counts(const Dataset& data) {
  DatasetCounts c;
  c.classes = data.num_classes;
  c.nodes = data.size();
  c.edges = static_cast<Index>(data.edges.size());
  c.features = data.X.cols();
  return c;
}

void write_features_csv(const std::string& path, const FeatureMatrix& x) {
  std::ofstream out = open_output(path);
  for (Index k = 0; k < x.cols(); ++k) out << (k ? ",f" : "f") << (k + 1);
  out << '\n';
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index k = 0; k < x.cols(); ++k) out << (k ? "," : "") << format_double(x(i, k));
    out << '\n';
  }
}

FeatureMatrix read_features_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(DataErrorKind::malformed_row, path + ": empty file");
  const auto d = static_cast<Index>(split_fields(strip_cr(line), ',').size());
  std::vector<double> values;
  std::size_t line_no = 1;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line, ',');
    if (static_cast<Index>(fields.size()) != d) {
      throw DataError(DataErrorKind::malformed_row,
                      path + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) +
                          " fields");
    }
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_number(f, v)) {
        throw DataError(DataErrorKind::malformed_row,
                        path + ":" + std::to_string(line_no) + ": bad number '" + f + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, d);
}

void write_spins_csv(const std::string& path, const Eigen::VectorXd& spins) {
  std::ofstream out = open_output(path);
  out << "spin\n";
  for (Index i = 0; i < spins.size(); ++i) out << (spins(i) > 0 ? 1 : -1) << '\n';
}

Eigen::VectorXd read_spins_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "spin") {
    throw DataError(DataErrorKind::malformed_row, path + ": header must be 'spin'");
  }
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    int s = 0;
    if (!parse_number(line, s) || (s != 1 && s != -1)) {
      throw DataError(DataErrorKind::malformed_row,
                      path + ":" + std::to_string(line_no) + ": spin must be 1 or -1");
    }
    values.push_back(s);
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace depreg
