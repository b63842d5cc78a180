#include "depreg/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "depreg/error.hpp"

namespace depreg {

struct InteractionMatrix::Storage {
  Index n = 0;
  bool block_uniform = false;
  Index block_size = 0;
  double block_value = 0.0;
  SparseRows rows;
  MatrixNorms norms;
};

namespace {

MatrixNorms sparse_closed_norms(const InteractionMatrix::SparseRows& rows) {
  MatrixNorms out;
  double fro2 = 0.0;
  double inf = 0.0;
  for (Index i = 0; i < rows.outerSize(); ++i) {
    double row_sum = 0.0;
    for (InteractionMatrix::SparseRows::InnerIterator it(rows, i); it; ++it) {
      fro2 += it.value() * it.value();
      row_sum += std::abs(it.value());
    }
    inf = std::max(inf, row_sum);
  }
  out.frobenius = std::sqrt(fro2);
  out.infinity = inf;
  return out;
}

}  // namespace

InteractionMatrix::InteractionMatrix() : data_(std::make_shared<Storage>()) {}

InteractionMatrix::InteractionMatrix(std::shared_ptr<const Storage> storage)
    : data_(std::move(storage)) {}

InteractionMatrix InteractionMatrix::block_partition(Index n, Index r) {
  require(n > 0, "block_partition: n must be positive");
  require(r >= 1, "block_partition: r must be at least 1");
  require(n % r == 0, "block_partition: r must divide n");
  auto s = std::make_shared<Storage>();
  s->n = n;
  s->block_uniform = true;
  s->block_size = n / r;
  s->block_value = static_cast<double>(r) / static_cast<double>(n);
  // Every block is v * J_m with m v = 1: eigenvalues {1, 0}, row sums 1, ||A||_F^2 = r.
  s->norms.frobenius = std::sqrt(static_cast<double>(n) * static_cast<double>(s->block_size)) *
                       s->block_value;
  s->norms.infinity = static_cast<double>(s->block_size) * s->block_value;
  InteractionMatrix tmp(s);
  MatrixNorms spectral = power_iteration_spectral(tmp);
  s->norms.spectral = spectral.spectral;
  s->norms.spectral_converged = spectral.spectral_converged;
  s->norms.power_iterations = spectral.power_iterations;
  return InteractionMatrix(std::move(s));
}

InteractionMatrix InteractionMatrix::curie_weiss(Index n) { return block_partition(n, 1); }

InteractionMatrix InteractionMatrix::from_adjacency(
    std::span<const std::pair<Index, Index>> edges, Index n) {
  require(n > 0, "from_adjacency: n must be positive");
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(edges.size());
  for (auto [i, j] : edges) {
    require(i >= 0 && i < n && j >= 0 && j < n,
            "from_adjacency: node index out of range in edge (" + std::to_string(i) + "," +
                std::to_string(j) + ")");
    require(i != j, "from_adjacency: self-loop at node " + std::to_string(i));
    pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  require(!pairs.empty(), "from_adjacency: empty edge set (maximum degree 0)");

  std::vector<Index> degree(static_cast<std::size_t>(n), 0);
  for (auto [i, j] : pairs) {
    ++degree[static_cast<std::size_t>(i)];
    ++degree[static_cast<std::size_t>(j)];
  }
  const double max_degree = static_cast<double>(*std::max_element(degree.begin(), degree.end()));
  std::vector<WeightedEdge> weighted;
  weighted.reserve(pairs.size());
  for (auto [i, j] : pairs) weighted.push_back({i, j, 1.0 / max_degree});
  return from_weighted_edges(weighted, n);
}

InteractionMatrix InteractionMatrix::from_weighted_edges(std::span<const WeightedEdge> edges,
                                                         Index n) {
  require(n > 0, "from_weighted_edges: n must be positive");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges.size());
  for (const auto& e : edges) {
    require(e.i >= 0 && e.i < n && e.j >= 0 && e.j < n,
            "from_weighted_edges: node index out of range in edge (" + std::to_string(e.i) + "," +
                std::to_string(e.j) + ")");
    require(std::isfinite(e.weight), "from_weighted_edges: non-finite weight");
    triplets.emplace_back(e.i, e.j, e.weight);
    if (e.i != e.j) triplets.emplace_back(e.j, e.i, e.weight);
  }
  auto s = std::make_shared<Storage>();
  s->n = n;
  s->rows.resize(n, n);
  s->rows.setFromTriplets(triplets.begin(), triplets.end());
  s->rows.makeCompressed();
  s->norms = sparse_closed_norms(s->rows);
  InteractionMatrix tmp(s);
  MatrixNorms spectral = power_iteration_spectral(tmp);
  s->norms.spectral = spectral.spectral;
  s->norms.spectral_converged = spectral.spectral_converged;
  s->norms.power_iterations = spectral.power_iterations;
  return InteractionMatrix(std::move(s));
}

InteractionMatrix InteractionMatrix::from_dense(const Eigen::MatrixXd& dense, double symmetry_tol) {
  require(dense.rows() == dense.cols(), "from_dense: matrix must be square");
  require(dense.rows() > 0, "from_dense: matrix must be nonempty");
  require((dense - dense.transpose()).cwiseAbs().maxCoeff() <= symmetry_tol,
          "from_dense: matrix is not symmetric");
  std::vector<WeightedEdge> edges;
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = i; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) edges.push_back({i, j, 0.5 * (dense(i, j) + dense(j, i))});
    }
  }
  return from_weighted_edges(edges, dense.rows());
}

InteractionMatrix InteractionMatrix::scaled(double factor) const {
  require(std::isfinite(factor), "scaled: non-finite factor");
  auto s = std::make_shared<Storage>(*data_);
  const double a = std::abs(factor);
  if (s->block_uniform) {
    s->block_value *= factor;
  } else {
    s->rows *= factor;
  }
  s->norms.frobenius *= a;
  s->norms.spectral *= a;
  s->norms.infinity *= a;
  return InteractionMatrix(std::move(s));
}

InteractionMatrix InteractionMatrix::normalized() const {
  require(data_->norms.infinity > 0.0, "normalized: zero matrix cannot be normalized");
  return scaled(1.0 / data_->norms.infinity);
}

Index InteractionMatrix::size() const noexcept { return data_->n; }
bool InteractionMatrix::is_block_uniform() const noexcept { return data_->block_uniform; }

Index InteractionMatrix::block_size() const {
  require(data_->block_uniform, "block_size: matrix is not block-uniform");
  return data_->block_size;
}

double InteractionMatrix::block_value() const {
  require(data_->block_uniform, "block_value: matrix is not block-uniform");
  return data_->block_value;
}

Index InteractionMatrix::block_of(Index i) const {
  require(data_->block_uniform, "block_of: matrix is not block-uniform");
  return i / data_->block_size;
}

const InteractionMatrix::SparseRows& InteractionMatrix::sparse() const {
  require(!data_->block_uniform, "sparse: matrix uses block-uniform storage");
  return data_->rows;
}

double InteractionMatrix::entry(Index i, Index j) const {
  require(i >= 0 && i < size() && j >= 0 && j < size(), "entry: index out of range");
  if (data_->block_uniform) {
    return block_of(i) == block_of(j) ? data_->block_value : 0.0;
  }
  return data_->rows.coeff(i, j);
}

Eigen::VectorXd InteractionMatrix::local_field(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  require(v.size() == size(), "local_field: vector length does not match matrix size");
  const Storage& s = *data_;
  Eigen::VectorXd out(s.n);
  if (s.block_uniform) {
    const Index blocks = s.n / s.block_size;
    for (Index b = 0; b < blocks; ++b) {
      const double total = v.segment(b * s.block_size, s.block_size).sum();
      for (Index i = b * s.block_size; i < (b + 1) * s.block_size; ++i) {
        out(i) = s.block_value * (total - v(i));
      }
    }
    return out;
  }
  for (Index i = 0; i < s.n; ++i) {
    double acc = 0.0;
    for (SparseRows::InnerIterator it(s.rows, i); it; ++it) {
      if (it.col() != i) acc += it.value() * v(it.col());
    }
    out(i) = acc;
  }
  return out;
}

Eigen::MatrixXd InteractionMatrix::local_field_columns(const Eigen::Ref<const Eigen::MatrixXd>& v) const {
  Eigen::MatrixXd out(v.rows(), v.cols());
  for (Index k = 0; k < v.cols(); ++k) out.col(k) = local_field(Eigen::VectorXd(v.col(k)));
  return out;
}

Eigen::VectorXd InteractionMatrix::apply(const Eigen::Ref<const Eigen::VectorXd>& v) const {
  require(v.size() == size(), "apply: vector length does not match matrix size");
  const Storage& s = *data_;
  if (s.block_uniform) {
    Eigen::VectorXd out(s.n);
    const Index blocks = s.n / s.block_size;
    for (Index b = 0; b < blocks; ++b) {
      const double total = v.segment(b * s.block_size, s.block_size).sum();
      out.segment(b * s.block_size, s.block_size).setConstant(s.block_value * total);
    }
    return out;
  }
  return s.rows * v;
}

Eigen::MatrixXd InteractionMatrix::to_dense() const {
  const Storage& s = *data_;
  if (s.block_uniform) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s.n, s.n);
    const Index blocks = s.n / s.block_size;
    for (Index b = 0; b < blocks; ++b) {
      out.block(b * s.block_size, b * s.block_size, s.block_size, s.block_size)
          .setConstant(s.block_value);
    }
    return out;
  }
  return Eigen::MatrixXd(s.rows);
}

std::vector<WeightedEdge> InteractionMatrix::upper_entries() const {
  std::vector<WeightedEdge> out;
  const Storage& s = *data_;
  if (s.block_uniform) {
    for (Index i = 0; i < s.n; ++i) {
      const Index end = (block_of(i) + 1) * s.block_size;
      for (Index j = i; j < end; ++j) out.push_back({i, j, s.block_value});
    }
    return out;
  }
  for (Index i = 0; i < s.n; ++i) {
    for (SparseRows::InnerIterator it(s.rows, i); it; ++it) {
      if (it.col() >= i) out.push_back({i, it.col(), it.value()});
    }
  }
  return out;
}

const MatrixNorms& InteractionMatrix::cached_norms() const noexcept { return data_->norms; }

MatrixNorms norms(const InteractionMatrix& a) {
  const MatrixNorms& out = a.cached_norms();
  if (!out.spectral_converged) {
    throw NumericalError("power iteration did not converge within " +
                         std::to_string(out.power_iterations) + " iterations");
  }
  return out;
}

MatrixNorms power_iteration_spectral(const InteractionMatrix& a,
                                     const PowerIterationOptions& options) {
  MatrixNorms out;
  const Index n = a.size();
  if (n == 0) return out;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = unif(rng);
  v.normalize();

  // Iterating on A^2 avoids the +/- lambda oscillation of bipartite spectra;
  // ||A v|| for unit v converges to the largest |eigenvalue|.
  double estimate = 0.0;
  out.spectral_converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Eigen::VectorXd av = a.apply(v);
    const double next = av.norm();
    out.power_iterations = it;
    if (next == 0.0) {
      estimate = 0.0;
      out.spectral_converged = true;
      break;
    }
    Eigen::VectorXd w = a.apply(av);
    const double wn = w.norm();
    if (wn == 0.0) {
      estimate = next;
      out.spectral_converged = true;
      break;
    }
    v = w / wn;
    if (it > 1 && std::abs(next - estimate) <= options.tolerance * std::max(1.0, next)) {
      estimate = next;
      out.spectral_converged = true;
      break;
    }
    estimate = next;
  }
  out.spectral = estimate;
  return out;
}

std::vector<WeightedEdge> read_edge_list(std::istream& in) {
  std::vector<WeightedEdge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    long long i = 0;
    long long j = 0;
    if (!(fields >> i)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError("edge list line " + std::to_string(line_no) + ": expected 'i j [weight]'");
    }
    if (!(fields >> j)) {
      throw ConfigError("edge list line " + std::to_string(line_no) + ": missing second endpoint");
    }
    double w = 1.0;
    if (!(fields >> w)) {
      if (!fields.eof()) {
        throw ConfigError("edge list line " + std::to_string(line_no) + ": bad weight");
      }
      w = 1.0;
    }
    std::string rest;
    if (fields >> rest) {
      throw ConfigError("edge list line " + std::to_string(line_no) + ": trailing fields");
    }
    require(i >= 0 && j >= 0, "edge list line " + std::to_string(line_no) + ": negative index");
    edges.push_back({static_cast<Index>(i), static_cast<Index>(j), w});
  }
  return edges;
}

std::vector<WeightedEdge> read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open edge list: " + path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, std::span<const WeightedEdge> edges) {
  out << std::setprecision(17);
  for (const auto& e : edges) {
    out << e.i << ' ' << e.j;
    if (e.weight != 1.0) out << ' ' << e.weight;
    out << '\n';
  }
}

}  // namespace depreg
