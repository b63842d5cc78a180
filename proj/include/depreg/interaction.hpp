#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace depreg {

using Index = Eigen::Index;

struct MatrixNorms {
  double frobenius = 0.0;
  double spectral = 0.0;
  double infinity = 0.0;
  bool spectral_converged = true;
  int power_iterations = 0;
};

struct WeightedEdge {
  Index i = 0;
  Index j = 0;
  double weight = 1.0;
};

struct PowerIterationOptions {
  int max_iterations = 1000;
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eedULL;
};

/// Symmetric n x n interaction matrix A, immutable after construction.
///
/// Two storage layouts share one interface: compressed sparse rows for
/// general graphs, and a block-uniform layout (contiguous equal blocks with
/// one constant value, diagonal included) for block partitions and the
/// Curie-Weiss matrix, so that dense n = 8000 instances stay O(n).
///
/// Copies are cheap and share the underlying storage.
class InteractionMatrix {
 public:
  using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  InteractionMatrix();

  /// r contiguous blocks of size n/r, every in-block entry (diagonal too) r/n.
  static InteractionMatrix block_partition(Index n, Index r);
  /// All entries 1/n.
  static InteractionMatrix curie_weiss(Index n);
  /// 0/1 adjacency of an undirected graph divided by its maximum degree.
  static InteractionMatrix from_adjacency(std::span<const std::pair<Index, Index>> edges,
                                          Index n);
  /// Weighted symmetric matrix; each edge (i, j, w) sets A_ij = A_ji = w.
  /// Repeated pairs accumulate. Diagonal entries are allowed.
  static InteractionMatrix from_weighted_edges(std::span<const WeightedEdge> edges, Index n);
  static InteractionMatrix from_dense(const Eigen::MatrixXd& dense, double symmetry_tol = 1e-12);

  InteractionMatrix scaled(double factor) const;
  /// Copy rescaled so that the infinity norm is exactly one.
  InteractionMatrix normalized() const;

  Index size() const noexcept;
  bool is_block_uniform() const noexcept;
  Index block_size() const;
  double block_value() const;
  Index block_of(Index i) const;
  const SparseRows& sparse() const;

  double entry(Index i, Index j) const;

  /// (A v)_i restricted to j != i. Accepts any real vector, not only spins.
  Eigen::VectorXd local_field(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  /// Column-wise local_field.
  Eigen::MatrixXd local_field_columns(const Eigen::Ref<const Eigen::MatrixXd>& v) const;
  /// Full product A v including stored diagonal entries.
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& v) const;

  Eigen::MatrixXd to_dense() const;
  /// Stored entries with i <= j, in row-major order.
  std::vector<WeightedEdge> upper_entries() const;

  const MatrixNorms& cached_norms() const noexcept;

 private:
  struct Storage;
  explicit InteractionMatrix(std::shared_ptr<const Storage> storage);
  std::shared_ptr<const Storage> data_;
};

/// Frobenius, spectral (power iteration on A^2) and infinity norms.
/// Throws NumericalError when power iteration hits its iteration cap.
MatrixNorms norms(const InteractionMatrix& a);

/// Largest absolute eigenvalue of a symmetric operator given as y = A x.
MatrixNorms power_iteration_spectral(const InteractionMatrix& a,
                                     const PowerIterationOptions& options = {});

/// Edge-list text: one "i j [weight]" per line, 0-indexed; '#' starts a comment.
std::vector<WeightedEdge> read_edge_list(std::istream& in);
std::vector<WeightedEdge> read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, std::span<const WeightedEdge> edges);

}  // namespace depreg
