#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "depreg/interaction.hpp"
#include "depreg/ising.hpp"
#include "depreg/models.hpp"

namespace depreg {

struct Splits {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

struct GroundTruth {
  Eigen::MatrixXd theta;  ///< d x 1 for spins, d x K for classes
  double beta = 0.0;
  Index clipped = 0;      ///< field entries clipped to [-M, M] during generation
};

enum class LabelKind { spin, class_id };

struct Dataset {
  FeatureMatrix X;
  Eigen::VectorXi labels;  ///< +/-1 spins or class ids 0..K-1
  LabelKind label_kind = LabelKind::spin;
  int num_classes = 2;
  InteractionMatrix A;
  /// The edge list as read or generated; empty for block / Curie-Weiss matrices.
  std::vector<std::pair<Index, Index>> edges;
  std::optional<Splits> splits;
  std::optional<GroundTruth> ground_truth;

  Index size() const { return labels.size(); }
  Eigen::VectorXd spins() const;
};

/// Disjoint, in range, and matching the dataset size.
void validate_splits(const Splits& splits, Index n);

struct MatrixSpec {
  enum class Kind { block, curie_weiss, edges };
  Kind kind = Kind::block;
  Index blocks = 1;
  std::vector<std::pair<Index, Index>> edges;
};

enum class FeatureLaw { gaussian, given, ones };

struct SyntheticSpec {
  Index n = 100;
  Index d = 1;
  MatrixSpec matrix;
  /// Drawn uniformly on the sphere of radius theta_norm when absent.
  std::optional<Eigen::VectorXd> theta_star;
  double theta_norm = 1.0;
  double beta_star = 0.0;
  FeatureLaw feature_law = FeatureLaw::gaussian;
  std::optional<FeatureMatrix> given_X;
  GibbsOptions gibbs{200, 1, 1, 0};
  double clip = 5.0;
  std::uint64_t seed = 0;
};

InteractionMatrix build_matrix(const MatrixSpec& spec, Index n);

/// Features, h* = X theta* clipped to [-clip, clip], spins from one Gibbs chain.
/// Throws ConfigError when more than 10% of the field entries need clipping.
Dataset gen_synthetic(const SyntheticSpec& spec);

struct PlantedPottsSpec {
  Index n = 200;
  int classes = 2;
  Index d = 8;
  /// 0: each node draws `degree` uniform partners (duplicates and self-pairs dropped).
  /// m >= 2: nodes are shuffled into disjoint cliques of m (the last one may be smaller).
  Index clique_size = 2;
  Index degree = 4;
  /// Columns of theta* are drawn on the sphere of this radius.
  double field_scale = 0.1;
  double beta_star = 0.5;
  GibbsOptions gibbs{200, 1, 1, 0};
  std::uint64_t seed = 0;
};

/// Random sparse graph, Gaussian features, linear class fields, labels from the
/// Potts chain, stratified 60/20/20 splits.
Dataset gen_planted_potts(const PlantedPottsSpec& spec);

struct CitationPaths {
  std::string nodes;
  std::string edges;
  std::string splits;
};

struct DatasetCounts {
  int classes = 0;
  Index nodes = 0;
  Index edges = 0;
  Index features = 0;
};

/// nodes.csv `id,label,f1..fd`, edges.txt `i j` per line, splits.json with
/// train/val/test arrays. Ids must be exactly 0..n-1 in any order.
Dataset load_citation(const CitationPaths& paths);
/// Canonical writer: shortest round-trip decimal features, rows sorted by id.
void save_citation(const Dataset& data, const CitationPaths& paths);
DatasetCounts counts(const Dataset& data);

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

/// Per-class shuffled partition. Classes with fewer than three members go to
/// train; their ids are appended to `warnings` when it is non-null.
Splits make_splits(const Eigen::VectorXi& labels, const SplitFractions& fractions,
                   bool stratified, std::uint64_t seed,
                   std::vector<std::string>* warnings = nullptr);

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

/// Header f1..fd, one row per node.
void write_features_csv(const std::string& path, const FeatureMatrix& x);
FeatureMatrix read_features_csv(const std::string& path);

void write_spins_csv(const std::string& path, const Eigen::VectorXd& spins);
Eigen::VectorXd read_spins_csv(const std::string& path);

}  // namespace depreg
