#pragma once

#include <vector>

#include <Eigen/Core>

#include "depreg/interaction.hpp"

namespace depreg::detail {

// Off-diagonal neighbor sums for single-site samplers. Block-uniform matrices
// keep running block totals so a site update is O(1); sparse matrices read the
// row on demand.
class SpinFieldTracker {
 public:
  SpinFieldTracker(const InteractionMatrix& a, const Eigen::VectorXd& state) : a_(a) {
    if (a_.is_block_uniform()) {
      const Index blocks = a_.size() / a_.block_size();
      totals_.assign(static_cast<std::size_t>(blocks), 0.0);
      for (Index i = 0; i < a_.size(); ++i) totals_[static_cast<std::size_t>(a_.block_of(i))] += state(i);
    }
  }

  double field(Index i, const Eigen::VectorXd& state) const {
    if (a_.is_block_uniform()) {
      return a_.block_value() * (totals_[static_cast<std::size_t>(a_.block_of(i))] - state(i));
    }
    double acc = 0.0;
    for (InteractionMatrix::SparseRows::InnerIterator it(a_.sparse(), i); it; ++it) {
      if (it.col() != i) acc += it.value() * state(it.col());
    }
    return acc;
  }

  void changed(Index i, double delta) {
    if (a_.is_block_uniform()) totals_[static_cast<std::size_t>(a_.block_of(i))] += delta;
  }

 private:
  const InteractionMatrix& a_;
  std::vector<double> totals_;
};

// Per-class neighbor sums sum_{j != i} A_ij 1[y_j = k] for the Potts sampler.
class ClassFieldTracker {
 public:
  ClassFieldTracker(const InteractionMatrix& a, const Eigen::VectorXi& labels, int classes)
      : a_(a), classes_(classes) {
    if (a_.is_block_uniform()) {
      const Index blocks = a_.size() / a_.block_size();
      counts_ = Eigen::MatrixXd::Zero(blocks, classes);
      for (Index i = 0; i < a_.size(); ++i) counts_(a_.block_of(i), labels(i)) += 1.0;
    }
  }

  Eigen::VectorXd field(Index i, const Eigen::VectorXi& labels) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(classes_);
    if (a_.is_block_uniform()) {
      out = a_.block_value() * counts_.row(a_.block_of(i)).transpose();
      out(labels(i)) -= a_.block_value();
      return out;
    }
    for (InteractionMatrix::SparseRows::InnerIterator it(a_.sparse(), i); it; ++it) {
      if (it.col() != i) out(labels(it.col())) += it.value();
    }
    return out;
  }

  void changed(Index i, int old_label, int new_label) {
    if (!a_.is_block_uniform() || old_label == new_label) return;
    counts_(a_.block_of(i), old_label) -= 1.0;
    counts_(a_.block_of(i), new_label) += 1.0;
  }

 private:
  const InteractionMatrix& a_;
  int classes_;
  Eigen::MatrixXd counts_;
};

}  // namespace depreg::detail
