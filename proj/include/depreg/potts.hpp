#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "depreg/interaction.hpp"
#include "depreg/ising.hpp"
#include "depreg/mple.hpp"
#include "depreg/models.hpp"

namespace depreg {

/// Class labels in {0..K-1}; -1 marks an unknown label where partial labels are allowed.
using LabelVector = Eigen::VectorXi;

/// N(i,k) = sum_{j != i, y_j known} A_ij 1[y_j = k].
Eigen::MatrixXd class_neighbor_sums(const InteractionMatrix& a, const LabelVector& labels,
                                    int classes);

/// K-class pseudo-likelihood data. One inverse temperature is shared by all classes.
struct PottsProblem {
  int classes = 2;
  FeatureMatrix X;
  LabelVector y;
  Eigen::MatrixXd neighbor_sums;  ///< n x K
  FunctionClassModel model;       ///< K outputs

  static PottsProblem build(const InteractionMatrix& a, FeatureMatrix x, LabelVector y,
                            int classes, FunctionClassModel model);
  /// Sites `sites` only; neighbor sums use the labels that are known (>= 0).
  static PottsProblem from_partial(const InteractionMatrix& a, const FeatureMatrix& x,
                                   const LabelVector& known, std::span<const Index> sites,
                                   int classes, FunctionClassModel model);

  Index size() const { return y.size(); }
};

/// softmax_k( f_theta(x_i)_k + beta N(i,k) ).
Eigen::VectorXd potts_conditional(const PottsProblem& problem, const Eigen::VectorXd& theta,
                                  double beta, Index i);

struct PottsEvaluation {
  double value = 0.0;
  Eigen::VectorXd grad_theta;
  double grad_beta = 0.0;
};

/// -sum_i log P[y_i | x, y_{-i}] and its gradient.
PottsEvaluation potts_objective_grad(const PottsProblem& problem, const Eigen::VectorXd& theta,
                                     double beta);

/// Systematic-scan Gibbs sampler for P[y] ∝ exp(sum_i F(i, y_i) + (beta/2) sum_{i != j} A_ij 1[y_i = y_j]).
/// `fields` is n x K.
std::vector<LabelVector> gibbs_sample_potts(const InteractionMatrix& a,
                                            const Eigen::MatrixXd& fields, double beta,
                                            const GibbsOptions& options);

FitResult fit_potts(const PottsProblem& problem, const FitOptions& options = {});

/// argmax_k f_theta(x_i)_k + beta sum_{j known} A_ij 1[y_j = k]; ties go to the lowest k.
LabelVector predict_class(const InteractionMatrix& a, const FeatureMatrix& x,
                          const FunctionClassModel& model, const Eigen::VectorXd& theta,
                          double beta, const LabelVector& known, int classes,
                          std::span<const Index> targets);

}  // namespace depreg
