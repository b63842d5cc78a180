#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "depreg/interaction.hpp"
#include "depreg/ising.hpp"
#include "depreg/models.hpp"

namespace depreg {

/// Data of the binary pseudo-likelihood: features, observed spins, and the
/// neighbor statistic (A sigma)_i (off-diagonal) for every observed site.
struct PLProblem {
  FeatureMatrix X;
  SpinVector sigma;
  Eigen::VectorXd local_field;
  FunctionClassModel model;

  static PLProblem build(const InteractionMatrix& a, FeatureMatrix x, SpinVector sigma,
                         FunctionClassModel model);
  /// Sites `sites` only, with neighbor sums over the partially known spins
  /// (`known` holds +/-1 for known sites and 0 elsewhere).
  static PLProblem from_partial(const InteractionMatrix& a, const FeatureMatrix& x,
                                const Eigen::VectorXd& known, std::span<const Index> sites,
                                FunctionClassModel model);

  Index size() const { return sigma.size(); }
};

struct PLEvaluation {
  double value = 0.0;
  Eigen::VectorXd grad_theta;
  double grad_beta = 0.0;
};

/// Negative log pseudo-likelihood sum_i [log 2cosh(m_i) - sigma_i m_i] with
/// m_i = f_theta(x_i) + beta (A sigma)_i, and its gradient.
PLEvaluation neg_log_pl(const PLProblem& problem, const Eigen::VectorXd& theta, double beta);

struct FitOptions {
  /// Hold beta fixed at this value (0 gives the independent-label MPLE-0).
  std::optional<double> beta_frozen;
  double step = 1.0;
  int max_iters = 10000;
  double tol = 1e-8;
  double armijo = 1e-4;
  std::optional<Eigen::VectorXd> theta_start;
  double beta_start = 0.0;
  bool record_trace = false;
};

struct FitResult {
  Eigen::VectorXd theta_hat;
  double beta_hat = 0.0;
  double objective_value = 0.0;
  int iterations = 0;
  double final_projected_grad_norm = 0.0;
  bool converged = false;
  bool stalled = false;
  std::vector<double> objective_trace;
};

FitResult fit(const PLProblem& problem, const FitOptions& options = {});

/// sign(f_theta(x_i) + beta * sum_{j known} A_ij y_j) for every target; ties go to +1.
/// `known` holds +/-1 on labelled sites and 0 elsewhere.
SpinVector predict_binary(const InteractionMatrix& a, const FeatureMatrix& x,
                          const FunctionClassModel& model, const Eigen::VectorXd& theta,
                          double beta, const Eigen::VectorXd& known,
                          std::span<const Index> targets);

}  // namespace depreg
