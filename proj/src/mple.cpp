#include "depreg/mple.hpp"

#include <algorithm>
#include <cmath>

#include "depreg/error.hpp"
#include "depreg/numeric.hpp"
#include "depreg/optimize.hpp"

namespace depreg {

PLProblem PLProblem::build(const InteractionMatrix& a, FeatureMatrix x, SpinVector sigma,
                           FunctionClassModel model) {
  require(model.outputs() == 1, "PLProblem: binary model must have one output");
  validate_spins(sigma, a.size());
  require(x.rows() == a.size(), "PLProblem: feature rows do not match matrix size");
  require(x.cols() == model.input_dim(), "PLProblem: feature columns do not match model");
  PLProblem p;
  p.local_field = a.local_field(sigma);
  p.X = std::move(x);
  p.sigma = std::move(sigma);
  p.model = std::move(model);
  return p;
}

PLProblem PLProblem::from_partial(const InteractionMatrix& a, const FeatureMatrix& x,
                                  const Eigen::VectorXd& known, std::span<const Index> sites,
                                  FunctionClassModel model) {
  require(model.outputs() == 1, "PLProblem: binary model must have one output");
  require(known.size() == a.size() && x.rows() == a.size(),
          "PLProblem: partial labels and features must cover every node");
  const Eigen::VectorXd field = a.local_field(known);
  PLProblem p;
  const auto m = static_cast<Index>(sites.size());
  p.X.resize(m, x.cols());
  p.sigma.resize(m);
  p.local_field.resize(m);
  for (Index k = 0; k < m; ++k) {
    const Index i = sites[static_cast<std::size_t>(k)];
    require(i >= 0 && i < a.size(), "PLProblem: site index out of range");
    require(known(i) == 1.0 || known(i) == -1.0, "PLProblem: training site without a label");
    p.X.row(k) = x.row(i);
    p.sigma(k) = known(i);
    p.local_field(k) = field(i);
  }
  p.model = std::move(model);
  return p;
}

PLEvaluation neg_log_pl(const PLProblem& problem, const Eigen::VectorXd& theta, double beta) {
  require(problem.X.rows() == problem.sigma.size() &&
              problem.local_field.size() == problem.sigma.size(),
          "neg_log_pl: inconsistent problem dimensions");
  const Eigen::VectorXd m = problem.model.eval_field(problem.X, theta) + beta * problem.local_field;
  PLEvaluation out;
  out.value = log2cosh(m.array()).sum() - problem.sigma.dot(m);
  const Eigen::VectorXd residual = m.array().tanh().matrix() - problem.sigma;
  out.grad_beta = problem.local_field.dot(residual);
  out.grad_theta = problem.model.param_grad(problem.X, residual, theta);
  return out;
}

namespace {

double value_only(const PLProblem& problem, const Eigen::VectorXd& theta, double beta) {
  const Eigen::VectorXd m = problem.model.eval_field(problem.X, theta) + beta * problem.local_field;
  return log2cosh(m.array()).sum() - problem.sigma.dot(m);
}

}  // namespace

FitResult fit(const PLProblem& problem, const FitOptions& options) {
  const Constraints& c = problem.model.constraints();
  const Index p = problem.model.parameter_count();
  const bool frozen = options.beta_frozen.has_value();
  const double beta_box = c.beta_box;
  if (frozen) {
    require(std::abs(*options.beta_frozen) <= beta_box, "fit: frozen beta outside [-B, B]");
  }

  Eigen::VectorXd start(frozen ? p : p + 1);
  start.head(p) = options.theta_start ? *options.theta_start : problem.model.theta();
  require(start.head(p).size() == p, "fit: theta_start has the wrong size");
  if (!frozen) start(p) = options.beta_start;

  Objective objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    const double beta = frozen ? *options.beta_frozen : z(p);
    const Eigen::VectorXd theta = z.head(p);
    if (!grad) return value_only(problem, theta, beta);
    PLEvaluation e = neg_log_pl(problem, theta, beta);
    grad->resize(z.size());
    grad->head(p) = e.grad_theta;
    if (!frozen) (*grad)(p) = e.grad_beta;
    return e.value;
  };
  Projection projection = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(z.size());
    out.head(p) = project(z.head(p), c);
    if (!frozen) out(p) = std::clamp(z(p), -beta_box, beta_box);
    return out;
  };

  DescentOptions d;
  d.initial_step = options.step;
  d.max_iters = options.max_iters;
  d.tol = options.tol;
  d.armijo = options.armijo;
  d.record_trace = options.record_trace;
  DescentResult r = projected_gradient_descent(objective, projection, start, d);

  FitResult out;
  out.theta_hat = r.point.head(p);
  out.beta_hat = frozen ? *options.beta_frozen : r.point(p);
  out.objective_value = r.value;
  out.iterations = r.iterations;
  out.final_projected_grad_norm = r.projected_grad_norm;
  out.converged = r.converged;
  out.stalled = r.stalled;
  out.objective_trace = std::move(r.trace);
  return out;
}

SpinVector predict_binary(const InteractionMatrix& a, const FeatureMatrix& x,
                          const FunctionClassModel& model, const Eigen::VectorXd& theta,
                          double beta, const Eigen::VectorXd& known,
                          std::span<const Index> targets) {
  require(known.size() == a.size() && x.rows() == a.size(),
          "predict_binary: labels and features must cover every node");
  for (Index i = 0; i < known.size(); ++i) {
    require(known(i) == 0.0 || known(i) == 1.0 || known(i) == -1.0,
            "predict_binary: known labels must be -1, 0 (unknown) or +1");
  }
  const Eigen::VectorXd field = model.eval_field(x, theta);
  const Eigen::VectorXd neighbors = a.local_field(known);
  SpinVector out(static_cast<Index>(targets.size()));
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const Index i = targets[k];
    require(i >= 0 && i < a.size(), "predict_binary: target index out of range");
    require(known(i) == 0.0, "predict_binary: target " + std::to_string(i) + " has a known label");
    out(static_cast<Index>(k)) = sign_with_tie_positive(std::tanh(field(i) + beta * neighbors(i)));
  }
  return out;
}

}  // namespace depreg
