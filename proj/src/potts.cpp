#include "depreg/potts.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "depreg/error.hpp"
#include "depreg/numeric.hpp"
#include "depreg/optimize.hpp"
#include "neighbor_tracker.hpp"

namespace depreg {

namespace {

void check_labels(const LabelVector& labels, int classes, bool allow_unknown) {
  for (Index i = 0; i < labels.size(); ++i) {
    const int y = labels(i);
    require((y >= 0 && y < classes) || (allow_unknown && y == -1),
            "label " + std::to_string(y) + " at node " + std::to_string(i) + " outside 0.." +
                std::to_string(classes - 1));
  }
}

Eigen::MatrixXd row_logits(const PottsProblem& problem, const Eigen::VectorXd& theta, double beta) {
  return problem.model.eval(problem.X, theta) + beta * problem.neighbor_sums;
}

}  // namespace

Eigen::MatrixXd class_neighbor_sums(const InteractionMatrix& a, const LabelVector& labels,
                                    int classes) {
  require(classes >= 2, "class_neighbor_sums: need at least two classes");
  require(labels.size() == a.size(), "class_neighbor_sums: label length mismatch");
  check_labels(labels, classes, true);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(a.size(), classes);
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels(i) >= 0) onehot(i, labels(i)) = 1.0;
  }
  return a.local_field_columns(onehot);
}

PottsProblem PottsProblem::build(const InteractionMatrix& a, FeatureMatrix x, LabelVector y,
                                 int classes, FunctionClassModel model) {
  require(classes >= 2, "PottsProblem: need at least two classes");
  require(model.outputs() == classes, "PottsProblem: model output dimension must equal K");
  require(y.size() == a.size() && x.rows() == a.size(),
          "PottsProblem: labels and features must cover every node");
  require(x.cols() == model.input_dim(), "PottsProblem: feature columns do not match model");
  check_labels(y, classes, false);
  PottsProblem p;
  p.classes = classes;
  p.neighbor_sums = class_neighbor_sums(a, y, classes);
  p.X = std::move(x);
  p.y = std::move(y);
  p.model = std::move(model);
  return p;
}

PottsProblem PottsProblem::from_partial(const InteractionMatrix& a, const FeatureMatrix& x,
                                        const LabelVector& known, std::span<const Index> sites,
                                        int classes, FunctionClassModel model) {
  require(model.outputs() == classes, "PottsProblem: model output dimension must equal K");
  require(known.size() == a.size() && x.rows() == a.size(),
          "PottsProblem: labels and features must cover every node");
  const Eigen::MatrixXd sums = class_neighbor_sums(a, known, classes);
  PottsProblem p;
  p.classes = classes;
  const auto m = static_cast<Index>(sites.size());
  p.X.resize(m, x.cols());
  p.y.resize(m);
  p.neighbor_sums.resize(m, classes);
  for (Index k = 0; k < m; ++k) {
    const Index i = sites[static_cast<std::size_t>(k)];
    require(i >= 0 && i < a.size(), "PottsProblem: site index out of range");
    require(known(i) >= 0, "PottsProblem: training site without a label");
    p.X.row(k) = x.row(i);
    p.y(k) = known(i);
    p.neighbor_sums.row(k) = sums.row(i);
  }
  p.model = std::move(model);
  return p;
}

Eigen::VectorXd potts_conditional(const PottsProblem& problem, const Eigen::VectorXd& theta,
                                  double beta, Index i) {
  require(i >= 0 && i < problem.size(), "potts_conditional: site index out of range");
  const Eigen::MatrixXd f = problem.model.eval(problem.X.row(i), theta);
  return softmax(f.row(0) + beta * problem.neighbor_sums.row(i));
}

PottsEvaluation potts_objective_grad(const PottsProblem& problem, const Eigen::VectorXd& theta,
                                     double beta) {
  require(problem.X.rows() == problem.y.size() &&
              problem.neighbor_sums.rows() == problem.y.size() &&
              problem.neighbor_sums.cols() == problem.classes,
          "potts_objective_grad: inconsistent problem dimensions");
  const Eigen::MatrixXd logits = row_logits(problem, theta, beta);
  const Index n = logits.rows();
  Eigen::MatrixXd residual(n, problem.classes);
  PottsEvaluation out;
  for (Index i = 0; i < n; ++i) {
    const double top = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - top).exp();
    const double z = e.sum();
    out.value += top + std::log(z) - logits(i, problem.y(i));
    residual.row(i) = e / z;
    residual(i, problem.y(i)) -= 1.0;
  }
  out.grad_beta = (residual.array() * problem.neighbor_sums.array()).sum();
  out.grad_theta = problem.model.param_grad(problem.X, residual, theta);
  return out;
}

std::vector<LabelVector> gibbs_sample_potts(const InteractionMatrix& a,
                                            const Eigen::MatrixXd& fields, double beta,
                                            const GibbsOptions& options) {
  require(options.count >= 1, "gibbs_sample_potts: count must be at least 1");
  require(options.thin >= 1, "gibbs_sample_potts: thin must be at least 1");
  require(options.burn_in >= 0, "gibbs_sample_potts: burn_in must be nonnegative");
  require(fields.rows() == a.size(), "gibbs_sample_potts: fields must have one row per node");
  const int classes = static_cast<int>(fields.cols());
  require(classes >= 2, "gibbs_sample_potts: need at least two classes");
  const Index n = a.size();

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LabelVector state(n);
  for (Index i = 0; i < n; ++i) {
    state(i) = std::min(classes - 1, static_cast<int>(unif(rng) * classes));
  }
  detail::ClassFieldTracker tracker(a, state, classes);
  Eigen::VectorXd cumulative(classes);
  auto sweep = [&] {
    for (Index i = 0; i < n; ++i) {
      const Eigen::VectorXd p = softmax(fields.row(i).transpose() + beta * tracker.field(i, state));
      const double u = unif(rng);
      int next = classes - 1;
      double acc = 0.0;
      for (int k = 0; k < classes; ++k) {
        acc += p(k);
        if (u < acc) {
          next = k;
          break;
        }
      }
      if (next != state(i)) {
        tracker.changed(i, state(i), next);
        state(i) = next;
      }
    }
  };
  for (int s = 0; s < options.burn_in; ++s) sweep();
  std::vector<LabelVector> out;
  out.reserve(static_cast<std::size_t>(options.count));
  for (int c = 0; c < options.count; ++c) {
    for (int s = 0; s < options.thin; ++s) sweep();
    out.push_back(state);
  }
  return out;
}

FitResult fit_potts(const PottsProblem& problem, const FitOptions& options) {
  const Constraints& c = problem.model.constraints();
  const Index p = problem.model.parameter_count();
  const bool frozen = options.beta_frozen.has_value();
  if (frozen) {
    require(std::abs(*options.beta_frozen) <= c.beta_box, "fit_potts: frozen beta outside [-B, B]");
  }
  Eigen::VectorXd start(frozen ? p : p + 1);
  start.head(p) = options.theta_start ? *options.theta_start : problem.model.theta();
  if (!frozen) start(p) = options.beta_start;

  Objective objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    const double beta = frozen ? *options.beta_frozen : z(p);
    PottsEvaluation e = potts_objective_grad(problem, z.head(p), beta);
    if (grad) {
      grad->resize(z.size());
      grad->head(p) = e.grad_theta;
      if (!frozen) (*grad)(p) = e.grad_beta;
    }
    return e.value;
  };
  Projection projection = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(z.size());
    out.head(p) = project(z.head(p), c);
    if (!frozen) out(p) = std::clamp(z(p), -c.beta_box, c.beta_box);
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

LabelVector predict_class(const InteractionMatrix& a, const FeatureMatrix& x,
                          const FunctionClassModel& model, const Eigen::VectorXd& theta,
                          double beta, const LabelVector& known, int classes,
                          std::span<const Index> targets) {
  require(model.outputs() == classes, "predict_class: model output dimension must equal K");
  require(known.size() == a.size() && x.rows() == a.size(),
          "predict_class: labels and features must cover every node");
  const Eigen::MatrixXd sums = class_neighbor_sums(a, known, classes);
  const Eigen::MatrixXd f = model.eval(x, theta);
  LabelVector out(static_cast<Index>(targets.size()));
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const Index i = targets[k];
    require(i >= 0 && i < a.size(), "predict_class: target index out of range");
    require(known(i) == -1, "predict_class: target " + std::to_string(i) + " has a known label");
    const Eigen::RowVectorXd score = f.row(i) + beta * sums.row(i);
    Index best = 0;
    for (Index c = 1; c < classes; ++c) {
      if (score(c) > score(best)) best = c;
    }
    out(static_cast<Index>(k)) = static_cast<int>(best);
  }
  return out;
}

}  // namespace depreg
