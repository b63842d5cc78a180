#include "depreg/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "depreg/error.hpp"

namespace depreg {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::linear:
      return "linear";
    case ModelKind::sparse_linear:
      return "sparse";
    case ModelKind::mlp2:
      return "mlp";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::linear;
  if (name == "sparse" || name == "sparse_linear") return ModelKind::sparse_linear;
  if (name == "mlp" || name == "mlp2") return ModelKind::mlp2;
  throw ConfigError("unknown model kind '" + name + "' (expected linear, sparse or mlp)");
}

namespace {

void check_constraints(const Constraints& c) {
  require(c.l2_radius >= 0.0, "constraints: negative l2 radius");
  require(!c.l1_radius || *c.l1_radius >= 0.0, "constraints: negative l1 radius");
  require(c.beta_box >= 0.0, "constraints: negative beta box");
}

}  // namespace

FunctionClassModel FunctionClassModel::linear(Eigen::Index input_dim, Eigen::Index outputs,
                                              Constraints constraints) {
  require(input_dim >= 1 && outputs >= 1, "linear model: dimensions must be positive");
  check_constraints(constraints);
  FunctionClassModel m;
  m.kind_ = ModelKind::linear;
  m.input_dim_ = input_dim;
  m.outputs_ = outputs;
  m.theta_ = Eigen::VectorXd::Zero(input_dim * outputs);
  m.constraints_ = constraints;
  return m;
}

FunctionClassModel FunctionClassModel::sparse_linear(Eigen::Index input_dim, double l1_radius,
                                                     Eigen::Index outputs,
                                                     Constraints constraints) {
  constraints.l1_radius = l1_radius;
  FunctionClassModel m = linear(input_dim, outputs, constraints);
  m.kind_ = ModelKind::sparse_linear;
  return m;
}

FunctionClassModel FunctionClassModel::mlp2(Eigen::Index input_dim, Eigen::Index hidden,
                                            Eigen::Index outputs, std::uint64_t seed,
                                            Constraints constraints) {
  require(input_dim >= 1 && hidden >= 1 && outputs >= 1, "mlp2: dimensions must be positive");
  check_constraints(constraints);
  FunctionClassModel m;
  m.kind_ = ModelKind::mlp2;
  m.input_dim_ = input_dim;
  m.hidden_ = hidden;
  m.outputs_ = outputs;
  m.constraints_ = constraints;
  m.theta_.resize(hidden * input_dim + outputs * hidden);
  std::mt19937_64 rng(seed);
  const double a1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + outputs));
  std::uniform_real_distribution<double> u1(-a1, a1);
  std::uniform_real_distribution<double> u2(-a2, a2);
  const Eigen::Index split = hidden * input_dim;
  for (Eigen::Index k = 0; k < split; ++k) m.theta_(k) = u1(rng);
  for (Eigen::Index k = split; k < m.theta_.size(); ++k) m.theta_(k) = u2(rng);
  return m;
}

void FunctionClassModel::set_theta(const Eigen::VectorXd& theta) {
  require(theta.size() == theta_.size(), "set_theta: parameter count mismatch");
  theta_ = theta;
}

void FunctionClassModel::set_constraints(const Constraints& constraints) {
  check_constraints(constraints);
  constraints_ = constraints;
}

void FunctionClassModel::check_inputs(const FeatureMatrix& x, const Eigen::VectorXd& theta) const {
  require(x.cols() == input_dim_, "model: feature dimension " + std::to_string(x.cols()) +
                                      " does not match model input " + std::to_string(input_dim_));
  require(theta.size() == theta_.size(), "model: parameter count mismatch");
}

Eigen::MatrixXd FunctionClassModel::eval(const FeatureMatrix& x, const Eigen::VectorXd& theta) const {
  check_inputs(x, theta);
  if (kind_ != ModelKind::mlp2) {
    return x * theta.reshaped(input_dim_, outputs_);
  }
  const auto w1 = theta.head(hidden_ * input_dim_).reshaped(hidden_, input_dim_);
  const auto w2 = theta.tail(outputs_ * hidden_).reshaped(outputs_, hidden_);
  const Eigen::MatrixXd pre = x * w1.transpose();
  return pre.cwiseMax(0.0) * w2.transpose();
}

Eigen::VectorXd FunctionClassModel::eval_field(const FeatureMatrix& x,
                                               const Eigen::VectorXd& theta) const {
  return eval(x, theta).col(0);
}

Eigen::VectorXd FunctionClassModel::param_grad(const FeatureMatrix& x,
                                               const Eigen::MatrixXd& upstream,
                                               const Eigen::VectorXd& theta) const {
  check_inputs(x, theta);
  require(upstream.rows() == x.rows() && upstream.cols() == outputs_,
          "param_grad: upstream must be n x K");
  if (kind_ != ModelKind::mlp2) {
    Eigen::MatrixXd g = x.transpose() * upstream;
    return g.reshaped();
  }
  const auto w1 = theta.head(hidden_ * input_dim_).reshaped(hidden_, input_dim_);
  const auto w2 = theta.tail(outputs_ * hidden_).reshaped(outputs_, hidden_);
  const Eigen::MatrixXd pre = x * w1.transpose();
  const Eigen::MatrixXd act = pre.cwiseMax(0.0);
  const Eigen::MatrixXd grad_w2 = upstream.transpose() * act;
  const Eigen::MatrixXd grad_act = upstream * w2;
  const Eigen::MatrixXd grad_pre = (pre.array() > 0.0).select(grad_act, 0.0);
  const Eigen::MatrixXd grad_w1 = grad_pre.transpose() * x;
  Eigen::VectorXd out(theta.size());
  out.head(hidden_ * input_dim_) = grad_w1.reshaped();
  out.tail(outputs_ * hidden_) = grad_w2.reshaped();
  return out;
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  require(radius >= 0.0, "project_l1_ball: negative radius");
  if (v.lpNorm<1>() <= radius) return v;
  if (radius == 0.0) return Eigen::VectorXd::Zero(v.size());
  std::vector<double> mags(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) mags[static_cast<std::size_t>(k)] = std::abs(v(k));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (mags[k] > candidate) threshold = candidate;
  }
  return v.unaryExpr([threshold](double x) {
    const double mag = std::max(std::abs(x) - threshold, 0.0);
    return x < 0.0 ? -mag : mag;
  });
}

Eigen::VectorXd project(const Eigen::VectorXd& theta, const Constraints& constraints) {
  check_constraints(constraints);
  Eigen::VectorXd out = theta;
  const double norm = out.norm();
  if (norm > constraints.l2_radius) {
    out *= constraints.l2_radius / norm;
  }
  if (constraints.l1_radius) out = project_l1_ball(out, *constraints.l1_radius);
  return out;
}

}  // namespace depreg
