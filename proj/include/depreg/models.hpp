#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace depreg {

using FeatureMatrix = Eigen::MatrixXd;  ///< n x d, one observation per row.

enum class ModelKind { linear, sparse_linear, mlp2 };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct Constraints {
  double l2_radius = 1.0;
  std::optional<double> l1_radius;
  double beta_box = 1.0;
};

/// f_theta mapping feature rows to K output fields.
///
/// Parameters live in one flat vector so the optimizer sees a single point:
///   linear / sparse_linear : vec(Theta), Theta is d x K (K = 1 gives theta in R^d)
///   mlp2                   : [vec(W1) ; vec(W2)], W1 is width x d, W2 is K x width,
///                            f(x) = W2 relu(W1 x)
class FunctionClassModel {
 public:
  FunctionClassModel() = default;
  static FunctionClassModel linear(Eigen::Index input_dim, Eigen::Index outputs = 1,
                                   Constraints constraints = {});
  static FunctionClassModel sparse_linear(Eigen::Index input_dim, double l1_radius,
                                          Eigen::Index outputs = 1, Constraints constraints = {});
  /// Glorot-uniform initialization from `seed`.
  static FunctionClassModel mlp2(Eigen::Index input_dim, Eigen::Index hidden, Eigen::Index outputs,
                                 std::uint64_t seed, Constraints constraints = {});

  ModelKind kind() const noexcept { return kind_; }
  Eigen::Index input_dim() const noexcept { return input_dim_; }
  Eigen::Index outputs() const noexcept { return outputs_; }
  Eigen::Index hidden() const noexcept { return hidden_; }
  Eigen::Index parameter_count() const noexcept { return theta_.size(); }

  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  void set_theta(const Eigen::VectorXd& theta);
  const Constraints& constraints() const noexcept { return constraints_; }
  void set_constraints(const Constraints& constraints);

  /// n x K field matrix at the stored parameters.
  Eigen::MatrixXd eval(const FeatureMatrix& x) const { return eval(x, theta_); }
  Eigen::MatrixXd eval(const FeatureMatrix& x, const Eigen::VectorXd& theta) const;
  /// Column 0 of eval, for scalar-output models.
  Eigen::VectorXd eval_field(const FeatureMatrix& x, const Eigen::VectorXd& theta) const;

  /// Gradient of sum_{i,k} upstream(i,k) * f_theta(x_i)_k with respect to theta.
  /// ReLU subgradient at 0 is 0.
  Eigen::VectorXd param_grad(const FeatureMatrix& x, const Eigen::MatrixXd& upstream,
                             const Eigen::VectorXd& theta) const;

 private:
  ModelKind kind_ = ModelKind::linear;
  Eigen::Index input_dim_ = 0;
  Eigen::Index outputs_ = 1;
  Eigen::Index hidden_ = 0;
  Eigen::VectorXd theta_;
  Constraints constraints_;

  void check_inputs(const FeatureMatrix& x, const Eigen::VectorXd& theta) const;
};

/// Euclidean projection onto the L1 ball (sort-based soft threshold).
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);
/// L2-ball radial scaling, then L1-ball projection when an L1 radius is set.
Eigen::VectorXd project(const Eigen::VectorXd& theta, const Constraints& constraints);

}  // namespace depreg
