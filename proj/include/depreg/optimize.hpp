#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace depreg {

/// Value at a point; writes the gradient when `grad` is non-null.
using Objective = std::function<double(const Eigen::VectorXd& point, Eigen::VectorXd* grad)>;
using Projection = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct DescentOptions {
  double initial_step = 1.0;
  int max_iters = 10000;
  double tol = 1e-8;
  double armijo = 1e-4;
  int max_backtracks = 80;
  bool record_trace = false;
};

struct DescentResult {
  Eigen::VectorXd point;
  double value = 0.0;
  int iterations = 0;
  double projected_grad_norm = 0.0;
  bool converged = false;
  /// Line search could not make progress before tol was reached.
  bool stalled = false;
  std::vector<double> trace;
};

/// Projected gradient descent with Armijo backtracking along the projection arc:
/// accept z+ = P(z - t g) once f(z+) <= f(z) + armijo * g.(z+ - z), halving t
/// otherwise. When f(z+) - f(z) is within rounding noise the step is kept if the
/// slope g(z+).(z+ - z) is still non-positive. The trial step starts at min(initial_step, 2 t_prev).
/// Stops when ||z - P(z - g)|| <= tol. Throws NumericalError on a non-finite
/// objective at an accepted point.
DescentResult projected_gradient_descent(const Objective& objective, const Projection& projection,
                                         const Eigen::VectorXd& start,
                                         const DescentOptions& options);

}  // namespace depreg
