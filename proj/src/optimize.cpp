#include "depreg/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "depreg/error.hpp"

namespace depreg {

DescentResult projected_gradient_descent(const Objective& objective, const Projection& projection,
                                         const Eigen::VectorXd& start,
                                         const DescentOptions& options) {
  require(options.initial_step > 0.0, "descent: initial step must be positive");
  require(options.max_iters >= 0, "descent: max_iters must be nonnegative");

  DescentResult out;
  Eigen::VectorXd z = projection(start);
  Eigen::VectorXd grad(z.size());
  double value = objective(z, &grad);
  if (!std::isfinite(value) || !grad.allFinite()) {
    throw NumericalError("descent: non-finite objective at the starting point");
  }
  if (options.record_trace) out.trace.push_back(value);

  double step = options.initial_step;
  int iter = 0;
  double pg_norm = (z - projection(z - grad)).norm();
  while (pg_norm > options.tol && iter < options.max_iters) {
    double t = std::min(options.initial_step, 2.0 * step);
    bool accepted = false;
    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_grad(z.size());
    double candidate_value = 0.0;
    bool have_grad = false;
    for (int b = 0; b < options.max_backtracks; ++b) {
      candidate = projection(z - t * grad);
      const double decrease = grad.dot(candidate - z);
      if (decrease >= 0.0) {
        // Projection arc gives no descent at this scale: z is stationary up to roundoff.
        break;
      }
      candidate_value = objective(candidate, nullptr);
      if (std::isfinite(candidate_value) &&
          candidate_value <= value + options.armijo * decrease) {
        accepted = true;
        break;
      }
      // Near the optimum the sufficient decrease drops below the rounding error of the
      // summed objective. There the slope at the candidate decides: the step is kept
      // only if the objective is still non-increasing along it.
      const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(value));
      if (std::isfinite(candidate_value) && candidate_value <= value + noise) {
        candidate_value = objective(candidate, &candidate_grad);
        if (candidate_grad.allFinite() && candidate_grad.dot(candidate - z) <= 0.0) {
          accepted = true;
          have_grad = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
    if (!have_grad) candidate_value = objective(candidate, &candidate_grad);
    if (!std::isfinite(candidate_value) || !candidate_grad.allFinite()) {
      throw NumericalError("descent: non-finite objective after " + std::to_string(iter) +
                           " iterations");
    }
    z = std::move(candidate);
    grad = candidate_grad;
    value = candidate_value;
    step = t;
    ++iter;
    if (options.record_trace) out.trace.push_back(value);
    pg_norm = (z - projection(z - grad)).norm();
  }

  out.point = std::move(z);
  out.value = value;
  out.iterations = iter;
  out.projected_grad_norm = pg_norm;
  out.converged = pg_norm <= options.tol;
  return out;
}

}  // namespace depreg
