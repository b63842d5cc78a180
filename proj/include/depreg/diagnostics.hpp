#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "depreg/interaction.hpp"
#include "depreg/ising.hpp"
#include "depreg/models.hpp"

namespace depreg {

struct PsiValue {
  double value = 0.0;
  double frobenius_term = 0.0;
  double residual_term = 0.0;
};

/// Proximity functional between (h, beta) and (h_star, beta_star):
///
///   (beta - beta*)^2 ||A||_F^2
///     + || h - h* + (beta - beta*) A tanh( beta*/(beta - beta*) (h* - h) + h* ) ||^2
///
/// A enters with all stored entries, diagonal included. At beta == beta* the
/// second term is ||h - h*||^2 (limit of a vanishing prefactor on a bounded tanh).
PsiValue psi(const Eigen::VectorXd& h, double beta, const Eigen::VectorXd& h_star,
             double beta_star, const InteractionMatrix& a);

/// Fields {X theta : ||theta||_2 <= radius}.
struct LinearFamily {
  FeatureMatrix X;
  double radius = 1.0;
};

/// A finite set of candidate field vectors.
struct ExplicitFamily {
  std::vector<Eigen::VectorXd> fields;
};

using FieldFamily = std::variant<LinearFamily, ExplicitFamily>;

struct C1SearchOptions {
  double lambda_min = 1e-6;
  double lambda_max = 1e6;
  int grid_per_decade = 20;
  int golden_iterations = 80;
  int random_directions = 64;
  int ascent_rounds = 30;
  std::uint64_t seed = 0;
};

/// Search result for sup (||h - h*||^2 / n) / psi(h, beta; h*, beta*) over the
/// family and beta in [-B, B].
///
/// The search is a lower bound on the true supremum. For linear families the
/// ratio is constant along rays from (h*, beta*), so only the direction
/// (u, mu) with h - h* = t X u, beta - beta* = t mu matters; the witness is a
/// feasible point on the best ray.
struct ComplexityEstimate {
  double c1_prime = 0.0;
  /// sup min(ratio, ||h - h*||^2/n): the thresholded form, evaluated on the searched rays only.
  double c1 = 0.0;
  /// sup (beta - beta*)^2 / psi over the same search space.
  double c2_prime = 0.0;
  Eigen::VectorXd witness_field;
  std::optional<Eigen::VectorXd> witness_theta;
  double witness_beta = 0.0;
  /// -(beta - beta*)/t along the best ray, i.e. lambda in the 1-D rate form.
  double witness_lambda = 0.0;
  bool degenerate = false;
  bool is_lower_bound = true;
  long evaluations = 0;
  std::string method;
};

/// `theta_star` is required for LinearFamily (h* = X theta*); for ExplicitFamily
/// `h_star` is used directly.
ComplexityEstimate c1_prime_estimate(const FieldFamily& family, const Eigen::VectorXd& h_star,
                                     const std::optional<Eigen::VectorXd>& theta_star,
                                     double beta_star, const InteractionMatrix& a, double beta_box,
                                     const C1SearchOptions& options = {});

struct KLReport {
  double kl_forward = 0.0;   ///< KL(P0 || P1)
  double kl_backward = 0.0;  ///< KL(P1 || P0)
  double tv = 0.0;
  bool pinsker_ok = true;
};

/// Exact KL both ways and total variation from the two enumeration tables.
KLReport kl_tv_exact(const IsingModel& model_0, const IsingModel& model_1);

/// f(sigma) = sum_i v_i (sigma_i - tanh(beta* (A sigma)_i + h*_i)), off-diagonal field.
double mean_field_functional(const IsingModel& model, const Eigen::VectorXd& v,
                             const SpinVector& sigma);

/// 2 exp(-t^2 / (8 ||v||^2 (1 + |beta*| ||A||_inf))).
double exchangeable_pairs_bound(double t, double v_norm, double beta, double a_infinity);

struct TailReport {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
  double v_norm = 0.0;
  Eigen::VectorXd t_grid;
  Eigen::VectorXd exceedance;
  Eigen::VectorXd bound;
  bool bound_holds = true;
};

/// Gibbs samples of the model, the empirical law of f, and the tail bound on a grid of t.
/// With no grid, t_k = k * ||v|| sqrt(2 (1 + |beta| ||A||_inf)), k = 0..16.
TailReport exchangeable_pairs_test(const IsingModel& model, const Eigen::VectorXd& v,
                                   const GibbsOptions& sampling,
                                   std::optional<Eigen::VectorXd> t_grid = std::nullopt);

inline constexpr Index kMaxKappaDimension = 512;

struct KappaReport {
  double kappa = 0.0;
  std::optional<double> restricted;
  /// The restricted value is a minimum over random draws, so it over-estimates the infimum.
  bool restricted_is_estimate = false;
  int draws = 0;
};

/// Smallest eigenvalue of X^T X / n, and optionally the minimum of
/// ||X theta||^2 / (n ||theta||^2) over random unit directions with ||theta||_1 <= l1_radius.
KappaReport kappa_and_restricted_eig(const FeatureMatrix& x, std::optional<double> l1_radius,
                                     int draws = 2000, std::uint64_t seed = 0);

struct CurieWeissRate {
  double lambda_star = 0.0;
  double residual = 0.0;
  Index plus_count = 0;
};

/// External field with round(alpha n) entries +1 and the rest -1:
/// lambda* = -<h,1>/n and residual = sqrt(||h||^2 - <h,1>^2/n).
CurieWeissRate curie_weiss_rate(double alpha, Index n);
/// The same +/-1 pattern as a vector (the +1 entries first).
Eigen::VectorXd curie_weiss_pattern(double alpha, Index n);

}  // namespace depreg
