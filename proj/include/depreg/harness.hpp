#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "depreg/data.hpp"
#include "depreg/diagnostics.hpp"
#include "depreg/mple.hpp"
#include "depreg/table.hpp"

namespace depreg {

enum class RateKind { frobenius_sweep, dimension_sweep, n_sweep_random_features, sparse_sweep };

std::string to_string(RateKind kind);
RateKind parse_rate_kind(const std::string& name);

/// Feature design for the sweeps. `cyclic_basis` puts sqrt(d) e_{i mod d} in
/// row i, so X^T X / n = I exactly and the constant-field direction is shared
/// with the block structure of A.
enum class SweepFeatures { gaussian, cyclic_basis };

struct RateSpec {
  RateKind kind = RateKind::frobenius_sweep;
  /// frobenius_sweep: block counts r; dimension_sweep: d; n sweeps: n.
  std::vector<double> grid;
  int trials = 20;
  std::uint64_t seed = 0;
  Index n = 1024;
  Index d = 5;
  /// Nonzeros of theta* for sparse_sweep.
  Index sparsity = 3;
  /// Block count used by dimension_sweep.
  Index blocks = 16;
  double beta_star = 0.5;
  double theta_norm = 1.0;
  /// Fixed theta* for every trial; otherwise drawn per trial.
  std::optional<Eigen::VectorXd> theta_star;
  double l2_radius = 2.0;
  double beta_box = 1.0;
  SweepFeatures features = SweepFeatures::gaussian;
  GibbsOptions gibbs{200, 1, 1, 0};
  FitOptions fit;
};

/// Per trial: ||theta_hat - theta*||^2, (beta_hat - beta*)^2, ||X(theta_hat - theta*)||^2/n,
/// kappa, ||A||_F^2 and optimizer telemetry. Summary rows (trial -1) hold means per
/// grid point and, under grid value "all", the log-log slope of each mean error.
ExperimentTable rate_experiment(const RateSpec& spec);

/// Name of the x variable the slope is taken against.
std::string rate_x_metric(RateKind kind);

struct LowerBoundPoint {
  double zeta = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  PsiValue psi;
  KLReport kl;
  double le_cam_floor = 0.5;
  double kl_over_psi = 0.0;
};

struct LowerBoundReport {
  Index n = 0;
  Index r = 0;
  double a = 0.0;
  int bisection_steps = 0;
  double frobenius_sq = 0.0;
  /// psi((1+a) 1, -1/2; 1, 1/2) minus ||A||_F^2.
  double psi_identity_error = 0.0;
  std::vector<LowerBoundPoint> points;
  /// max over points of KL / psi, the fitted constant of the KL upper bound.
  double kl_constant = 0.0;
  bool pinsker_all = true;
};

/// Positive root of tanh(1 + a/2) = a by bisection on [0, 1].
double solve_lower_bound_a(int* steps = nullptr);

/// The two-point construction on block_partition(n, r): (theta0, beta0) = (1, 1/2) against
/// (1 + zeta a, 1/2 - zeta) with zeta = c0/||A||_F for each c0.
LowerBoundReport lower_bound_demo(Index n, Index r, const std::vector<double>& c0);
ExperimentTable lower_bound_table(const LowerBoundReport& report);

struct CurieWeissSpec {
  std::vector<double> alphas{0.5, 0.95};
  Index n = 1000;
  int trials = 20;
  std::uint64_t seed = 0;
  double theta_star = 1.0;
  double beta_star = 0.5;
  double l2_radius = 2.0;
  double beta_box = 1.0;
  GibbsOptions gibbs{200, 1, 1, 0};
  FitOptions fit;
};

/// Scalar feature x_i = +/-1 (round(alpha n) plus signs), Curie-Weiss A, MPLE of (theta, beta).
ExperimentTable curie_weiss_experiment(const CurieWeissSpec& spec);

struct BenchmarkOptions {
  Index hidden = 32;
  double l2_radius = 1.0;
  double beta_box = 1.0;
  FitOptions fit;
  /// Redraw stratified 60/20/20 splits per seed instead of using the dataset's own.
  bool resplit = false;
};

struct BenchmarkSummary {
  double mple0_mean = 0.0;
  double mple0_std = 0.0;
  double mpleb_mean = 0.0;
  double mpleb_std = 0.0;
  int wins_or_ties = 0;  ///< seeds with MPLE-beta accuracy >= MPLE-0 accuracy
  int seeds = 0;
};

/// Per seed: MPLE-0 and MPLE-beta Potts fits with a two-layer MLP on the train nodes,
/// neighbor sums from the train and val labels, test predictions from the same labels.
ExperimentTable accuracy_benchmark(const Dataset& data, const BenchmarkOptions& options,
                                   const std::vector<std::uint64_t>& seeds);
/// As above, with a fresh planted dataset per seed (dataset seed = run seed).
ExperimentTable planted_benchmark(const PlantedPottsSpec& spec, const BenchmarkOptions& options,
                                  const std::vector<std::uint64_t>& seeds);
BenchmarkSummary summarize_benchmark(const ExperimentTable& table);
/// "Method & mean +- std" lines in percent, one per method.
std::string format_accuracy_rows(const BenchmarkSummary& summary, const std::string& dataset);

/// Trial seed for grid point g and trial t.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t grid_index, int trial) {
  return seed + 1000 * static_cast<std::uint64_t>(grid_index) + static_cast<std::uint64_t>(trial);
}

}  // namespace depreg
