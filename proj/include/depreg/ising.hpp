#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "depreg/interaction.hpp"

namespace depreg {

/// Spin configurations are stored as real vectors with entries in {-1, +1}.
using SpinVector = Eigen::VectorXd;

/// Binary Ising model over sigma in {-1,+1}^n with
///
///   P[sigma] ∝ exp( (beta/2) * sum_{i != j} A_ij sigma_i sigma_j + sum_i h_i sigma_i ),
///
/// so that E[sigma_i | sigma_{-i}] = tanh(beta * (A sigma)_i + h_i) with the
/// diagonal of A excluded. Diagonal entries never affect the law.
struct IsingModel {
  InteractionMatrix A;
  Eigen::VectorXd h;
  double beta = 0.0;

  Index size() const { return A.size(); }
  /// Throws ConfigError unless |h_i| <= field_bound and |beta| <= beta_bound.
  void check_bounds(double field_bound, double beta_bound) const;
};

void validate_spins(const SpinVector& sigma, Index n);

double conditional_mean(const IsingModel& model, const SpinVector& sigma, Index i);
Eigen::VectorXd conditional_means(const IsingModel& model, const SpinVector& sigma);
/// Unnormalized log-probability of a configuration.
double log_weight(const IsingModel& model, const SpinVector& sigma);

inline constexpr Index kMaxEnumerationSites = 20;

/// Configuration index c encodes sigma_k = +1 iff bit k of c is set.
SpinVector spins_from_index(std::uint64_t index, Index n);

struct ExactSummary {
  /// log of sum_sigma exp(energy); log_partition - n log 2 is the 2^-n convention.
  double log_partition = 0.0;
  Eigen::VectorXd marginal_means;
  Eigen::MatrixXd pair_means;
  std::optional<Eigen::VectorXd> table;
};

/// Exact enumeration over all 2^n states; n <= kMaxEnumerationSites.
ExactSummary exact_summary(const IsingModel& model, bool keep_table = true);
/// log P[sigma] for every configuration index (same cap).
Eigen::VectorXd exact_log_probabilities(const IsingModel& model);

struct GibbsOptions {
  int burn_in = 50;
  int thin = 5;
  int count = 1;
  std::uint64_t seed = 0;
};

/// One systematic-scan sweep over sites 0..n-1.
void gibbs_sweep(const IsingModel& model, SpinVector& state, std::mt19937_64& rng);

/// Systematic-scan Gibbs chain from a uniformly random start: burn_in sweeps,
/// then `count` states each `thin` sweeps apart.
std::vector<SpinVector> gibbs_sample(const IsingModel& model, const GibbsOptions& options);

}  // namespace depreg
