#include "depreg/ising.hpp"

#include <cmath>

#include "depreg/error.hpp"
#include "depreg/numeric.hpp"
#include "neighbor_tracker.hpp"

namespace depreg {

void IsingModel::check_bounds(double field_bound, double beta_bound) const {
  require(h.size() == size(), "IsingModel: field length does not match matrix size");
  require(h.size() == 0 || h.cwiseAbs().maxCoeff() <= field_bound,
          "IsingModel: external field exceeds bound M");
  require(std::abs(beta) <= beta_bound, "IsingModel: |beta| exceeds bound B");
}

void validate_spins(const SpinVector& sigma, Index n) {
  require(sigma.size() == n, "spin vector length " + std::to_string(sigma.size()) +
                                 " does not match n = " + std::to_string(n));
  for (Index i = 0; i < n; ++i) {
    require(sigma(i) == 1.0 || sigma(i) == -1.0, "spin vector entries must be -1 or +1");
  }
}

double conditional_mean(const IsingModel& model, const SpinVector& sigma, Index i) {
  require(i >= 0 && i < model.size(), "conditional_mean: site index out of range");
  require(sigma.size() == model.size(), "conditional_mean: spin vector length mismatch");
  detail::SpinFieldTracker tracker(model.A, sigma);
  return std::tanh(model.beta * tracker.field(i, sigma) + model.h(i));
}

Eigen::VectorXd conditional_means(const IsingModel& model, const SpinVector& sigma) {
  require(sigma.size() == model.size(), "conditional_means: spin vector length mismatch");
  return (model.beta * model.A.local_field(sigma) + model.h).array().tanh().matrix();
}

double log_weight(const IsingModel& model, const SpinVector& sigma) {
  require(sigma.size() == model.size(), "log_weight: spin vector length mismatch");
  return 0.5 * model.beta * sigma.dot(model.A.local_field(sigma)) + model.h.dot(sigma);
}

SpinVector spins_from_index(std::uint64_t index, Index n) {
  SpinVector s(n);
  for (Index k = 0; k < n; ++k) s(k) = ((index >> k) & 1ULL) ? 1.0 : -1.0;
  return s;
}

Eigen::VectorXd exact_log_probabilities(const IsingModel& model) {
  const Index n = model.size();
  if (n > kMaxEnumerationSites) {
    throw ConfigError("exact enumeration is capped at n = " + std::to_string(kMaxEnumerationSites) +
                      " sites (got " + std::to_string(n) + ")");
  }
  require(n >= 1, "exact enumeration needs at least one site");
  require(model.h.size() == n, "exact enumeration: field length mismatch");
  Eigen::MatrixXd a = model.A.to_dense();
  a.diagonal().setZero();
  const std::uint64_t states = 1ULL << n;

  // Gray-code walk: consecutive states differ in one spin, so the log-weight
  // and the local fields update in O(n).
  Eigen::VectorXd logw(static_cast<Index>(states));
  SpinVector sigma = SpinVector::Constant(n, -1.0);
  Eigen::VectorXd field = a * sigma;
  double current = 0.5 * model.beta * sigma.dot(field) + model.h.dot(sigma);
  std::uint64_t gray = 0;
  logw(0) = current;
  for (std::uint64_t step = 1; step < states; ++step) {
    const int k = __builtin_ctzll(step);
    const double old = sigma(k);
    current += -2.0 * old * (model.beta * field(k) + model.h(k));
    sigma(k) = -old;
    field += a.col(k) * (-2.0 * old);
    gray ^= (1ULL << k);
    logw(static_cast<Index>(gray)) = current;
  }
  return logw.array() - log_sum_exp(logw);
}

ExactSummary exact_summary(const IsingModel& model, bool keep_table) {
  const Index n = model.size();
  Eigen::VectorXd logp = exact_log_probabilities(model);
  Eigen::MatrixXd a = model.A.to_dense();
  a.diagonal().setZero();

  ExactSummary out;
  out.marginal_means = Eigen::VectorXd::Zero(n);
  out.pair_means = Eigen::MatrixXd::Zero(n, n);
  const std::uint64_t states = 1ULL << n;
  Eigen::VectorXd p = logp.array().exp();
  p /= p.sum();
  for (std::uint64_t c = 0; c < states; ++c) {
    const double w = p(static_cast<Index>(c));
    const SpinVector s = spins_from_index(c, n);
    out.marginal_means.noalias() += w * s;
    out.pair_means.noalias() += w * s * s.transpose();
  }
  // log Z = energy(sigma) - log P[sigma] for any state; use state 0.
  const SpinVector s0 = spins_from_index(0, n);
  out.log_partition = 0.5 * model.beta * s0.dot(a * s0) + model.h.dot(s0) - logp(0);
  if (keep_table) out.table = std::move(p);
  return out;
}

void gibbs_sweep(const IsingModel& model, SpinVector& state, std::mt19937_64& rng) {
  detail::SpinFieldTracker tracker(model.A, state);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index i = 0; i < model.size(); ++i) {
    const double m = model.beta * tracker.field(i, state) + model.h(i);
    const double p_plus = 0.5 * (1.0 + std::tanh(m));
    const double next = unif(rng) < p_plus ? 1.0 : -1.0;
    if (next != state(i)) {
      tracker.changed(i, next - state(i));
      state(i) = next;
    }
  }
}

std::vector<SpinVector> gibbs_sample(const IsingModel& model, const GibbsOptions& options) {
  require(options.count >= 1, "gibbs_sample: count must be at least 1");
  require(options.thin >= 1, "gibbs_sample: thin must be at least 1");
  require(options.burn_in >= 0, "gibbs_sample: burn_in must be nonnegative");
  require(model.h.size() == model.size(), "gibbs_sample: field length mismatch");
  const Index n = model.size();
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SpinVector state(n);
  for (Index i = 0; i < n; ++i) state(i) = unif(rng) < 0.5 ? -1.0 : 1.0;

  detail::SpinFieldTracker tracker(model.A, state);
  auto sweep = [&] {
    for (Index i = 0; i < n; ++i) {
      const double m = model.beta * tracker.field(i, state) + model.h(i);
      const double next = unif(rng) < 0.5 * (1.0 + std::tanh(m)) ? 1.0 : -1.0;
      if (next != state(i)) {
        tracker.changed(i, next - state(i));
        state(i) = next;
      }
    }
  };
  for (int s = 0; s < options.burn_in; ++s) sweep();
  std::vector<SpinVector> out;
  out.reserve(static_cast<std::size_t>(options.count));
  for (int c = 0; c < options.count; ++c) {
    for (int s = 0; s < options.thin; ++s) sweep();
    out.push_back(state);
  }
  return out;
}

}  // namespace depreg
