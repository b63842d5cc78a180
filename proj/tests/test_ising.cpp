#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "depreg/error.hpp"
#include "depreg/ising.hpp"

using namespace depreg;

namespace {

IsingModel random_model(int n, std::mt19937_64& rng, Eigen::MatrixXd* dense) {
  *dense = oracle::random_symmetric(n, 0.5, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) h(i) = u(rng);
  return IsingModel{InteractionMatrix::from_dense(*dense), h, u(rng)};
}

}  // namespace

TEST_CASE("two-site conditional mean and correlation") {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  const IsingModel m{InteractionMatrix::from_dense(d), Eigen::VectorXd::Zero(2), 0.25};
  SpinVector s(2);
  s << -1, 1;
  CHECK(conditional_mean(m, s, 0) == doctest::Approx(std::tanh(0.25)).epsilon(1e-15));
  for (double beta : {-0.7, 0.1, 0.9}) {
    const IsingModel mb{m.A, m.h, beta};
    const ExactSummary ex = exact_summary(mb);
    CHECK(ex.pair_means(0, 1) == doctest::Approx(std::tanh(beta)).epsilon(1e-13));
  }
}

TEST_CASE("conditional mean matches the ratio of joint weights") {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd dense;
  const IsingModel m = random_model(7, rng, &dense);
  double worst = 0.0;
  for (std::uint64_t c = 0; c < 128; ++c) {
    const Eigen::VectorXd s = oracle::spins(c, 7);
    for (int i = 0; i < 7; ++i) {
      const double p = oracle::conditional_plus(dense, m.h, m.beta, s, i);
      worst = std::max(worst, std::abs(conditional_mean(m, s, i) - (2.0 * p - 1.0)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("index encoding and log weight") {
  const SpinVector s = spins_from_index(5, 4);
  CHECK(s(0) == 1.0);
  CHECK(s(1) == -1.0);
  CHECK(s(2) == 1.0);
  CHECK(s(3) == -1.0);
  std::mt19937_64 rng(9);
  Eigen::MatrixXd dense;
  const IsingModel m = random_model(5, rng, &dense);
  for (std::uint64_t c = 0; c < 32; ++c) {
    CHECK(log_weight(m, spins_from_index(c, 5)) ==
          doctest::Approx(oracle::energy(dense, m.h, m.beta, oracle::spins(c, 5))).epsilon(1e-13));
  }
}

TEST_CASE("exact summary against brute force") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd dense;
    const IsingModel m = random_model(8, rng, &dense);
    const ExactSummary ex = exact_summary(m);
    const Eigen::VectorXd p = oracle::probabilities(dense, m.h, m.beta);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
    for (std::uint64_t c = 0; c < 256; ++c) mean += p(c) * oracle::spins(c, 8);
    CHECK((ex.marginal_means - mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ex.log_partition == doctest::Approx(oracle::log_partition(dense, m.h, m.beta)).epsilon(1e-13));
    REQUIRE(ex.table.has_value());
    CHECK((*ex.table - p).cwiseAbs().maxCoeff() < 1e-13);
    const Eigen::VectorXd lp = exact_log_probabilities(m);
    CHECK((lp.array().exp().matrix() - p).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("enumeration cap") {
  const IsingModel m{InteractionMatrix::curie_weiss(21), Eigen::VectorXd::Zero(21), 0.1};
  CHECK_THROWS_AS(exact_summary(m), ConfigError);
}

TEST_CASE("one sweep preserves the exact law") {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd dense;
  const IsingModel m = random_model(6, rng, &dense);
  const Eigen::VectorXd p = oracle::probabilities(dense, m.h, m.beta);
  const Eigen::VectorXd q = oracle::apply_sweep(dense, m.h, m.beta, p);
  CHECK((p - q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gibbs marginals within three standard errors") {
  std::mt19937_64 rng(8);
  Eigen::MatrixXd dense;
  const IsingModel m = random_model(6, rng, &dense);
  const ExactSummary ex = exact_summary(m);
  const auto samples = gibbs_sample(m, GibbsOptions{100, 3, 5000, 17});
  REQUIRE(samples.size() == 5000);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(6);
  for (const auto& s : samples) mean += s;
  mean /= 5000.0;
  for (int i = 0; i < 6; ++i) {
    const double mu = ex.marginal_means(i);
    const double se = std::sqrt((1.0 - mu * mu) / 5000.0);
    CHECK(std::abs(mean(i) - mu) < 3.0 * se + 1e-3);
  }
}

TEST_CASE("gibbs is seed deterministic") {
  const IsingModel m{InteractionMatrix::curie_weiss(20), Eigen::VectorXd::Constant(20, 0.2), 0.5};
  const auto a = gibbs_sample(m, GibbsOptions{10, 2, 3, 42});
  const auto b = gibbs_sample(m, GibbsOptions{10, 2, 3, 42});
  const auto c = gibbs_sample(m, GibbsOptions{10, 2, 3, 43});
  for (int k = 0; k < 3; ++k) CHECK(a[k] == b[k]);
  bool differs = false;
  for (int k = 0; k < 3; ++k) differs = differs || a[k] != c[k];
  CHECK(differs);
}

TEST_CASE("field and beta bounds") {
  const IsingModel m{InteractionMatrix::curie_weiss(4), Eigen::VectorXd::Constant(4, 2.0), 0.5};
  CHECK_NOTHROW(m.check_bounds(2.0, 1.0));
  CHECK_THROWS_AS(m.check_bounds(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(m.check_bounds(3.0, 0.4), ConfigError);
  SpinVector bad = SpinVector::Ones(4);
  bad(1) = 0.5;
  CHECK_THROWS_AS(validate_spins(bad, 4), ConfigError);
}
