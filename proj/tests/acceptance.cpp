// Acceptance run: one PASS/FAIL line per criterion. `acceptance 6 9` runs a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

#include "depreg/data.hpp"
#include "depreg/diagnostics.hpp"
#include "depreg/harness.hpp"
#include "depreg/mple.hpp"
#include "depreg/potts.hpp"

using namespace depreg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::normal_distribution<double> gauss;

IsingModel random_model(int n, std::mt19937_64& rng, Eigen::MatrixXd* dense = nullptr) {
  const Eigen::MatrixXd d = oracle::random_symmetric(n, 0.5, rng);
  if (dense) *dense = d;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::VectorXd h = Eigen::VectorXd::NullaryExpr(n, [&] { return 0.5 * gauss(rng); });
  return IsingModel{InteractionMatrix::from_dense(d), h, u(rng)};
}

// ---- 1: conditional mean identity ----
Outcome ac1() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd dense;
    const IsingModel m = random_model(8, rng, &dense);
    for (std::uint64_t c = 0; c < 256; ++c) {
      const Eigen::VectorXd s = oracle::spins(c, 8);
      for (int i = 0; i < 8; ++i) {
        const double exact = 2.0 * oracle::conditional_plus(dense, m.h, m.beta, s, i) - 1.0;
        worst = std::max(worst, std::abs(conditional_mean(m, s, i) - exact));
      }
    }
  }
  return {worst <= 1e-12, "max abs error " + fmt("%.2e", worst) + " over 20 models, n = 8"};
}

// ---- 2: Gibbs sampler ----
Outcome ac2() {
  std::mt19937_64 rng(202);
  const int n = 10;
  const IsingModel m = random_model(n, rng);
  const ExactSummary ex = exact_summary(m);

  // exact action of one systematic sweep built from the library's conditionals
  Eigen::VectorXd p = *ex.table;
  const std::uint64_t states = std::uint64_t{1} << n;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(states);
    const std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t c = 0; c < states; ++c) {
      if (c & bit) continue;
      const double up = 0.5 * (1.0 + conditional_mean(m, spins_from_index(c, n), i));
      q(c | bit) += (p(c) + p(c | bit)) * up;
      q(c) += (p(c) + p(c | bit)) * (1.0 - up);
    }
    p = q;
  }
  const double drift = (p - *ex.table).cwiseAbs().maxCoeff();

  const int count = 10000, batches = 100;
  const auto samples = gibbs_sample(m, GibbsOptions{200, 5, count, 2024});
  int outside = 0;
  double worst_z = 0.0;
  for (int i = 0; i < n; ++i) {
    // batch-means Monte-Carlo standard error
    Eigen::VectorXd means = Eigen::VectorXd::Zero(batches);
    for (int k = 0; k < count; ++k) means(k / (count / batches)) += samples[k](i);
    means /= count / batches;
    const double mean = means.mean();
    const double se = std::sqrt((means.array() - mean).square().sum() / (batches - 1) / batches);
    const double z = std::abs(mean - ex.marginal_means(i)) / se;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++outside;
  }
  return {outside == 0 && drift <= 1e-10,
          "marginals outside 3 SE: " + std::to_string(outside) + "/10 (max z " + fmt("%.2f", worst_z) +
              "), sweep invariance error " + fmt("%.2e", drift)};
}

// ---- 3: gradients ----
Outcome ac3() {
  std::mt19937_64 rng(303);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> cls(0, 2);
  double worst[3] = {0, 0, 0};
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 30, d = 4;
    const auto a = InteractionMatrix::from_dense(oracle::random_symmetric(n, 0.2, rng));
    const FeatureMatrix x = FeatureMatrix::NullaryExpr(n, d, [&] { return gauss(rng); });

    const SpinVector s = SpinVector::NullaryExpr(n, [&] { return coin(rng) ? 1.0 : -1.0; });
    const PLProblem pl = PLProblem::build(a, x, s, FunctionClassModel::linear(d));
    Eigen::VectorXd z = Eigen::VectorXd::NullaryExpr(d + 1, [&] { return gauss(rng); });
    const PLEvaluation e = neg_log_pl(pl, z.head(d), z(d));
    Eigen::VectorXd g(d + 1);
    g << e.grad_theta, e.grad_beta;
    const auto f = [&](const Eigen::VectorXd& v) { return neg_log_pl(pl, v.head(d), v(d)).value; };
    worst[0] = std::max(worst[0], oracle::relative_error(g, oracle::central_difference(f, z)));

    LabelVector y(n);
    for (int i = 0; i < n; ++i) y(i) = cls(rng);
    const PottsProblem pp = PottsProblem::build(a, x, y, 3, FunctionClassModel::linear(d, 3));
    const Index k = 3 * d;
    const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(k + 1, [&] { return gauss(rng); });
    const PottsEvaluation pe = potts_objective_grad(pp, w.head(k), w(k));
    Eigen::VectorXd pg(k + 1);
    pg << pe.grad_theta, pe.grad_beta;
    const auto pf = [&](const Eigen::VectorXd& v) { return potts_objective_grad(pp, v.head(k), v(k)).value; };
    worst[1] = std::max(worst[1], oracle::relative_error(pg, oracle::central_difference(pf, w)));

    const auto mlp = FunctionClassModel::mlp2(d, 8, 2, rng());
    const Eigen::MatrixXd up = Eigen::MatrixXd::NullaryExpr(n, 2, [&] { return gauss(rng); });
    const Eigen::VectorXd th = Eigen::VectorXd::NullaryExpr(mlp.parameter_count(), [&] { return gauss(rng); });
    const auto mf = [&](const Eigen::VectorXd& v) { return (mlp.eval(x, v).array() * up.array()).sum(); };
    worst[2] = std::max(worst[2], oracle::relative_error(mlp.param_grad(x, up, th), oracle::central_difference(mf, th)));
  }
  return {worst[0] < 1e-6 && worst[1] < 1e-6 && worst[2] < 1e-6,
          "max relative error: binary " + fmt("%.1e", worst[0]) + ", Potts " + fmt("%.1e", worst[1]) +
              ", MLP " + fmt("%.1e", worst[2])};
}

// ---- 4: convexity ----
Outcome ac4() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  int violations = 0;
  double worst = -INFINITY;
  const int n = 40, d = 3;
  PLProblem pl;
  for (int rep = 0; rep < 1000; ++rep) {
    if (rep % 50 == 0) {
      const auto a = InteractionMatrix::from_dense(oracle::random_symmetric(n, 0.2, rng));
      const FeatureMatrix x = FeatureMatrix::NullaryExpr(n, d, [&] { return gauss(rng); });
      const SpinVector s = SpinVector::NullaryExpr(n, [&] { return coin(rng) ? 1.0 : -1.0; });
      pl = PLProblem::build(a, x, s, FunctionClassModel::linear(d));
    }
    const Eigen::VectorXd p = 2.0 * Eigen::VectorXd::NullaryExpr(d + 1, [&] { return gauss(rng); });
    const Eigen::VectorXd q = 2.0 * Eigen::VectorXd::NullaryExpr(d + 1, [&] { return gauss(rng); });
    const double t = u(rng);
    const Eigen::VectorXd c = t * p + (1 - t) * q;
    const auto f = [&](const Eigen::VectorXd& v) { return neg_log_pl(pl, v.head(d), v(d)).value; };
    const double gap = f(c) - (t * f(p) + (1 - t) * f(q));
    worst = std::max(worst, gap);
    if (gap > 1e-9) ++violations;
  }
  return {violations == 0, "violations " + std::to_string(violations) + "/1000, max chord gap " + fmt("%.2e", worst)};
}

// ---- 5: logistic reduction ----
Outcome ac5() {
  double worst = 0.0;
  for (int seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(500 + seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 500, d = 5;
    const FeatureMatrix x = FeatureMatrix::NullaryExpr(n, d, [&] { return gauss(rng); });
    const Eigen::VectorXd truth = 0.4 * Eigen::VectorXd::NullaryExpr(d, [&] { return gauss(rng); });
    SpinVector y(n);
    for (int i = 0; i < n; ++i) y(i) = u(rng) < 1.0 / (1.0 + std::exp(-2.0 * x.row(i).dot(truth))) ? 1.0 : -1.0;
    Constraints c;
    c.l2_radius = 100.0;
    const PLProblem pl = PLProblem::build(InteractionMatrix::block_partition(n, 10), x, y,
                                          FunctionClassModel::linear(d, 1, c));
    FitOptions o;
    o.beta_frozen = 0.0;
    const FitResult r = fit(pl, o);
    worst = std::max(worst, (r.theta_hat - oracle::logistic_newton(x, y)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-4, "max |theta_mple - theta_newton| " + fmt("%.2e", worst) + " over 5 seeds"};
}

double slope_of(const ExperimentTable& t, const std::string& metric) {
  const auto rows = t.select(metric, -1);
  return rows.empty() ? NAN : rows.front()->value;
}

std::string means_line(const ExperimentTable& t) {
  std::string s;
  for (const auto* r : t.select("mean_theta_err2", -1)) s += r->config[0] + ":" + fmt("%.3g", r->value) + " ";
  return s;
}

// ---- 6: Frobenius rate ----
Outcome ac6() {
  RateSpec s;
  s.kind = RateKind::frobenius_sweep;
  s.grid = {4, 16, 64, 256};
  s.trials = 20;
  s.n = 1024;
  s.d = 5;
  s.beta_star = 0.5;
  s.theta_star = Eigen::VectorXd::Constant(5, 0.5 / std::sqrt(5.0));
  s.l2_radius = 2.0;
  s.beta_box = 1.0;
  s.features = SweepFeatures::cyclic_basis;
  const ExperimentTable t = rate_experiment(s);
  const double slope = slope_of(t, "slope_theta_err2_vs_fro2");
  return {std::abs(slope + 1.0) <= 0.35,
          "slope " + fmt("%.3f", slope) + " (target -1 +- 0.35); mean err by r: " + means_line(t)};
}

// ---- 7: random-features rate ----
Outcome ac7() {
  RateSpec s;
  s.kind = RateKind::n_sweep_random_features;
  s.grid = {500, 2000, 8000};
  s.trials = 20;
  s.d = 5;
  s.beta_star = 0.5;
  const ExperimentTable t = rate_experiment(s);
  const double slope = slope_of(t, "slope_theta_err2_vs_n");
  return {std::abs(slope + 1.0) <= 0.2,
          "slope " + fmt("%.3f", slope) + " (target -1 +- 0.2); mean err by n: " + means_line(t)};
}

// ---- 8: lower-bound construction ----
Outcome ac8() {
  const LowerBoundReport r = lower_bound_demo(12, 3, {1.0, 0.5, 0.1, 0.01, 0.001, 1e-4});
  bool monotone = true;
  for (std::size_t k = 1; k < r.points.size(); ++k)
    monotone = monotone && r.points[k].le_cam_floor >= r.points[k - 1].le_cam_floor;
  const double last = r.points.back().le_cam_floor;
  const bool pass = std::abs(r.a - 0.8952) <= 1e-4 && std::abs(r.psi_identity_error) <= 1e-9 &&
                    r.pinsker_all && monotone && std::abs(last - 0.5) < 1e-3;
  return {pass, "a = " + fmt("%.6f", r.a) + ", psi - ||A||_F^2 = " + fmt("%.1e", r.psi_identity_error) +
                    ", Pinsker " + (r.pinsker_all ? "ok" : "violated") + ", Le-Cam floor at smallest zeta " +
                    fmt("%.6f", last)};
}

// ---- 9: complexity bound ----
Outcome ac9() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const Index n = 24;
  const Index blocks[] = {2, 3, 4, 6};
  int within_quarter = 0, within_four = 0;
  double worst_scaled = 0.0;
  double scale_err = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = InteractionMatrix::block_partition(n, blocks[rep % 4]);
    const FeatureMatrix x = FeatureMatrix::NullaryExpr(n, 2, [&] { return gauss(rng); });
    Eigen::VectorXd ts(2);
    ts << u(rng), u(rng);
    const double bs = u(rng);
    C1SearchOptions o;
    o.seed = static_cast<std::uint64_t>(rep);
    const ComplexityEstimate e = c1_prime_estimate(LinearFamily{x, 2.0}, x * ts, ts, bs, a, 1.0, o);
    const double fro2 = std::pow(norms(a).frobenius, 2);
    worst_scaled = std::max(worst_scaled, e.c1_prime * fro2);
    if (e.c1_prime <= 1.0 / (4.0 * fro2) * (1 + 1e-6)) ++within_quarter;
    if (e.c1_prime <= 4.0 / fro2 * (1 + 1e-6)) ++within_four;

    const Eigen::VectorXd hs = x * ts;
    const Eigen::VectorXd dh = e.witness_field - hs;
    const double db = e.witness_beta - bs;
    const double base = psi(e.witness_field, e.witness_beta, hs, bs, a).value;
    for (double t : {0.5, 2.0, -3.0}) {
      const double v = psi(hs + t * dh, bs + t * db, hs, bs, a).value;
      scale_err = std::max(scale_err, std::abs(v - t * t * base) / std::max(1.0, t * t * base));
    }
  }
  return {within_quarter == 20 && scale_err <= 1e-10,
          "c1' <= 1/(4||A||_F^2) on " + std::to_string(within_quarter) + "/20 (max c1'*||A||_F^2 = " +
              fmt("%.3f", worst_scaled) + "; <= 4/||A||_F^2 on " + std::to_string(within_four) +
              "/20); psi scale law error " + fmt("%.1e", scale_err)};
}

// ---- 10: concentration ----
Outcome ac10() {
  std::mt19937_64 rng(1010);
  int bound_failures = 0, mean_failures = 0;
  double worst_ratio = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const IsingModel m = random_model(12, rng);
    const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(12, [&] { return gauss(rng); });
    const TailReport t = exchangeable_pairs_test(m, v, GibbsOptions{200, 5, 10000, 77 + std::uint64_t(rep)});
    if (!t.bound_holds) ++bound_failures;
    if (std::abs(t.mean) > 3 * t.std_error) ++mean_failures;
    for (Index k = 0; k < t.t_grid.size(); ++k)
      if (t.bound(k) > 0) worst_ratio = std::max(worst_ratio, t.exceedance(k) / t.bound(k));
  }
  return {bound_failures == 0 && mean_failures == 0,
          "bound violated on " + std::to_string(bound_failures) + "/5 models (max exceedance/bound " +
              fmt("%.3f", worst_ratio) + "); mean outside 3 SE on " + std::to_string(mean_failures) + "/5"};
}

// ---- 11: Potts with two classes ----
Outcome ac11() {
  std::mt19937_64 rng(1111);
  double worst = 0.0;
  long checks = 0;
  for (int n = 2; n <= 6; ++n) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto a = InteractionMatrix::from_dense(oracle::random_symmetric(n, 0.7, rng));
      const FeatureMatrix x = FeatureMatrix::NullaryExpr(n, 2, [&] { return gauss(rng); });
      const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(2, [&] { return gauss(rng); });
      const double beta = std::uniform_real_distribution<double>(-1, 1)(rng);
      const IsingModel ising{a, x * w, beta};
      Eigen::VectorXd theta(4);
      theta << w, -w;
      for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c) {
        const SpinVector s = spins_from_index(c, n);
        LabelVector y(n);
        for (int i = 0; i < n; ++i) y(i) = s(i) > 0 ? 0 : 1;
        const PottsProblem p = PottsProblem::build(a, x, y, 2, FunctionClassModel::linear(2, 2));
        for (int i = 0; i < n; ++i) {
          const double up = 0.5 * (1 + conditional_mean(ising, s, i));
          const Eigen::VectorXd q = potts_conditional(p, theta, 2 * beta, i);
          worst = std::max({worst, std::abs(q(0) - up), std::abs(q(1) - (1 - up))});
          ++checks;
        }
      }
    }
  }
  return {worst <= 1e-9, "max |P_potts - P_ising| " + fmt("%.1e", worst) + " over " + std::to_string(checks) +
                             " (sigma, i) pairs, n = 2..6"};
}

// ---- 12: benchmark ----
std::vector<double> per_seed(const ExperimentTable& t, const std::string& metric) {
  std::map<std::uint64_t, double> by_seed;
  for (const auto* r : t.select(metric)) by_seed[r->seed] = r->value;
  std::vector<double> v;
  for (const auto& [s, x] : by_seed) v.push_back(x);
  return v;
}

Outcome ac12() {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
  PlantedPottsSpec spec;
  spec.beta_star = 0.5;
  const ExperimentTable t = planted_benchmark(spec, BenchmarkOptions{}, seeds);
  const BenchmarkSummary s = summarize_benchmark(t);

  spec.beta_star = 0.0;
  const ExperimentTable t0 = planted_benchmark(spec, BenchmarkOptions{}, seeds);
  const std::vector<double> a0 = per_seed(t0, "acc_mple0"), ab = per_seed(t0, "acc_mpleb");
  double dbar = 0.0, ss = 0.0;
  for (std::size_t k = 0; k < a0.size(); ++k) dbar += (ab[k] - a0[k]) / a0.size();
  for (std::size_t k = 0; k < a0.size(); ++k) ss += std::pow(ab[k] - a0[k] - dbar, 2);
  const double se = std::sqrt(ss / (a0.size() - 1) / a0.size());
  const bool tied = std::abs(dbar) <= 2 * se + 1e-12;

  const std::string rows = format_accuracy_rows(s, "planted");
  const bool shape = std::count(rows.begin(), rows.end(), '\n') == 2;
  return {s.wins_or_ties >= 8 && tied && shape,
          "beta* = 0.5: MPLE-beta >= MPLE-0 in " + std::to_string(s.wins_or_ties) + "/10 (" +
              fmt("%.1f", 100 * s.mpleb_mean) + " vs " + fmt("%.1f", 100 * s.mple0_mean) +
              "); beta* = 0: mean difference " + fmt("%+.1f", 100 * dbar) + " points, 2 SE = " +
              fmt("%.1f", 200 * se)};
}

// ---- 13: determinism ----
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac13() {
  const fs::path root = fs::absolute("acceptance_determinism");
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string fixtures = DEPREG_FIXTURES;
  const std::map<std::string, std::pair<std::string, std::string>> runs = {
      {"sample", {"sample", R"({"n": 40, "d": 3, "matrix": {"kind": "block", "blocks": 4}, "beta_star": 0.4})"}},
      {"rate", {"rate-experiment", R"({"kind": "frobenius_sweep", "grid": [2, 8], "trials": 3, "n": 64, "d": 2})"}},
      {"rate_cyclic", {"rate-experiment", R"({"kind": "frobenius_sweep", "grid": [2, 8], "trials": 2, "n": 64, "d": 2, "features": "cyclic_basis", "theta_star": [0.3, 0.3]})"}},
      {"dimension", {"rate-experiment", R"({"kind": "dimension_sweep", "grid": [2, 4], "trials": 2, "n": 64, "blocks": 4})"}},
      {"nsweep", {"rate-experiment", R"({"kind": "n_sweep_random_features", "grid": [50, 100], "trials": 2, "d": 2})"}},
      {"sparse", {"rate-experiment", R"({"kind": "sparse_sweep", "grid": [50, 100], "trials": 2, "d": 6, "sparsity": 2})"}},
      {"lower_bound", {"lower-bound-demo", R"({"n": 8, "r": 2})"}},
      {"curie_weiss", {"curie-weiss", R"({"alphas": [0.5, 0.9], "n": 100, "trials": 3})"}},
      {"planted", {"benchmark", R"({"planted": {"n": 60}, "runs": 2, "hidden": 4})"}},
      {"citation", {"benchmark", "{\"dataset\": {\"name\": \"toy\", \"nodes\": \"" + fixtures +
                                     "/toy/nodes.csv\", \"edges\": \"" + fixtures + "/toy/edges.txt\", \"splits\": \"" +
                                     fixtures + "/toy/splits.json\"}, \"runs\": 2, \"hidden\": 4}"}},
  };
  int compared = 0;
  std::vector<std::string> differing;
  for (const auto& [name, run] : runs) {
    const fs::path cfg = root / (name + ".json");
    std::ofstream(cfg) << run.second;
    for (const char* rep : {"a", "b"}) {
      const std::string cmd = std::string(DEPREG_CLI) + " --seed 11 --out-dir " + (root / name / rep).string() +
                              " --config " + cfg.string() + " " + run.first + " > " +
                              (root / (name + rep + ".log")).string() + " 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
    }
    for (const auto& entry : fs::directory_iterator(root / name / "a")) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      if (slurp(entry.path()) != slurp(root / name / "b" / entry.path().filename()))
        differing.push_back(name + "/" + entry.path().filename().string());
    }
  }
  std::string detail = std::to_string(compared) + " CSV files from " + std::to_string(runs.size()) +
                       " CLI runs compared byte for byte";
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty() && compared >= static_cast<int>(runs.size()), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {ac1, ac2, ac3, ac4,  ac5,  ac6, ac7,
                                                          ac8, ac9, ac10, ac11, ac12, ac13};
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("AC%-2d %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
