#include "depreg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "depreg/error.hpp"
#include "depreg/potts.hpp"

namespace depreg {

namespace {

std::string num(double v) { return format_double(v); }

FeatureMatrix cyclic_basis(Index n, Index d) {
  FeatureMatrix x = FeatureMatrix::Zero(n, d);
  const double s = std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < n; ++i) x(i, i % d) = s;
  return x;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string to_string(RateKind kind) {
  switch (kind) {
    case RateKind::frobenius_sweep: return "frobenius_sweep";
    case RateKind::dimension_sweep: return "dimension_sweep";
    case RateKind::n_sweep_random_features: return "n_sweep_random_features";
    case RateKind::sparse_sweep: return "sparse_sweep";
  }
  return "unknown";
}

RateKind parse_rate_kind(const std::string& name) {
  for (auto k : {RateKind::frobenius_sweep, RateKind::dimension_sweep,
                 RateKind::n_sweep_random_features, RateKind::sparse_sweep}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown rate experiment kind '" + name + "'");
}

std::string rate_x_metric(RateKind kind) {
  switch (kind) {
    case RateKind::frobenius_sweep: return "fro2";
    case RateKind::dimension_sweep: return "d";
    case RateKind::n_sweep_random_features:
    case RateKind::sparse_sweep: return "n";
  }
  return "x";
}

ExperimentTable rate_experiment(const RateSpec& spec) {
  require(!spec.grid.empty(), "rate_experiment: empty grid");
  require(spec.trials >= 1, "rate_experiment: need at least one trial");
  ExperimentTable table;
  table.experiment_id = to_string(spec.kind);
  table.config_columns = {"x", "n", "d", "matrix", "beta_star", "features"};
  const char* features = spec.features == SweepFeatures::gaussian ? "gaussian" : "cyclic_basis";
  const std::vector<std::string> errors = {"theta_err2", "beta_err2", "field_err2"};
  std::map<std::string, std::vector<double>> means;  // metric -> per-grid mean
  std::vector<double> xs;

  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    const double x = spec.grid[g];
    require(x >= 1.0 && x == std::floor(x), "rate_experiment: grid values must be positive integers");
    SyntheticSpec s;
    s.n = spec.n;
    s.d = spec.d;
    s.beta_star = spec.beta_star;
    s.theta_norm = spec.theta_norm;
    s.theta_star = spec.theta_star;
    s.gibbs = spec.gibbs;
    std::string matrix;
    switch (spec.kind) {
      case RateKind::frobenius_sweep:
        s.matrix.kind = MatrixSpec::Kind::block;
        s.matrix.blocks = static_cast<Index>(x);
        break;
      case RateKind::dimension_sweep:
        s.d = static_cast<Index>(x);
        s.matrix.kind = MatrixSpec::Kind::block;
        s.matrix.blocks = spec.blocks;
        break;
      case RateKind::n_sweep_random_features:
      case RateKind::sparse_sweep:
        s.n = static_cast<Index>(x);
        s.matrix.kind = MatrixSpec::Kind::curie_weiss;
        break;
    }
    matrix = s.matrix.kind == MatrixSpec::Kind::block
                 ? "block" + std::to_string(s.matrix.blocks)
                 : "curie_weiss";
    if (spec.features == SweepFeatures::cyclic_basis) {
      s.feature_law = FeatureLaw::given;
      s.given_X = cyclic_basis(s.n, s.d);
    }
    Constraints c;
    c.l2_radius = spec.l2_radius;
    c.beta_box = spec.beta_box;
    const std::vector<std::string> config = {num(x),          std::to_string(s.n),
                                             std::to_string(s.d), matrix,
                                             num(spec.beta_star), features};
    std::map<std::string, std::vector<double>> per_trial;
    double fro2 = 0.0;
    for (int t = 0; t < spec.trials; ++t) {
      const std::uint64_t seed = trial_seed(spec.seed, g, t);
      s.seed = seed;
      if (spec.kind == RateKind::sparse_sweep) {
        std::mt19937_64 rng(seed ^ 0x51a75eULL);
        require(spec.sparsity >= 1 && spec.sparsity <= s.d, "rate_experiment: bad sparsity");
        std::vector<Index> coords(static_cast<std::size_t>(s.d));
        for (Index k = 0; k < s.d; ++k) coords[static_cast<std::size_t>(k)] = k;
        std::shuffle(coords.begin(), coords.end(), rng);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(s.d);
        for (Index k = 0; k < spec.sparsity; ++k) theta(coords[static_cast<std::size_t>(k)]) = normal(rng);
        s.theta_star = spec.theta_norm * theta.normalized();
        c.l1_radius = s.theta_star->lpNorm<1>();
      }
      try {
        const Dataset data = gen_synthetic(s);
        const Eigen::VectorXd theta_star = data.ground_truth->theta.col(0);
        FunctionClassModel model = spec.kind == RateKind::sparse_sweep
                                       ? FunctionClassModel::sparse_linear(s.d, *c.l1_radius, 1, c)
                                       : FunctionClassModel::linear(s.d, 1, c);
        const PLProblem problem = PLProblem::build(data.A, data.X, data.spins(), model);
        const FitResult r = fit(problem, spec.fit);
        const Eigen::VectorXd diff = r.theta_hat - theta_star;
        fro2 = data.A.cached_norms().frobenius * data.A.cached_norms().frobenius;
        const double values[] = {diff.squaredNorm(),
                                 (r.beta_hat - spec.beta_star) * (r.beta_hat - spec.beta_star),
                                 (data.X * diff).squaredNorm() / static_cast<double>(s.n)};
        for (std::size_t k = 0; k < errors.size(); ++k) {
          table.add(config, t, seed, errors[k], values[k]);
          per_trial[errors[k]].push_back(values[k]);
        }
        table.add(config, t, seed, "beta_hat", r.beta_hat);
        table.add(config, t, seed, "kappa", kappa_and_restricted_eig(data.X, std::nullopt).kappa);
        table.add(config, t, seed, "fro2", fro2);
        table.add(config, t, seed, "iterations", r.iterations);
        table.add(config, t, seed, "converged", r.converged ? 1.0 : 0.0);
        table.add(config, t, seed, "clipped", static_cast<double>(data.ground_truth->clipped));
      } catch (const std::exception&) {
        table.add(config, t, seed, "fit_failed", 1.0);
      }
    }
    for (const auto& m : errors) {
      const double mean = mean_of(per_trial[m]);
      table.add(config, -1, spec.seed, "mean_" + m, mean);
      means[m].push_back(mean);
    }
    switch (spec.kind) {
      case RateKind::frobenius_sweep: xs.push_back(fro2 > 0 ? fro2 : x); break;
      default: xs.push_back(x); break;
    }
  }
  if (spec.grid.size() >= 2) {
    const std::vector<std::string> config = {"all", num(spec.n), num(spec.d), "", num(spec.beta_star),
                                             features};
    for (const auto& m : errors) {
      bool positive = std::all_of(means[m].begin(), means[m].end(), [](double v) { return v > 0; });
      const double slope = positive ? log_log_slope(xs, means[m]) : NAN;
      table.add(config, -1, spec.seed, "slope_" + m + "_vs_" + rate_x_metric(spec.kind), slope);
    }
  }
  table.sort();
  return table;
}

double solve_lower_bound_a(int* steps) {
  double lo = 0.0, hi = 1.0;
  auto f = [](double a) { return std::tanh(1.0 + a / 2.0) - a; };
  if (!(f(lo) > 0.0 && f(hi) < 0.0)) throw NumericalError("lower bound root is not bracketed");
  int k = 0;
  while (hi - lo > 1e-15 && k < 200) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
    ++k;
  }
  if (hi - lo > 1e-15) throw NumericalError("bisection did not converge");
  if (steps) *steps = k;
  return 0.5 * (lo + hi);
}

LowerBoundReport lower_bound_demo(Index n, Index r, const std::vector<double>& c0) {
  require(n >= 1 && n <= 16, "lower_bound_demo: n must lie in 1..16 for enumeration");
  require(r >= 1 && n % r == 0, "lower_bound_demo: r must divide n");
  LowerBoundReport out;
  out.n = n;
  out.r = r;
  out.a = solve_lower_bound_a(&out.bisection_steps);
  const InteractionMatrix a = InteractionMatrix::block_partition(n, r);
  const double fro = a.cached_norms().frobenius;
  out.frobenius_sq = fro * fro;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double theta0 = 1.0, beta0 = 0.5;
  out.psi_identity_error =
      psi((1.0 + out.a) * ones, -0.5, theta0 * ones, beta0, a).value - out.frobenius_sq;

  const IsingModel base{a, theta0 * ones, beta0};
  for (double c : c0) {
    LowerBoundPoint p;
    p.zeta = c / fro;
    p.theta = theta0 + p.zeta * out.a;
    p.beta = beta0 - p.zeta;
    p.psi = psi(p.theta * ones, p.beta, theta0 * ones, beta0, a);
    p.kl = kl_tv_exact(base, IsingModel{a, p.theta * ones, p.beta});
    p.le_cam_floor = (1.0 - p.kl.tv) / 2.0;
    p.kl_over_psi = p.psi.value > 0.0 ? p.kl.kl_forward / p.psi.value : 0.0;
    out.kl_constant = std::max(out.kl_constant, p.kl_over_psi);
    out.pinsker_all = out.pinsker_all && p.kl.pinsker_ok;
    out.points.push_back(p);
  }
  return out;
}

ExperimentTable lower_bound_table(const LowerBoundReport& report) {
  ExperimentTable t;
  t.experiment_id = "lower_bound_demo";
  t.config_columns = {"n", "r", "c0"};
  const std::vector<std::string> global = {std::to_string(report.n), std::to_string(report.r), "all"};
  t.add(global, -1, 0, "a", report.a);
  t.add(global, -1, 0, "fro2", report.frobenius_sq);
  t.add(global, -1, 0, "psi_identity_error", report.psi_identity_error);
  t.add(global, -1, 0, "kl_constant", report.kl_constant);
  for (std::size_t k = 0; k < report.points.size(); ++k) {
    const auto& p = report.points[k];
    const std::vector<std::string> cfg = {std::to_string(report.n), std::to_string(report.r),
                                          num(p.zeta * std::sqrt(report.frobenius_sq))};
    const int trial = static_cast<int>(k);
    t.add(cfg, trial, 0, "zeta", p.zeta);
    t.add(cfg, trial, 0, "psi", p.psi.value);
    t.add(cfg, trial, 0, "kl_forward", p.kl.kl_forward);
    t.add(cfg, trial, 0, "kl_backward", p.kl.kl_backward);
    t.add(cfg, trial, 0, "tv", p.kl.tv);
    t.add(cfg, trial, 0, "le_cam_floor", p.le_cam_floor);
    t.add(cfg, trial, 0, "kl_over_psi", p.kl_over_psi);
    t.add(cfg, trial, 0, "pinsker_ok", p.kl.pinsker_ok ? 1.0 : 0.0);
  }
  return t;
}

ExperimentTable curie_weiss_experiment(const CurieWeissSpec& spec) {
  require(!spec.alphas.empty(), "curie_weiss_experiment: empty alpha grid");
  ExperimentTable table;
  table.experiment_id = "curie_weiss";
  table.config_columns = {"alpha", "n", "theta_star", "beta_star"};
  Constraints c;
  c.l2_radius = spec.l2_radius;
  c.beta_box = spec.beta_box;
  for (std::size_t g = 0; g < spec.alphas.size(); ++g) {
    const double alpha = spec.alphas[g];
    const CurieWeissRate rate = curie_weiss_rate(alpha, spec.n);
    const std::vector<std::string> config = {num(alpha), std::to_string(spec.n),
                                             num(spec.theta_star), num(spec.beta_star)};
    SyntheticSpec s;
    s.n = spec.n;
    s.d = 1;
    s.matrix.kind = MatrixSpec::Kind::curie_weiss;
    s.theta_star = Eigen::VectorXd::Constant(1, spec.theta_star);
    s.beta_star = spec.beta_star;
    s.feature_law = FeatureLaw::given;
    s.given_X = curie_weiss_pattern(alpha, spec.n);
    s.gibbs = spec.gibbs;
    std::vector<double> errs;
    for (int t = 0; t < spec.trials; ++t) {
      s.seed = trial_seed(spec.seed, g, t);
      try {
        const Dataset data = gen_synthetic(s);
        const PLProblem problem = PLProblem::build(data.A, data.X, data.spins(),
                                                   FunctionClassModel::linear(1, 1, c));
        const FitResult r = fit(problem, spec.fit);
        const double err = std::abs(r.theta_hat(0) - spec.theta_star);
        errs.push_back(err);
        table.add(config, t, s.seed, "theta_abs_err", err);
        table.add(config, t, s.seed, "beta_abs_err", std::abs(r.beta_hat - spec.beta_star));
        table.add(config, t, s.seed, "converged", r.converged ? 1.0 : 0.0);
      } catch (const std::exception&) {
        table.add(config, t, s.seed, "fit_failed", 1.0);
      }
    }
    table.add(config, -1, spec.seed, "mean_theta_abs_err", mean_of(errs));
    table.add(config, -1, spec.seed, "std_theta_abs_err", std_of(errs));
    table.add(config, -1, spec.seed, "lambda_star", rate.lambda_star);
    table.add(config, -1, spec.seed, "residual", rate.residual);
    table.add(config, -1, spec.seed, "plus_count", static_cast<double>(rate.plus_count));
  }
  table.sort();
  return table;
}

namespace {

void benchmark_one(const Dataset& data, const BenchmarkOptions& options, std::uint64_t seed,
                   int trial, const std::vector<std::string>& config, ExperimentTable& table) {
  require(data.label_kind == LabelKind::class_id, "benchmark: dataset labels must be class ids");
  const Splits splits = options.resplit || !data.splits
                            ? make_splits(data.labels, {}, true, seed)
                            : *data.splits;
  require(options.resplit || data.splits.has_value(), "benchmark: dataset has no splits");
  require(!splits.train.empty() && !splits.test.empty(), "benchmark: empty train or test split");
  LabelVector known = LabelVector::Constant(data.size(), -1);
  for (Index i : splits.train) known(i) = data.labels(i);
  for (Index i : splits.val) known(i) = data.labels(i);

  Constraints c;
  c.l2_radius = options.l2_radius;
  c.beta_box = options.beta_box;
  const FunctionClassModel model =
      FunctionClassModel::mlp2(data.X.cols(), options.hidden, data.num_classes, seed, c);
  const PottsProblem problem =
      PottsProblem::from_partial(data.A, data.X, known, splits.train, data.num_classes, model);

  FitOptions frozen = options.fit;
  frozen.beta_frozen = 0.0;
  FitOptions free = options.fit;
  free.beta_frozen.reset();
  const FitResult r0 = fit_potts(problem, frozen);
  const FitResult rb = fit_potts(problem, free);

  auto accuracy = [&](const FitResult& r) {
    const LabelVector pred = predict_class(data.A, data.X, model, r.theta_hat, r.beta_hat, known,
                                           data.num_classes, splits.test);
    Index hits = 0;
    for (std::size_t k = 0; k < splits.test.size(); ++k) {
      if (pred(static_cast<Index>(k)) == data.labels(splits.test[k])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(splits.test.size());
  };
  table.add(config, trial, seed, "acc_mple0", accuracy(r0));
  table.add(config, trial, seed, "acc_mpleb", accuracy(rb));
  table.add(config, trial, seed, "beta_hat", rb.beta_hat);
  table.add(config, trial, seed, "objective_mple0", r0.objective_value);
  table.add(config, trial, seed, "objective_mpleb", rb.objective_value);
}

void add_benchmark_summary(ExperimentTable& table, const std::vector<std::string>& config) {
  std::vector<double> a0, ab;
  for (const TableRow* r : table.select("acc_mple0")) a0.push_back(r->value);
  for (const TableRow* r : table.select("acc_mpleb")) ab.push_back(r->value);
  int wins = 0;
  for (std::size_t k = 0; k < std::min(a0.size(), ab.size()); ++k) wins += ab[k] >= a0[k];
  table.add(config, -1, 0, "mean_acc_mple0", mean_of(a0));
  table.add(config, -1, 0, "std_acc_mple0", std_of(a0));
  table.add(config, -1, 0, "mean_acc_mpleb", mean_of(ab));
  table.add(config, -1, 0, "std_acc_mpleb", std_of(ab));
  table.add(config, -1, 0, "wins_or_ties", wins);
}

}  // namespace

ExperimentTable accuracy_benchmark(const Dataset& data, const BenchmarkOptions& options,
                                   const std::vector<std::uint64_t>& seeds) {
  require(!seeds.empty(), "accuracy_benchmark: no seeds");
  ExperimentTable table;
  table.experiment_id = "accuracy_benchmark";
  table.config_columns = {"dataset", "nodes", "classes"};
  const std::vector<std::string> config = {"dataset", std::to_string(data.size()),
                                           std::to_string(data.num_classes)};
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    benchmark_one(data, options, seeds[k], static_cast<int>(k), config, table);
  }
  add_benchmark_summary(table, config);
  return table;
}

ExperimentTable planted_benchmark(const PlantedPottsSpec& spec, const BenchmarkOptions& options,
                                  const std::vector<std::uint64_t>& seeds) {
  require(!seeds.empty(), "planted_benchmark: no seeds");
  ExperimentTable table;
  table.experiment_id = "planted_benchmark";
  table.config_columns = {"dataset", "nodes", "classes"};
  const std::vector<std::string> config = {"planted_beta" + num(spec.beta_star),
                                           std::to_string(spec.n), std::to_string(spec.classes)};
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    PlantedPottsSpec s = spec;
    s.seed = seeds[k];
    const Dataset data = gen_planted_potts(s);
    benchmark_one(data, options, seeds[k], static_cast<int>(k), config, table);
  }
  add_benchmark_summary(table, config);
  return table;
}

BenchmarkSummary summarize_benchmark(const ExperimentTable& table) {
  BenchmarkSummary s;
  auto get = [&](const std::string& m) {
    const auto rows = table.select(m, -1);
    require(!rows.empty(), "summarize_benchmark: missing summary metric " + m);
    return rows.front()->value;
  };
  s.mple0_mean = get("mean_acc_mple0");
  s.mple0_std = get("std_acc_mple0");
  s.mpleb_mean = get("mean_acc_mpleb");
  s.mpleb_std = get("std_acc_mpleb");
  s.wins_or_ties = static_cast<int>(get("wins_or_ties"));
  s.seeds = static_cast<int>(table.select("acc_mple0").size());
  return s;
}

std::string format_accuracy_rows(const BenchmarkSummary& s, const std::string& dataset) {
  char buf[256];
  std::ostringstream out;
  std::snprintf(buf, sizeof(buf), "MPLE-0      & %s & %.1f +- %.1f\n", dataset.c_str(),
                100 * s.mple0_mean, 100 * s.mple0_std);
  out << buf;
  std::snprintf(buf, sizeof(buf), "MPLE-beta   & %s & %.1f +- %.1f\n", dataset.c_str(),
                100 * s.mpleb_mean, 100 * s.mpleb_std);
  out << buf;
  return out.str();
}

}  // namespace depreg
