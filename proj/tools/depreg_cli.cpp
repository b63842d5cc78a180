// depreg command line: sampling, fitting, diagnostics and the experiment drivers.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "depreg/data.hpp"
#include "depreg/diagnostics.hpp"
#include "depreg/error.hpp"
#include "depreg/harness.hpp"
#include "depreg/mple.hpp"
#include "depreg/potts.hpp"
#include "depreg/table.hpp"

using json = nlohmann::ordered_json;
using namespace depreg;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_path;
  json config = json::object();
};

template <typename T>
T opt(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  return j.contains(key) ? j.at(key) : empty;
}

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

json to_json(const FitResult& r) {
  json j;
  j["theta_hat"] = to_json(r.theta_hat);
  j["beta_hat"] = r.beta_hat;
  j["objective_value"] = r.objective_value;
  j["iterations"] = r.iterations;
  j["final_projected_grad_norm"] = r.final_projected_grad_norm;
  j["converged"] = r.converged;
  j["stalled"] = r.stalled;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + path);
  out << j.dump(2) << '\n';
}

std::string out_path(const Globals& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return (std::filesystem::path(g.out_dir) / name).string();
}

GibbsOptions gibbs_from(const json& j, GibbsOptions base) {
  base.burn_in = opt(j, "burn_in", base.burn_in);
  base.thin = opt(j, "thin", base.thin);
  return base;
}

FitOptions fit_from(const json& j) {
  FitOptions f;
  f.max_iters = opt(j, "max_iters", f.max_iters);
  f.tol = opt(j, "tol", f.tol);
  f.step = opt(j, "step", f.step);
  if (j.contains("beta_frozen") && !j.at("beta_frozen").is_null()) {
    f.beta_frozen = j.at("beta_frozen").get<double>();
  }
  return f;
}

MatrixSpec matrix_from(const json& j) {
  MatrixSpec m;
  const std::string kind = opt<std::string>(j, "kind", "block");
  if (kind == "block") {
    m.kind = MatrixSpec::Kind::block;
    m.blocks = opt<Index>(j, "blocks", 1);
  } else if (kind == "curie_weiss") {
    m.kind = MatrixSpec::Kind::curie_weiss;
  } else if (kind == "edges") {
    m.kind = MatrixSpec::Kind::edges;
    const std::string file = opt<std::string>(j, "file", "");
    require(!file.empty(), "matrix kind 'edges' needs a 'file'");
    for (const auto& e : read_edge_list_file(file)) m.edges.emplace_back(e.i, e.j);
  } else {
    throw ConfigError("unknown matrix kind '" + kind + "'");
  }
  return m;
}

Constraints constraints_from(const json& j) {
  Constraints c;
  c.l2_radius = opt(j, "l2", c.l2_radius);
  c.beta_box = opt(j, "beta_box", c.beta_box);
  if (j.contains("l1") && !j.at("l1").is_null()) c.l1_radius = j.at("l1").get<double>();
  return c;
}

FunctionClassModel model_from(const json& j, Index d, std::uint64_t seed) {
  const ModelKind kind = parse_model_kind(opt<std::string>(j, "model", "linear"));
  const Constraints c = constraints_from(j);
  switch (kind) {
    case ModelKind::linear: return FunctionClassModel::linear(d, 1, c);
    case ModelKind::sparse_linear:
      require(c.l1_radius.has_value(), "model 'sparse' needs an l1 radius");
      return FunctionClassModel::sparse_linear(d, *c.l1_radius, 1, c);
    case ModelKind::mlp2: return FunctionClassModel::mlp2(d, opt<Index>(j, "hidden", 32), 1, seed, c);
  }
  throw ConfigError("unknown model");
}

SvgOptions svg_for(const std::string& x, const std::string& series = "") {
  SvgOptions s;
  s.x_column = x;
  s.series_column = series;
  return s;
}

void print_paths(const std::vector<std::string>& paths) {
  for (const auto& p : paths) std::cout << "wrote " << p << '\n';
}

// ---- subcommands ----

void run_sample(const Globals& g) {
  const json& c = g.config;
  SyntheticSpec s;
  s.n = opt<Index>(c, "n", 100);
  s.d = opt<Index>(c, "d", 1);
  s.matrix = matrix_from(section(c, "matrix"));
  s.beta_star = opt(c, "beta_star", 0.0);
  s.theta_norm = opt(c, "theta_norm", 1.0);
  if (c.contains("theta_star")) s.theta_star = vector_from(c.at("theta_star"));
  const std::string law = opt<std::string>(c, "feature_law", "gaussian");
  if (law == "gaussian") {
    s.feature_law = FeatureLaw::gaussian;
  } else if (law == "ones") {
    s.feature_law = FeatureLaw::ones;
  } else if (law == "given") {
    s.feature_law = FeatureLaw::given;
    s.given_X = read_features_csv(opt<std::string>(c, "features", ""));
  } else {
    throw ConfigError("unknown feature_law '" + law + "'");
  }
  s.clip = opt(c, "clip", s.clip);
  s.gibbs = gibbs_from(c, s.gibbs);
  s.seed = g.seed;
  const Dataset data = gen_synthetic(s);
  write_features_csv(out_path(g, "features.csv"), data.X);
  write_spins_csv(out_path(g, "spins.csv"), data.spins());
  json truth;
  truth["theta_star"] = to_json(Eigen::VectorXd(data.ground_truth->theta.col(0)));
  truth["beta_star"] = data.ground_truth->beta;
  truth["clipped"] = data.ground_truth->clipped;
  truth["seed"] = g.seed;
  write_json(out_path(g, "ground_truth.json"), truth);
  std::cout << "sampled n=" << s.n << " d=" << s.d << " clipped=" << data.ground_truth->clipped
            << " into " << g.out_dir << '\n';
}

struct Instance {
  InteractionMatrix A;
  FeatureMatrix X;
  Eigen::VectorXd sigma;
};

Instance load_instance(const json& c) {
  Instance in;
  in.X = read_features_csv(opt<std::string>(c, "features", ""));
  in.A = build_matrix(matrix_from(section(c, "matrix")), in.X.rows());
  if (c.contains("spins")) in.sigma = read_spins_csv(c.at("spins").get<std::string>());
  return in;
}

void run_fit(const Globals& g, const json& flags) {
  json c = g.config;
  for (auto it = flags.begin(); it != flags.end(); ++it) c[it.key()] = it.value();
  const Instance in = load_instance(c);
  require(in.sigma.size() == in.X.rows(), "fit: 'spins' file is required and must match features");
  const FunctionClassModel model = model_from(c, in.X.cols(), g.seed);
  const PLProblem problem = PLProblem::build(in.A, in.X, in.sigma, model);
  const FitResult r = fit(problem, fit_from(c));
  json j = to_json(r);
  j["model"] = to_string(model.kind());
  j["n"] = in.X.rows();
  j["d"] = in.X.cols();
  write_json(out_path(g, "fit.json"), j);
  std::cout << "beta_hat=" << format_double(r.beta_hat) << " iterations=" << r.iterations
            << " converged=" << (r.converged ? "yes" : "no") << '\n';
}

void run_diagnose(const Globals& g) {
  const json& c = g.config;
  const Instance in = load_instance(c);
  require(c.contains("theta_star"), "diagnose: config needs theta_star");
  const Eigen::VectorXd theta_star = vector_from(c.at("theta_star"));
  const double beta_star = opt(c, "beta_star", 0.0);
  const double radius = opt(c, "l2", 2.0 * std::max(1.0, theta_star.norm()));
  const double beta_box = opt(c, "beta_box", 1.0);
  require(theta_star.size() == in.X.cols(), "diagnose: theta_star dimension mismatch");
  const Eigen::VectorXd h_star = in.X * theta_star;

  json report;
  const MatrixNorms nm = norms(in.A);
  report["norms"] = {{"frobenius", nm.frobenius},
                     {"spectral", nm.spectral},
                     {"infinity", nm.infinity},
                     {"power_iterations", nm.power_iterations}};
  std::optional<double> l1;
  if (c.contains("l1")) l1 = c.at("l1").get<double>();
  if (in.X.cols() <= kMaxKappaDimension) {
    const KappaReport k = kappa_and_restricted_eig(in.X, l1, 2000, g.seed);
    report["kappa"] = {{"kappa", k.kappa}};
    if (k.restricted) report["kappa"]["restricted_estimate"] = *k.restricted;
  }
  C1SearchOptions so;
  so.seed = g.seed;
  const ComplexityEstimate ce =
      c1_prime_estimate(LinearFamily{in.X, radius}, h_star, theta_star, beta_star, in.A, beta_box, so);
  report["c1_prime"] = {{"c1_prime", ce.c1_prime},
                        {"c1", ce.c1},
                        {"c2_prime", ce.c2_prime},
                        {"witness_beta", ce.witness_beta},
                        {"witness_lambda", ce.witness_lambda},
                        {"degenerate", ce.degenerate},
                        {"is_lower_bound", ce.is_lower_bound},
                        {"evaluations", ce.evaluations},
                        {"method", ce.method},
                        {"reference_4_over_fro2", 4.0 / (nm.frobenius * nm.frobenius)}};
  if (ce.witness_theta) report["c1_prime"]["witness_theta"] = to_json(*ce.witness_theta);

  json checks = json::array();
  const Eigen::VectorXd h1 = ce.witness_field;
  const double b1 = ce.witness_beta;
  const double base = psi(h1, b1, h_star, beta_star, in.A).value;
  for (double t : {0.5, 2.0, -3.0}) {
    const double scaled =
        psi(h_star + t * (h1 - h_star), beta_star + t * (b1 - beta_star), h_star, beta_star, in.A).value;
    checks.push_back({{"t", t}, {"psi_t", scaled}, {"t2_psi_1", t * t * base}});
  }
  report["psi_checks"] = checks;

  if (in.X.rows() <= kMaxEnumerationSites) {
    const IsingModel m0{in.A, h_star, beta_star};
    const IsingModel m1{in.A, h1, b1};
    const KLReport kl = kl_tv_exact(m0, m1);
    report["kl_tv"] = {{"kl_forward", kl.kl_forward},
                       {"kl_backward", kl.kl_backward},
                       {"tv", kl.tv},
                       {"pinsker_ok", kl.pinsker_ok}};
  } else {
    report["kl_tv"] = nullptr;
  }
  write_json(out_path(g, "diagnose.json"), report);
  std::cout << report.dump(2) << '\n';
}

void run_rate(const Globals& g) {
  const json& c = g.config;
  RateSpec s;
  s.kind = parse_rate_kind(opt<std::string>(c, "kind", "frobenius_sweep"));
  s.grid = opt<std::vector<double>>(c, "grid", {4, 16, 64, 256});
  s.trials = opt(c, "trials", s.trials);
  s.n = opt(c, "n", s.n);
  s.d = opt(c, "d", s.d);
  s.sparsity = opt(c, "sparsity", s.sparsity);
  s.blocks = opt(c, "blocks", s.blocks);
  s.beta_star = opt(c, "beta_star", s.beta_star);
  s.theta_norm = opt(c, "theta_norm", s.theta_norm);
  if (c.contains("theta_star")) s.theta_star = vector_from(c.at("theta_star"));
  s.l2_radius = opt(c, "l2", s.l2_radius);
  s.beta_box = opt(c, "beta_box", s.beta_box);
  const std::string features = opt<std::string>(c, "features", "gaussian");
  require(features == "gaussian" || features == "cyclic_basis",
          "features must be 'gaussian' or 'cyclic_basis'");
  s.features = features == "gaussian" ? SweepFeatures::gaussian : SweepFeatures::cyclic_basis;
  s.gibbs = gibbs_from(c, s.gibbs);
  s.fit = fit_from(section(c, "fit"));
  s.seed = g.seed;
  const ExperimentTable t = rate_experiment(s);
  print_paths(emit(t, g.out_dir, t.experiment_id, svg_for("x")));
  for (const auto& r : t.rows) {
    if (r.metric.rfind("slope_", 0) == 0) std::cout << r.metric << " = " << format_double(r.value) << '\n';
  }
}

void run_lower_bound(const Globals& g) {
  const json& c = g.config;
  const LowerBoundReport r =
      lower_bound_demo(opt<Index>(c, "n", 12), opt<Index>(c, "r", 3),
                       opt<std::vector<double>>(c, "c0", {1.0, 0.5, 0.1, 0.01, 0.001}));
  const ExperimentTable t = lower_bound_table(r);
  print_paths(emit(t, g.out_dir, t.experiment_id, std::nullopt));
  std::printf("a = %.10f (bisection steps %d)\n", r.a, r.bisection_steps);
  std::printf("||A||_F^2 = %.10g, psi identity error = %.3g\n", r.frobenius_sq, r.psi_identity_error);
  for (const auto& p : r.points) {
    std::printf("zeta=%.4g psi=%.6g KL=%.6g TV=%.6g Le-Cam floor=%.6f KL/psi=%.4g\n", p.zeta,
                p.psi.value, p.kl.kl_forward, p.kl.tv, p.le_cam_floor, p.kl_over_psi);
  }
}

void run_curie_weiss(const Globals& g) {
  const json& c = g.config;
  CurieWeissSpec s;
  s.alphas = opt(c, "alphas", s.alphas);
  s.n = opt(c, "n", s.n);
  s.trials = opt(c, "trials", s.trials);
  s.theta_star = opt(c, "theta_star", s.theta_star);
  s.beta_star = opt(c, "beta_star", s.beta_star);
  s.l2_radius = opt(c, "l2", s.l2_radius);
  s.beta_box = opt(c, "beta_box", s.beta_box);
  s.gibbs = gibbs_from(c, s.gibbs);
  s.fit = fit_from(section(c, "fit"));
  s.seed = g.seed;
  const ExperimentTable t = curie_weiss_experiment(s);
  SvgOptions svg = svg_for("alpha");
  svg.log_x = false;
  print_paths(emit(t, g.out_dir, t.experiment_id, svg));
}

void run_benchmark(const Globals& g) {
  const json& c = g.config;
  BenchmarkOptions o;
  o.hidden = opt(c, "hidden", o.hidden);
  o.l2_radius = opt(c, "l2", o.l2_radius);
  o.beta_box = opt(c, "beta_box", o.beta_box);
  o.resplit = opt(c, "resplit", o.resplit);
  o.fit = fit_from(section(c, "fit"));
  std::vector<std::uint64_t> seeds = opt<std::vector<std::uint64_t>>(c, "seeds", {});
  if (seeds.empty()) {
    for (int k = 0; k < opt(c, "runs", 10); ++k) seeds.push_back(g.seed + static_cast<std::uint64_t>(k));
  }
  ExperimentTable t;
  std::string name;
  if (c.contains("dataset")) {
    const json& d = c.at("dataset");
    CitationPaths p{opt<std::string>(d, "nodes", ""), opt<std::string>(d, "edges", ""),
                    opt<std::string>(d, "splits", "")};
    const Dataset data = load_citation(p);
    const DatasetCounts k = counts(data);
    name = opt<std::string>(d, "name", "dataset");
    std::cout << name << ": classes=" << k.classes << " nodes=" << k.nodes << " edges=" << k.edges
              << " features=" << k.features << '\n';
    t = accuracy_benchmark(data, o, seeds);
  } else {
    const json& p = section(c, "planted");
    PlantedPottsSpec s;
    s.n = opt(p, "n", s.n);
    s.classes = opt(p, "classes", s.classes);
    s.d = opt(p, "d", s.d);
    s.clique_size = opt(p, "clique_size", s.clique_size);
    s.degree = opt(p, "degree", s.degree);
    s.field_scale = opt(p, "field_scale", s.field_scale);
    s.beta_star = opt(p, "beta_star", s.beta_star);
    s.gibbs = gibbs_from(p, s.gibbs);
    name = "planted";
    t = planted_benchmark(s, o, seeds);
  }
  print_paths(emit(t, g.out_dir, t.experiment_id, std::nullopt));
  const BenchmarkSummary s = summarize_benchmark(t);
  std::cout << format_accuracy_rows(s, name);
  std::cout << "MPLE-beta >= MPLE-0 in " << s.wins_or_ties << " of " << s.seeds << " runs\n";
}

void run_emit(const Globals& g, const std::string& input, const std::string& x,
              const std::string& series, bool linear_x) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw DataError(DataErrorKind::missing_file, "cannot open " + input);
  const ExperimentTable t = read_csv(in);
  SvgOptions svg = svg_for(x, series);
  svg.log_x = !linear_x;
  const std::string stem = std::filesystem::path(input).stem().string();
  print_paths(emit(t, g.out_dir, stem, svg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depreg: regression with dependent labels"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--config", g.config_path, "JSON configuration file");

  app.add_subcommand("sample", "Draw features and Gibbs-sampled spins");
  auto* fit_cmd = app.add_subcommand("fit", "Maximum pseudo-likelihood fit");
  std::string model_kind;
  std::optional<double> beta_frozen, l1, l2, beta_box, tol;
  std::optional<int> max_iters;
  fit_cmd->add_option("--model", model_kind, "linear, sparse or mlp");
  fit_cmd->add_option("--beta-frozen", beta_frozen);
  fit_cmd->add_option("--l1", l1);
  fit_cmd->add_option("--l2", l2);
  fit_cmd->add_option("--beta-box", beta_box);
  fit_cmd->add_option("--tol", tol);
  fit_cmd->add_option("--max-iters", max_iters);
  app.add_subcommand("diagnose", "Norms, kappa, C1' search, psi scaling and KL/TV");
  app.add_subcommand("rate-experiment", "Error-rate sweeps");
  app.add_subcommand("lower-bound-demo", "Two-point lower-bound construction");
  app.add_subcommand("curie-weiss", "Curie-Weiss field-pattern experiment");
  app.add_subcommand("benchmark", "MPLE-0 against MPLE-beta node classification");
  auto* emit_cmd = app.add_subcommand("emit", "Re-emit a CSV table and its SVG chart");
  std::string emit_input, emit_x = "x", emit_series;
  bool emit_linear = false;
  emit_cmd->add_option("--input", emit_input)->required();
  emit_cmd->add_option("--x", emit_x, "Config column for the horizontal axis");
  emit_cmd->add_option("--series", emit_series, "Config column that splits lines");
  emit_cmd->add_flag("--linear-x", emit_linear);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!g.config_path.empty()) {
      std::ifstream in(g.config_path);
      if (!in) throw ConfigError("cannot open config " + g.config_path);
      try {
        g.config = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      require(g.config.is_object(), "config must be a JSON object");
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "sample") {
      run_sample(g);
    } else if (cmd == "fit") {
      json flags = json::object();
      if (!model_kind.empty()) flags["model"] = model_kind;
      if (beta_frozen) flags["beta_frozen"] = *beta_frozen;
      if (l1) flags["l1"] = *l1;
      if (l2) flags["l2"] = *l2;
      if (beta_box) flags["beta_box"] = *beta_box;
      if (tol) flags["tol"] = *tol;
      if (max_iters) flags["max_iters"] = *max_iters;
      run_fit(g, flags);
    } else if (cmd == "diagnose") {
      run_diagnose(g);
    } else if (cmd == "rate-experiment") {
      run_rate(g);
    } else if (cmd == "lower-bound-demo") {
      run_lower_bound(g);
    } else if (cmd == "curie-weiss") {
      run_curie_weiss(g);
    } else if (cmd == "benchmark") {
      run_benchmark(g);
    } else if (cmd == "emit") {
      run_emit(g, emit_input, emit_x, emit_series, emit_linear);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
