#include "depreg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "depreg/error.hpp"

namespace depreg {

PsiValue psi(const Eigen::VectorXd& h, double beta, const Eigen::VectorXd& h_star,
             double beta_star, const InteractionMatrix& a) {
  require(h.size() == a.size() && h_star.size() == a.size(), "psi: field length mismatch");
  const double d_beta = beta - beta_star;
  const double fro = a.cached_norms().frobenius;
  PsiValue out;
  out.frobenius_term = d_beta * d_beta * fro * fro;
  if (d_beta == 0.0) {
    out.residual_term = (h - h_star).squaredNorm();
  } else {
    const Eigen::VectorXd arg = (beta_star / d_beta) * (h_star - h) + h_star;
    const Eigen::VectorXd mean_field = arg.array().tanh().matrix();
    out.residual_term = (h - h_star + d_beta * a.apply(mean_field)).squaredNorm();
  }
  out.value = out.frobenius_term + out.residual_term;
  return out;
}

namespace {

constexpr double kGolden = 0.6180339887498949;

// psi / t^2 along the ray h = h* + t g, beta = beta* + t mu.
double ray_psi(const Eigen::VectorXd& g, double mu, const Eigen::VectorXd& h_star,
               double beta_star, const InteractionMatrix& a, double fro2) {
  if (mu == 0.0) return g.squaredNorm();
  const Eigen::VectorXd arg = h_star - (beta_star / mu) * g;
  const Eigen::VectorXd mean_field = arg.array().tanh().matrix();
  return mu * mu * fro2 + (g + mu * a.apply(mean_field)).squaredNorm();
}

struct RayBest {
  double c1 = 0.0;
  double c2 = 0.0;
  double mu = 0.0;
};

// Maximizes ||g||^2/n / ray_psi over mu: signed log-grid, then golden section
// in log|mu| around the best grid point.
RayBest best_mu(const Eigen::VectorXd& g, const Eigen::VectorXd& h_star, double beta_star,
                const InteractionMatrix& a, const C1SearchOptions& opt, long& evals,
                std::optional<double> around = std::nullopt) {
  const double n = static_cast<double>(g.size());
  const double g2n = g.squaredNorm() / n;
  const double fro2 = a.cached_norms().frobenius * a.cached_norms().frobenius;
  RayBest best;
  auto consider = [&](double mu) {
    const double d = ray_psi(g, mu, h_star, beta_star, a, fro2);
    ++evals;
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    const double c1 = g2n / d;
    best.c2 = std::max(best.c2, mu * mu / d);
    if (c1 > best.c1) {
      best.c1 = c1;
      best.mu = mu;
    }
    return c1;
  };

  double lo_exp = std::log10(opt.lambda_min);
  double hi_exp = std::log10(opt.lambda_max);
  int per_decade = opt.grid_per_decade;
  if (around) {
    consider(*around);
    if (*around == 0.0) return best;
    const double c = std::log10(std::abs(*around));
    lo_exp = c - 0.5;
    hi_exp = c + 0.5;
    per_decade = 10;
  } else {
    consider(0.0);
  }
  const int steps = std::max(2, static_cast<int>(std::ceil((hi_exp - lo_exp) * per_decade)));
  const double h_exp = (hi_exp - lo_exp) / steps;
  double best_exp = lo_exp;
  double best_sign = 1.0;
  double best_grid = -1.0;
  for (double sign : {1.0, -1.0}) {
    if (around && sign * *around < 0.0) continue;
    for (int k = 0; k <= steps; ++k) {
      const double e = lo_exp + k * h_exp;
      const double v = consider(sign * std::pow(10.0, e));
      if (v > best_grid) {
        best_grid = v;
        best_exp = e;
        best_sign = sign;
      }
    }
  }
  double lo = best_exp - h_exp;
  double hi = best_exp + h_exp;
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = consider(best_sign * std::pow(10.0, x1));
  double f2 = consider(best_sign * std::pow(10.0, x2));
  for (int it = 0; it < opt.golden_iterations; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = consider(best_sign * std::pow(10.0, x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = consider(best_sign * std::pow(10.0, x1));
    }
  }
  return best;
}

ComplexityEstimate explicit_search(const ExplicitFamily& family, const Eigen::VectorXd& h_star,
                                   double beta_star, const InteractionMatrix& a, double beta_box,
                                   const C1SearchOptions& opt) {
  ComplexityEstimate out;
  out.method = "explicit: beta grid + golden section per field";
  out.witness_field = h_star;
  out.witness_beta = beta_star;
  const double n = static_cast<double>(a.size());
  bool any = false;
  for (const auto& h : family.fields) {
    require(h.size() == a.size(), "c1_prime_estimate: family field length mismatch");
    const double g2n = (h - h_star).squaredNorm() / n;
    if (g2n == 0.0) continue;
    any = true;
    auto ratio = [&](double beta) {
      ++out.evaluations;
      const double p = psi(h, beta, h_star, beta_star, a).value;
      out.c2_prime = std::max(out.c2_prime, (beta - beta_star) * (beta - beta_star) / p);
      out.c1 = std::max(out.c1, std::min(g2n / p, g2n));
      return g2n / p;
    };
    const int grid = 400;
    double best_beta = -beta_box;
    double best = -1.0;
    for (int k = 0; k <= grid; ++k) {
      const double b = -beta_box + 2.0 * beta_box * k / grid;
      const double v = ratio(b);
      if (v > best) {
        best = v;
        best_beta = b;
      }
    }
    const double v0 = ratio(beta_star);
    if (v0 > best) {
      best = v0;
      best_beta = beta_star;
    }
    double lo = std::max(-beta_box, best_beta - 2.0 * beta_box / grid);
    double hi = std::min(beta_box, best_beta + 2.0 * beta_box / grid);
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = ratio(x1);
    double f2 = ratio(x2);
    for (int it = 0; it < opt.golden_iterations; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kGolden * (hi - lo);
        f2 = ratio(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kGolden * (hi - lo);
        f1 = ratio(x1);
      }
    }
    for (auto [b, v] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
      if (v > best) {
        best = v;
        best_beta = b;
      }
    }
    if (best > out.c1_prime) {
      out.c1_prime = best;
      out.witness_field = h;
      out.witness_beta = best_beta;
      out.witness_lambda = best_beta - beta_star;
    }
  }
  out.degenerate = !any;
  return out;
}

ComplexityEstimate linear_search(const LinearFamily& family, const Eigen::VectorXd& h_star,
                                 const Eigen::VectorXd& theta_star, double beta_star,
                                 const InteractionMatrix& a, double beta_box,
                                 const C1SearchOptions& opt) {
  const FeatureMatrix& x = family.X;
  require(x.rows() == a.size(), "c1_prime_estimate: feature rows do not match matrix size");
  require(theta_star.size() == x.cols(), "c1_prime_estimate: theta* dimension mismatch");
  require(theta_star.norm() < family.radius && std::abs(beta_star) < beta_box,
          "c1_prime_estimate: (theta*, beta*) must lie in the interior of the parameter set");
  ComplexityEstimate out;
  out.witness_field = h_star;
  out.witness_theta = theta_star;
  out.witness_beta = beta_star;
  const Index d = x.cols();
  const double scale = std::sqrt(static_cast<double>(a.size()));

  // Direction u on the unit sphere, ray field g = X u rescaled to norm sqrt(n).
  auto ray_field = [&](const Eigen::VectorXd& u, Eigen::VectorXd& g) {
    g = x * u;
    const double gn = g.norm();
    if (gn == 0.0) return false;
    g *= scale / gn;
    return true;
  };

  Eigen::VectorXd best_u;
  RayBest best;
  auto try_direction = [&](const Eigen::VectorXd& u, std::optional<double> around) {
    Eigen::VectorXd g;
    if (!ray_field(u, g)) return RayBest{};
    RayBest r = best_mu(g, h_star, beta_star, a, opt, out.evaluations, around);
    out.c2_prime = std::max(out.c2_prime, r.c2);
    if (r.c1 > best.c1) {
      best = r;
      best_u = u;
    }
    return r;
  };

  if (d == 1) {
    out.method = "d=1: signed log-grid over lambda + golden section";
    try_direction(Eigen::VectorXd::Ones(1), std::nullopt);
  } else {
    out.method = "random restarts + coordinate ascent over directions";
    for (Index k = 0; k < d; ++k) try_direction(Eigen::VectorXd::Unit(d, k), std::nullopt);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int r = 0; r < opt.random_directions; ++r) {
      Eigen::VectorXd u(d);
      for (Index k = 0; k < d; ++k) u(k) = normal(rng);
      if (u.norm() == 0.0) continue;
      try_direction(u.normalized(), std::nullopt);
    }
    if (best_u.size() == d) {
      double delta = 0.25;
      for (int round = 0; round < opt.ascent_rounds && delta > 1e-6; ++round) {
        bool improved = false;
        for (Index k = 0; k < d; ++k) {
          for (double s : {1.0, -1.0}) {
            Eigen::VectorXd u = best_u;
            u(k) += s * delta;
            if (u.norm() == 0.0) continue;
            const double before = best.c1;
            try_direction(u.normalized(), best.mu);
            if (best.c1 > before) improved = true;
          }
        }
        if (!improved) delta *= 0.5;
      }
    }
  }

  if (best_u.size() != d || best.c1 == 0.0) {
    out.degenerate = true;
    return out;
  }
  // Feasible witness on the best ray: h = h* + t g, beta = beta* + t mu.
  Eigen::VectorXd u = best_u;
  const double xu = (x * u).norm();
  u *= scale / xu;  // X u is now the rescaled ray field
  double t_max = (family.radius - theta_star.norm()) / u.norm();
  if (best.mu != 0.0) t_max = std::min(t_max, (beta_box - std::abs(beta_star)) / std::abs(best.mu));
  const double t = 0.5 * t_max;
  out.c1_prime = best.c1;
  out.c1 = std::min(best.c1, t_max * t_max);
  out.witness_theta = theta_star + t * u;
  out.witness_field = x * *out.witness_theta;
  out.witness_beta = beta_star + t * best.mu;
  out.witness_lambda = -best.mu;
  return out;
}

}  // namespace

ComplexityEstimate c1_prime_estimate(const FieldFamily& family, const Eigen::VectorXd& h_star,
                                     const std::optional<Eigen::VectorXd>& theta_star,
                                     double beta_star, const InteractionMatrix& a, double beta_box,
                                     const C1SearchOptions& options) {
  require(h_star.size() == a.size(), "c1_prime_estimate: h* length mismatch");
  require(beta_box >= 0.0, "c1_prime_estimate: negative beta box");
  if (const auto* ex = std::get_if<ExplicitFamily>(&family)) {
    require(!ex->fields.empty(), "c1_prime_estimate: empty family");
    return explicit_search(*ex, h_star, beta_star, a, beta_box, options);
  }
  const auto& lin = std::get<LinearFamily>(family);
  require(theta_star.has_value(), "c1_prime_estimate: linear family needs theta*");
  return linear_search(lin, h_star, *theta_star, beta_star, a, beta_box, options);
}

KLReport kl_tv_exact(const IsingModel& model_0, const IsingModel& model_1) {
  require(model_0.size() == model_1.size(), "kl_tv_exact: models must have the same size");
  const Eigen::VectorXd lp0 = exact_log_probabilities(model_0);
  const Eigen::VectorXd lp1 = exact_log_probabilities(model_1);
  const Eigen::ArrayXd p0 = lp0.array().exp();
  const Eigen::ArrayXd p1 = lp1.array().exp();
  KLReport out;
  out.kl_forward = std::max(0.0, (p0 * (lp0 - lp1).array()).sum());
  out.kl_backward = std::max(0.0, (p1 * (lp1 - lp0).array()).sum());
  out.tv = 0.5 * (p0 - p1).abs().sum();
  out.pinsker_ok = out.tv <= std::sqrt(out.kl_forward / 2.0) + 1e-12 &&
                   out.tv <= std::sqrt(out.kl_backward / 2.0) + 1e-12;
  return out;
}

double mean_field_functional(const IsingModel& model, const Eigen::VectorXd& v,
                             const SpinVector& sigma) {
  require(v.size() == model.size(), "mean_field_functional: v length mismatch");
  return v.dot(sigma - conditional_means(model, sigma));
}

double exchangeable_pairs_bound(double t, double v_norm, double beta, double a_infinity) {
  return 2.0 * std::exp(-t * t / (8.0 * v_norm * v_norm * (1.0 + std::abs(beta) * a_infinity)));
}

TailReport exchangeable_pairs_test(const IsingModel& model, const Eigen::VectorXd& v,
                                   const GibbsOptions& sampling,
                                   std::optional<Eigen::VectorXd> t_grid) {
  require(v.size() == model.size(), "exchangeable_pairs_test: v length mismatch");
  require(v.norm() > 0.0, "exchangeable_pairs_test: v must be nonzero");
  TailReport out;
  out.v_norm = v.norm();
  const double a_inf = model.A.cached_norms().infinity;
  if (t_grid) {
    out.t_grid = *t_grid;
  } else {
    const double unit = out.v_norm * std::sqrt(2.0 * (1.0 + std::abs(model.beta) * a_inf));
    out.t_grid = Eigen::VectorXd::LinSpaced(17, 0.0, 16.0) * unit;
  }
  const auto states = gibbs_sample(model, sampling);
  Eigen::VectorXd values(static_cast<Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    values(static_cast<Index>(k)) = mean_field_functional(model, v, states[k]);
  }
  out.samples = static_cast<int>(values.size());
  out.mean = values.mean();
  const double var = out.samples > 1
                         ? (values.array() - out.mean).square().sum() / (out.samples - 1)
                         : 0.0;
  out.std_error = std::sqrt(var / out.samples);
  out.exceedance.resize(out.t_grid.size());
  out.bound.resize(out.t_grid.size());
  for (Index k = 0; k < out.t_grid.size(); ++k) {
    const double t = out.t_grid(k);
    out.exceedance(k) = (values.array().abs() > t).cast<double>().mean();
    out.bound(k) = exchangeable_pairs_bound(t, out.v_norm, model.beta, a_inf);
    if (out.exceedance(k) > out.bound(k)) out.bound_holds = false;
  }
  return out;
}

KappaReport kappa_and_restricted_eig(const FeatureMatrix& x, std::optional<double> l1_radius,
                                     int draws, std::uint64_t seed) {
  require(x.rows() >= 1, "kappa: need at least one observation");
  require(x.cols() >= 1, "kappa: need at least one feature");
  require(x.cols() <= kMaxKappaDimension,
          "kappa: dense eigensolve capped at d = " + std::to_string(kMaxKappaDimension));
  const double n = static_cast<double>(x.rows());
  const Eigen::MatrixXd gram = (x.transpose() * x) / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  KappaReport out;
  out.kappa = std::max(0.0, solver.eigenvalues()(0));
  if (!l1_radius) return out;
  require(*l1_radius > 0.0, "kappa: l1 radius must be positive");

  const Index d = x.cols();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Unit vectors with at most floor(s^2) nonzeros satisfy ||theta||_1 <= s.
  const Index max_support =
      std::clamp<Index>(static_cast<Index>(std::floor(*l1_radius * *l1_radius)), 1, d);
  std::uniform_int_distribution<Index> support_size(1, max_support);
  std::vector<Index> coords(static_cast<std::size_t>(d));
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < d; ++k) best = std::min(best, gram(k, k));
  for (int r = 0; r < draws; ++r) {
    const Index s = support_size(rng);
    for (Index k = 0; k < d; ++k) coords[static_cast<std::size_t>(k)] = k;
    std::shuffle(coords.begin(), coords.end(), rng);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    for (Index k = 0; k < s; ++k) theta(coords[static_cast<std::size_t>(k)]) = normal(rng);
    const double norm = theta.norm();
    if (norm == 0.0) continue;
    theta /= norm;
    best = std::min(best, theta.dot(gram * theta));
  }
  out.restricted = std::max(best, out.kappa);
  out.restricted_is_estimate = true;
  out.draws = draws;
  return out;
}

Eigen::VectorXd curie_weiss_pattern(double alpha, Index n) {
  require(alpha > 0.0 && alpha < 1.0, "curie_weiss_rate: alpha must lie in (0, 1)");
  require(n >= 1, "curie_weiss_rate: n must be positive");
  const auto plus = static_cast<Index>(std::llround(alpha * static_cast<double>(n)));
  Eigen::VectorXd h = -Eigen::VectorXd::Ones(n);
  h.head(plus).setOnes();
  return h;
}

CurieWeissRate curie_weiss_rate(double alpha, Index n) {
  const Eigen::VectorXd h = curie_weiss_pattern(alpha, n);
  const double dn = static_cast<double>(n);
  const double inner = h.sum();
  CurieWeissRate out;
  out.plus_count = static_cast<Index>((h.array() > 0.0).count());
  out.lambda_star = -inner / dn;
  out.residual = std::sqrt(std::max(0.0, h.squaredNorm() - inner * inner / dn));
  return out;
}

}  // namespace depreg
