#include "lcmle/mle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "lcmle/error.hpp"
#include "lcmle/partition.hpp"
#include "lcmle/sampler.hpp"

namespace lcmle {

namespace {

void check_config(const FitConfig& cfg) {
  if (cfg.iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 1");
  if (!(cfg.step_constant > 0.0)) throw Error(ErrorKind::InvalidArgument, "step constant must be positive");
  if (!(cfg.round_target_C > 1.0)) throw Error(ErrorKind::InvalidArgument, "round target must exceed 1");
  if (cfg.radius_clip && !(*cfg.radius_clip > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "radius clip must be positive");
  }
  if (cfg.chain_steps < 0) throw Error(ErrorKind::InvalidArgument, "chain steps must be >= 1");
}

// Covariance square root of recent chain states, or nullopt when the window
// is still too small or flat.
std::optional<AffineMap> map_from_window(const std::deque<Eigen::VectorXd>& window, int dim) {
  if (static_cast<int>(window.size()) < 10 * (dim + 1)) return std::nullopt;
  Eigen::MatrixXd pts(dim, static_cast<Eigen::Index>(window.size()));
  for (std::size_t i = 0; i < window.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = window[i];
  try {
    const Moments m = estimate_covariance(pts);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.cov);
    const Eigen::MatrixXd root = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
                                 eig.eigenvectors().transpose();
    return AffineMap::from(root, m.mean);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::RankDeficient) return std::nullopt;
    throw;
  }
}

void attach_partition(Rng& rng, Model& model, const FitConfig& cfg) {
  if (model.point_set.dim() <= 2) {
    model.log_partition = log_partition_quadrature(model.point_set, model.heights);
    model.log_partition_error = 1e-9;
  } else {
    const SliceEstimate est = log_partition_sliced(rng, model.point_set, model.heights, cfg.epsilon);
    model.log_partition = est.log_partition;
    model.log_partition_error = est.additive_error;
  }
}

}  // namespace

long chain_steps_per_iteration(const FitConfig& cfg, int count, int dim) {
  // A chord through a 1-d hull is the whole hull, so one step is an exact draw.
  if (dim == 1) return 1;
  const double m = std::max(2.0, static_cast<double>(cfg.iterations));
  if (cfg.strict_tv) {
    // m >= C^4 H^4 n^3 / tv^4 ln^3(2H/tv) with H = 1, tv = m^-tv_exponent.
    const double log_inv_tv = cfg.tv_exponent * std::log(m);
    const double log_steps = 4.0 * std::log(cfg.round_target_C) + 3.0 * std::log(count) +
                             4.0 * log_inv_tv + 3.0 * std::log(std::log(2.0) + log_inv_tv);
    return log_steps >= std::log(static_cast<double>(cfg.strict_step_cap))
               ? cfg.strict_step_cap
               : std::max(1L, static_cast<long>(std::ceil(std::exp(log_steps))));
  }
  return std::max(1L, static_cast<long>(std::ceil(cfg.tv_exponent * std::log(m))));
}

FitReport sgd_fit(Rng& rng, const PointSet& ps, const FitConfig& cfg) {
  check_config(cfg);
  if (!ps.full_dimensional()) {
    throw Error(ErrorKind::DegenerateGeometry, "sample points do not span a full-dimensional hull");
  }
  const auto started = std::chrono::steady_clock::now();
  const int n = ps.count();
  const int d = ps.dim();
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd y = uniform;

  FitReport report{Model{ps, TentParams(y), 0.0, 0.0, false, {}}, 0.0, 0.0, {}, 1, cfg.iterations};
  report.trace.reserve(static_cast<std::size_t>(cfg.iterations));
  Diagnostics& diag = report.model.diagnostics;

  const long steps = chain_steps_per_iteration(cfg, n, d);
  const int burn = cfg.chain_steps > 0 ? cfg.chain_steps : default_chain_steps(n, d);
  AffineMap map = AffineMap::identity(d);
  Eigen::VectorXd x;
  if (d == 1) {
    x = hit_and_run(rng, ps, TentParams(y), map, ps.barycenter(), 1);
  } else {
    RoundingOptions ropts;
    ropts.burn_in = burn;
    ropts.samples_per_round = 200;
    const RoundingResult r = round_to_isotropic(rng, ps, TentParams(y), cfg.round_target_C, ropts);
    map = r.map;
    x = r.last_point;
  }

  std::deque<Eigen::VectorXd> window;
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(n);
  long averaged = 0;
  const int suffix_start =
      cfg.iterate == IterateMode::SuffixAverage
          ? std::max(1, static_cast<int>(std::floor(cfg.iterations * (1.0 - cfg.suffix_fraction))) + 1)
          : cfg.iterations + 1;
  Eigen::VectorXd grad_mean = Eigen::VectorXd::Zero(n);
  const int surrogate_every = std::max(1, cfg.iterations / 100);
  diag.max_height_norm = y.norm();

  for (int i = 1; i <= cfg.iterations; ++i) {
    const TentParams tp(y);
    if (d > 1 && i > 1 && (i - 1) % cfg.rounding_cadence == 0) {
      if (auto refreshed = map_from_window(window, d)) map = std::move(*refreshed);
    }
    x = hit_and_run(rng, ps, tp, map, x, static_cast<int>(steps));
    if (d > 1) {
      window.push_back(x);
      if (static_cast<int>(window.size()) > cfg.rounding_window) window.pop_front();
    }

    const PolyStat stat = poly_stat(ps, tp, x);
    Eigen::VectorXd g = uniform;
    for (const auto& [idx, w] : stat.entries) g[idx] -= w;
    const double eta = cfg.step_constant / std::sqrt(static_cast<double>(i));
    y += eta * g;
    if (cfg.radius_clip) {
      const double norm = y.norm();
      if (norm > *cfg.radius_clip) y *= *cfg.radius_clip / norm;
    }
    diag.max_height_norm = std::max(diag.max_height_norm, y.norm());
    if (i >= suffix_start) {
      avg += y;
      ++averaged;
    }
    grad_mean += (g - grad_mean) / std::min(i, 1000);
    if (i % surrogate_every == 0) diag.surrogate_trace.push_back(grad_mean.lpNorm<Eigen::Infinity>());
    report.trace.push_back(TraceRow{i, eta, g.norm(), y.sum()});
  }

  if (averaged > 0) y = avg / static_cast<double>(averaged);
  report.model.heights = TentParams(y);
  diag.iterations_run = cfg.iterations;
  diag.final_height_norm = y.norm();
  if (cfg.estimate_partition) {
    attach_partition(rng, report.model, cfg);
    report.objective_estimate = log_likelihood(report.model, ps);
  }
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

double sgd_gap_bound(double diameter, double step_constant, double grad_bound, double iterations) {
  return (diameter * diameter / step_constant + step_constant * grad_bound * grad_bound) *
         (2.0 + std::log(iterations)) / std::sqrt(iterations);
}

FitReport fit_with_restarts(Rng& rng, const PointSet& ps, const FitConfig& cfg, double target_gap) {
  if (!(target_gap > 0.0)) throw Error(ErrorKind::InvalidArgument, "target gap must be positive");
  const auto started = std::chrono::steady_clock::now();
  FitConfig attempt = cfg;
  int invocations = 0;
  for (int doubling = 0;; ++doubling) {
    Rng child = split(rng);
    FitReport report = sgd_fit(child, ps, attempt);
    ++invocations;
    const double diameter =
        cfg.radius_clip ? 2.0 * *cfg.radius_clip : 2.0 * report.model.diagnostics.max_height_norm;
    report.certified_gap = sgd_gap_bound(diameter, cfg.step_constant, 1.0, attempt.iterations);
    report.invocations = invocations;
    report.final_iterations = attempt.iterations;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.wall_time = elapsed;
    if (report.certified_gap <= target_gap) return report;
    const bool out_of_time = cfg.wall_clock_cap > 0.0 && elapsed >= cfg.wall_clock_cap;
    if (doubling >= cfg.max_doublings || out_of_time || attempt.iterations > (1 << 29)) {
      report.budget_exhausted = true;
      return report;
    }
    attempt.iterations *= 2;
  }
}

double log_likelihood(const Model& model, const PointSet& data) {
  if (data.dim() != model.point_set.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "data dimension does not match the model");
  }
  double total = 0.0;
  for (int i = 0; i < data.count(); ++i) {
    const double h = tent_eval(model.point_set, model.heights, data.point(i));
    if (std::isinf(h)) return h;
    total += h - model.log_partition;
  }
  return total;
}

Model normalize(const Model& model) {
  Model out = model;
  out.heights = TentParams(model.heights.heights().array() - model.log_partition);
  out.log_partition = 0.0;
  out.normalized = true;
  return out;
}

namespace {

// Minimum-norm point of the convex hull of the columns of P (Wolfe's method).
Eigen::VectorXd min_norm_point(const Eigen::MatrixXd& P) {
  const Eigen::Index k = P.cols();
  const double scale = P.colwise().squaredNorm().maxCoeff();
  const double tol = 1e-14 * std::max(scale, 1e-300);
  std::vector<Eigen::Index> S;
  std::vector<double> lambda;
  Eigen::Index first = 0;
  P.colwise().squaredNorm().minCoeff(&first);
  S.push_back(first);
  lambda.push_back(1.0);
  Eigen::VectorXd x = P.col(first);
  for (int major = 0; major < 10 * k + 10; ++major) {
    Eigen::Index j = 0;
    (x.transpose() * P).minCoeff(&j);
    if (x.squaredNorm() - x.dot(P.col(j)) <= tol ||
        std::find(S.begin(), S.end(), j) != S.end()) {
      break;
    }
    S.push_back(j);
    lambda.push_back(0.0);
    for (int minor = 0; minor < 10 * k + 10; ++minor) {
      const Eigen::Index m = static_cast<Eigen::Index>(S.size());
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) kkt(a, b) = P.col(S[a]).dot(P.col(S[b]));
        kkt(a, m) = 1.0;
        kkt(m, a) = 1.0;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
      rhs[m] = 1.0;
      const Eigen::VectorXd mu = kkt.completeOrthogonalDecomposition().solve(rhs).head(m);
      if (mu.minCoeff() > 1e-12) {
        for (Eigen::Index a = 0; a < m; ++a) lambda[a] = mu[a];
        break;
      }
      double theta = 1.0;
      for (Eigen::Index a = 0; a < m; ++a) {
        if (mu[a] <= 1e-12 && lambda[a] - mu[a] > 0.0) theta = std::min(theta, lambda[a] / (lambda[a] - mu[a]));
      }
      std::vector<Eigen::Index> keep_s;
      std::vector<double> keep_l;
      for (Eigen::Index a = 0; a < m; ++a) {
        const double l = lambda[a] + theta * (mu[a] - lambda[a]);
        if (l > 1e-12) {
          keep_s.push_back(S[a]);
          keep_l.push_back(l);
        }
      }
      S = std::move(keep_s);
      lambda = std::move(keep_l);
      double total = 0.0;
      for (double l : lambda) total += l;
      for (double& l : lambda) l /= total;
    }
    x = Eigen::VectorXd::Zero(P.rows());
    for (std::size_t a = 0; a < S.size(); ++a) x += lambda[a] * P.col(S[a]);
  }
  return x;
}

}  // namespace

Model oracle_fit(const PointSet& ps, const OracleOptions& opts) {
  if (ps.dim() > 2 || ps.count() > 8) {
    throw Error(ErrorKind::UnsupportedDimension, "oracle fit supports d <= 2 and n <= 8, got d = " +
                                                     std::to_string(ps.dim()) + ", n = " +
                                                     std::to_string(ps.count()));
  }
  if (!ps.full_dimensional()) {
    throw Error(ErrorKind::DegenerateGeometry, "sample points do not span a full-dimensional hull");
  }
  const int n = ps.count();
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);

  auto objective = [&](const Eigen::VectorXd& at, double* log_partition) {
    const double a = log_partition_quadrature(ps, TentParams(at));
    if (log_partition) *log_partition = a;
    return uniform.dot(at) - a;
  };
  auto gradient = [&](const Eigen::VectorXd& at) {
    return Eigen::VectorXd(uniform - expected_stat_quadrature(ps, TentParams(at)));
  };

  // Fixed stream: the oracle is deterministic.
  Rng rng = make_stream(0, "oracle-fit");
  std::normal_distribution<double> normal;
  const int bundle = 2 * n;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  double log_partition = 0.0;
  double f = objective(y, &log_partition);
  double radius = opts.initial_radius;
  Diagnostics diag;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    Eigen::MatrixXd G(n, bundle + 1);
    G.col(0) = gradient(y);
    for (int j = 1; j <= bundle; ++j) {
      Eigen::VectorXd u(n);
      for (int i = 0; i < n; ++i) u[i] = normal(rng);
      const double r = radius * std::pow(uniform01(rng), 1.0 / n);
      G.col(j) = gradient(y + r * u / u.norm());
    }
    const Eigen::VectorXd dir = min_norm_point(G);
    const double measure = dir.lpNorm<Eigen::Infinity>();
    diag.surrogate_trace.push_back(measure);
    if (measure <= std::max(opts.tolerance, radius)) {
      if (radius <= opts.final_radius && measure <= opts.tolerance) break;
      radius = std::max(0.1 * radius, opts.final_radius);
      continue;
    }
    // Armijo backtracking along the min-norm ascent direction.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd y_next;
    double f_next = 0.0;
    double a_next = 0.0;
    for (int bt = 0; bt < 40; ++bt) {
      y_next = y + step * dir;
      f_next = objective(y_next, &a_next);
      if (f_next >= f + 1e-6 * step * dir.squaredNorm()) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (radius <= opts.final_radius) break;
      radius = std::max(0.1 * radius, opts.final_radius);
      continue;
    }
    y = y_next;
    f = f_next;
    log_partition = a_next;
  }
  diag.iterations_run = iter;

  Model model{ps, TentParams(y), log_partition, 1e-9, false, diag};
  Model out = normalize(model);
  out.diagnostics.final_height_norm = out.heights.heights().norm();
  out.diagnostics.max_height_norm = out.diagnostics.final_height_norm;
  return out;
}

}  // namespace lcmle
