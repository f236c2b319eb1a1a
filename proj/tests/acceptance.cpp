// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "lcmle/line.hpp"
#include "lcmle/mle.hpp"
#include "lcmle/partition.hpp"
#include "lcmle/sampler.hpp"

using namespace lcmle;
using testing::heights;
using testing::points;
using testing::vec;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail, double seconds) {
  std::printf("[%s] %d. %s: %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Projected-gradient solve of min |G w - target|_2 over the simplex; the
// columns are gradients of A at tiny perturbations of y.
double hull_distance(const Eigen::MatrixXd& G, const Eigen::VectorXd& target) {
  const int k = static_cast<int>(G.cols());
  Eigen::VectorXd w = Eigen::VectorXd::Constant(k, 1.0 / k);
  const double L = (G.transpose() * G).eval().operatorNorm() + 1e-12;
  auto project = [k](Eigen::VectorXd v) {
    std::vector<double> s(v.data(), v.data() + k);
    std::sort(s.rbegin(), s.rend());
    double acc = 0.0, tau = 0.0;
    for (int i = 0; i < k; ++i) {
      acc += s[i];
      const double t = (acc - 1.0) / (i + 1);
      if (s[i] - t > 0) tau = t;
    }
    return Eigen::VectorXd((v.array() - tau).max(0.0));
  };
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd next = project(w - G.transpose() * (G * w - target) / L);
    if ((next - w).lpNorm<Eigen::Infinity>() < 1e-15) break;
    w = next;
  }
  return (G * w - target).lpNorm<Eigen::Infinity>();
}

void criterion_subgradient() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_stream(1, "acceptance-1");
  double worst = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    const int n = 2 + inst % 4;
    const PointSet ps(testing::random_points(rng, 1, n));
    const Eigen::VectorXd y = testing::random_heights(rng, n);
    const Eigen::VectorXd ET = expected_stat_quadrature(ps, TentParams(y));
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd up = y, down = y;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double fd =
          (log_partition_quadrature(ps, TentParams(up)) - log_partition_quadrature(ps, TentParams(down))) / 2e-6;
      worst = std::max(worst, std::abs(fd - ET[i]));
    }
  }
  report(1, "subgradient identity, 5 d=1 instances", worst <= 1e-4, fmt("max |dA/dy - E[T]| = %.2e", worst),
         since(t0));
}

void criterion_convexity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_stream(2, "acceptance-2");
  double worst = -INFINITY;
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 2;
    const int n = d + 1 + t % 4;
    const PointSet ps(testing::random_points(rng, d, n));
    const Eigen::VectorXd y1 = testing::random_heights(rng, n);
    const Eigen::VectorXd y2 = testing::random_heights(rng, n);
    const double mid = log_partition_quadrature(ps, TentParams(0.5 * (y1 + y2)));
    const double chord =
        0.5 * (log_partition_quadrature(ps, TentParams(y1)) + log_partition_quadrature(ps, TentParams(y2)));
    worst = std::max(worst, mid - chord);
  }
  report(2, "convexity of A, 100 midpoint tests", worst <= 1e-6, fmt("max A(mid) - chord = %.2e", worst), since(t0));
}

void criterion_fixed_point() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  Rng rng = make_stream(3, "acceptance-3");
  std::normal_distribution<double> normal;
  for (const PointSet& ps : {points({{0}, {1}}), points({{0}, {0.5}, {1}})}) {
    const Model m = oracle_fit(ps);
    const int n = ps.count();
    const Eigen::VectorXd target = Eigen::VectorXd::Constant(n, 1.0 / n);
    const Eigen::VectorXd ET = expected_stat_quadrature(ps, m.heights);
    const double literal = (ET - target).lpNorm<Eigen::Infinity>();
    // Limiting gradients at y: E[T] at y and at perturbations of size 1e-7.
    Eigen::MatrixXd G(n, 4 * n + 1);
    G.col(0) = ET;
    for (int j = 1; j < G.cols(); ++j) {
      Eigen::VectorXd u(n);
      for (int i = 0; i < n; ++i) u[i] = normal(rng);
      G.col(j) = expected_stat_quadrature(ps, TentParams(m.heights.heights() + 1e-7 * u / u.norm()));
    }
    const double dist = hull_distance(G, target);
    pass = pass && dist <= 1e-4;
    detail += "n=" + std::to_string(n) + fmt(": dist((1/n)1, E[T] hull) = %.1e", dist) +
              fmt(", single selection %.1e; ", literal);
    if (n == 2) {
      const double h = m.heights.heights().lpNorm<Eigen::Infinity>();
      pass = pass && h <= 1e-3;
      detail += fmt("two-point |y|_inf = %.1e; ", h);
    }
  }
  report(3, "MLE fixed point via oracle_fit", pass, detail, since(t0));
}

// Structural data collected from the criterion-4 runs.
double max_grad_norm = 0.0;
double max_sum_drift = 0.0;

double mean_loglik(const Model& m) { return log_likelihood(m, m.point_set) / m.point_set.count(); }

void criterion_sgd_vs_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Fixture {
    PointSet ps;
    double tol;
  };
  const std::vector<Fixture> fixtures = {
      {points({{0}, {1}}), 0.05},
      {points({{0}, {0.5}, {1}}), 0.05},
      {points({{0}, {1}, {3}}), 0.05},
      {points({{0}, {0.2}, {0.7}, {1}}), 0.05},
      {points({{0}, {0.1}, {0.3}, {2}}), 0.05},
      {points({{0, 0}, {1, 0}, {0, 1}, {0.25, 0.25}}), 0.1},
  };
  bool pass = true;
  std::string detail;
  for (const auto& f : fixtures) {
    const double oracle = mean_loglik(oracle_fit(f.ps));
    double avg = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      Rng rng = make_stream(seed, "fit");
      FitConfig cfg;
      cfg.iterations = 20000;
      cfg.seed = seed;
      const FitReport r = sgd_fit(rng, f.ps, cfg);
      avg += mean_loglik(normalize(r.model)) / 3.0;
      for (const auto& row : r.trace) {
        max_grad_norm = std::max(max_grad_norm, row.grad_norm);
        max_sum_drift = std::max(max_sum_drift, std::abs(row.height_sum - 1.0));
      }
    }
    const double gap = oracle - avg;
    pass = pass && std::abs(gap) <= f.tol;
    detail += fmt("%.4f ", gap);
  }
  report(4, "SGD vs oracle log-likelihood (3 seeds, 2e4 iterations)", pass, "per-fixture gaps " + detail, since(t0));
}

// CDF along a chord by cumulative Simpson integration of exp(tent_eval).
std::function<double(double)> quadrature_cdf(const PointSet& ps, const TentParams& tp, const Chord& c) {
  const int cells = 4000;
  const double h = c.length() / cells;
  std::vector<double> f(cells + 1), cum(cells + 1, 0.0);
  for (int i = 0; i <= cells; ++i) f[i] = std::exp(tent_eval(ps, tp, c.at(c.t_lo + i * h)));
  for (int i = 0; i < cells; ++i) {
    const double mid = std::exp(tent_eval(ps, tp, c.at(c.t_lo + (i + 0.5) * h)));
    cum[i + 1] = cum[i] + h * (f[i] + 4 * mid + f[i + 1]) / 6;
  }
  const double total = cum.back();
  const double lo = c.t_lo;
  return [cum, f, h, lo, total, cells](double t) {
    const double s = std::clamp((t - lo) / h, 0.0, static_cast<double>(cells));
    const int i = std::min(cells - 1, static_cast<int>(s));
    const double frac = s - i;
    // Trapezoid inside the cell is enough at this resolution.
    const double partial = h * frac * (f[i] + 0.5 * frac * (f[i + 1] - f[i]));
    return (cum[i] + partial) / total;
  };
}

void criterion_line_sampler() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_stream(5, "acceptance-5");
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const int d = 1 + k % 3;
    const int n = d + 2 + k % 4;
    const PointSet ps(testing::random_points(rng, d, n));
    const TentParams tp(testing::random_heights(rng, n, 1.5));
    const Chord c = make_chord(ps, testing::random_hull_point(rng, ps), random_direction(rng, d));
    std::vector<double> draws(10000);
    for (double& t : draws) t = (sample_line(rng, ps, tp, c) - c.origin).dot(c.direction);
    worst = std::max(worst, testing::ks_statistic(draws, quadrature_cdf(ps, tp, c)));
  }
  report(5, "line sampler KS, 10 chords, d<=3", worst < 0.02, fmt("max KS = %.4f", worst), since(t0));
}

void criterion_hit_and_run() {
  const auto t0 = std::chrono::steady_clock::now();
  const PointSet sq = points({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  const TentParams flat = heights({0, 0, 0, 0});
  Rng rng = make_stream(6, "acceptance-6");
  const RoundingResult r = round_to_isotropic(rng, sq, flat, FitConfig{}.round_target_C);
  const int steps = default_chain_steps(sq.count(), sq.dim());
  const int chains = 4000;
  Eigen::MatrixXd samples(2, chains);
  for (int c = 0; c < chains; ++c) {
    Rng chain = split(rng);
    samples.col(c) = hit_and_run(chain, sq, flat, r.map, sq.barycenter(), steps);
  }
  const Moments m = estimate_covariance(samples);
  const double mean_err = (m.mean - vec({0.5, 0.5})).lpNorm<Eigen::Infinity>();
  const double cov_err = (m.cov - Eigen::Matrix2d::Identity() / 12.0).cwiseAbs().maxCoeff() * 12.0;
  report(6, "hit-and-run moments on the flat square", mean_err <= 0.02 && cov_err <= 0.15,
         fmt("mean error %.4f", mean_err) + fmt(", covariance error %.1f%% of 1/12", 100 * cov_err), since(t0));
}

void criterion_slicing() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Fixture {
    PointSet ps;
    TentParams tp;
  };
  const std::vector<Fixture> fixtures = {
      {points({{0}, {1}}), heights({0, 0})},
      {points({{0}, {2}}), heights({0, 0})},
      {points({{0}, {1}}), heights({0, -1})},
      {points({{0, 0}, {2, 0}, {0, 2}}), heights({0, -2, -2})},
      {points({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.4, 0.6}}), heights({-0.5, 0.2, -1, -0.3, 0.8})},
  };
  Rng rng = make_stream(7, "acceptance-7");
  bool pass = true;
  std::string detail;
  for (const auto& f : fixtures) {
    const SliceEstimate est = log_partition_sliced(rng, f.ps, f.tp, 0.1);
    const double quad = log_partition_quadrature(f.ps, f.tp);
    const double err = std::abs(est.log_partition - quad);
    pass = pass && err <= 0.1 + 3 * est.mc_error;
    detail += fmt("%.3f", err) + fmt("/%.3f ", 0.1 + 3 * est.mc_error);
  }
  report(7, "sliced vs quadrature log-partition, eps=0.1", pass, "|diff|/allowed " + detail, since(t0));
}

void criterion_structure() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_stream(8, "acceptance-8");
  int bad_stats = 0;
  int queries = 0;
  while (queries < 10000) {
    const int d = 1 + queries % 3;
    const int n = d + 1 + (queries / 3) % 8;
    const PointSet ps(testing::random_points(rng, d, n));
    if (!ps.full_dimensional()) continue;
    const TentParams tp(testing::random_heights(rng, n));
    for (int q = 0; q < 100; ++q, ++queries) {
      const Eigen::VectorXd x = testing::random_hull_point(rng, ps);
      const PolyStat T = poly_stat(ps, tp, x);
      const Eigen::VectorXd w = T.dense();
      const bool ok = std::abs(w.sum() - 1) <= 1e-8 && w.minCoeff() >= 0 &&
                      static_cast<int>(T.entries.size()) <= d + 1 &&
                      (ps.points() * w - x).norm() <= 1e-8 * (1 + x.norm()) &&
                      std::abs(T.dot(tp.heights()) - tent_eval(ps, tp, x)) <= 1e-8 * (1 + std::abs(T.dot(tp.heights())));
      if (!ok) ++bad_stats;
    }
  }
  const bool pass = max_grad_norm < 1.0 && max_sum_drift <= 1e-8 && bad_stats == 0;
  report(8, "structural invariants", pass,
         fmt("max |g_t| = %.4f", max_grad_norm) + fmt(", max |1'y - 1| = %.1e", max_sum_drift) + ", " +
             std::to_string(bad_stats) + " bad statistics in " + std::to_string(queries) + " queries",
         since(t0));
}

void criterion_separation() {
  const auto t0 = std::chrono::steady_clock::now();
  const PointSet tri = points({{0, 0}, {2, 0}, {0, 2}});
  const TentParams tp = heights({0, -2, -2});
  const double delta = std::exp(-1.0);
  const double level = tp.max_height() + std::log(delta);
  Rng rng = make_stream(9, "acceptance-9");
  std::uniform_real_distribution<double> box(0.0, 2.0);
  std::vector<Eigen::VectorXd> members;
  while (members.size() < 1000) {
    const Eigen::VectorXd v = vec({box(rng), box(rng)});
    if (tent_eval(tri, tp, v) >= level) members.push_back(v);
  }
  std::uniform_real_distribution<double> wide(-0.5, 2.5);
  int hyperplanes = 0;
  int violations = 0;
  for (int q = 0; q < 300; ++q) {
    const Eigen::VectorXd z = vec({wide(rng), wide(rng)});
    if (tent_eval(tri, tp, z) >= level) continue;
    const Separation s = level_set_separation(tri, tp, z, delta);
    if (s.inside) {
      ++violations;
      continue;
    }
    ++hyperplanes;
    if (!(s.normal.dot(z) > s.offset)) ++violations;
    for (const auto& v : members) {
      if (s.normal.dot(v) > s.offset) ++violations;
    }
  }
  report(9, "separation oracle soundness on the shrunk triangle", violations == 0 && hyperplanes > 0,
         std::to_string(hyperplanes) + " hyperplanes x 1000 level-set points, " + std::to_string(violations) +
             " violations",
         since(t0));
}

}  // namespace

int main() {
  criterion_subgradient();
  criterion_convexity();
  criterion_fixed_point();
  criterion_sgd_vs_oracle();
  criterion_line_sampler();
  criterion_hit_and_run();
  criterion_slicing();
  criterion_structure();
  criterion_separation();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
