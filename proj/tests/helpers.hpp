#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lcmle/lp.hpp"
#include "lcmle/rng.hpp"
#include "lcmle/tent.hpp"

namespace testing {

inline lcmle::PointSet points(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> r;
  for (const auto& row : rows) r.emplace_back(row);
  return lcmle::PointSet::from_rows(r);
}

inline lcmle::TentParams heights(std::initializer_list<double> y) {
  return lcmle::TentParams(Eigen::Map<const Eigen::VectorXd>(y.begin(), static_cast<Eigen::Index>(y.size())));
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

// Best objective over every basic feasible solution; nullopt-like -inf when
// the program is infeasible. Bounded programs only.
inline double enumerate_bases(const lcmle::LinearProgram& lp, Eigen::VectorXd* best_x = nullptr) {
  const int m = static_cast<int>(lp.constraints.rows());
  const int k = static_cast<int>(lp.constraints.cols());
  double best = -std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    std::vector<int> cols;
    for (int c = 0; c < k; ++c) {
      if (mask & (1u << c)) cols.push_back(c);
    }
    if (static_cast<int>(cols.size()) > m) continue;
    Eigen::MatrixXd B(m, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) B.col(c) = lp.constraints.col(cols[c]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
    if (qr.rank() < static_cast<int>(cols.size())) continue;
    const Eigen::VectorXd xb = qr.solve(lp.rhs);
    if ((B * xb - lp.rhs).lpNorm<Eigen::Infinity>() > 1e-9 * (1 + lp.rhs.lpNorm<Eigen::Infinity>())) continue;
    if (xb.minCoeff() < -1e-12) continue;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    for (std::size_t c = 0; c < cols.size(); ++c) x[cols[c]] = xb[c];
    const double v = lp.objective.dot(x);
    if (v > best) {
      best = v;
      if (best_x) *best_x = x;
    }
  }
  return best;
}

inline Eigen::MatrixXd random_points(lcmle::Rng& rng, int d, int n) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(d, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) X(k, i) = normal(rng);
  }
  return X;
}

inline Eigen::VectorXd random_heights(lcmle::Rng& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = scale * normal(rng);
  return y;
}

// Uniform point of the hull as a random convex combination of the poles.
inline Eigen::VectorXd random_hull_point(lcmle::Rng& rng, const lcmle::PointSet& ps) {
  std::exponential_distribution<double> e;
  Eigen::VectorXd w(ps.count());
  for (int i = 0; i < ps.count(); ++i) w[i] = e(rng);
  return ps.points() * (w / w.sum());
}

// Two-sample-free KS statistic of draws against a CDF.
inline double ks_statistic(std::vector<double> draws, const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    worst = std::max({worst, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return worst;
}

// Composite Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace testing
