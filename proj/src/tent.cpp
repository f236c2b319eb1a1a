#include "lcmle/tent.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "lcmle/error.hpp"

namespace lcmle {

namespace {

constexpr double kSupportThreshold = 1e-12;

void check_point(const PointSet& ps, const Eigen::VectorXd& x) {
  if (x.size() != ps.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "query has dimension " + std::to_string(x.size()) +
                                                  ", point set has dimension " +
                                                  std::to_string(ps.dim()));
  }
}

void check_params(const PointSet& ps, const TentParams& tp) {
  if (tp.size() != ps.count()) {
    throw Error(ErrorKind::DimensionMismatch, std::to_string(tp.size()) + " heights for " +
                                                  std::to_string(ps.count()) + " tent poles");
  }
}

PolyStat stat_from_solution(const Eigen::VectorXd& alpha) {
  PolyStat s;
  s.count = static_cast<int>(alpha.size());
  for (int i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > kSupportThreshold) s.entries.emplace_back(i, alpha[i]);
  }
  return s;
}

}  // namespace

PointSet::PointSet(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "point set needs at least one point of dimension >= 1");
  }
  if (!points_.allFinite()) throw Error(ErrorKind::InvalidArgument, "point coordinates must be finite");
  if (points_.cols() >= points_.rows() + 1) {
    Eigen::MatrixXd lifted(points_.rows() + 1, points_.cols());
    lifted.topRows(points_.rows()) = points_.colwise() - barycenter();
    lifted.bottomRows(1).setOnes();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lifted);
    qr.setThreshold(1e-10);
    full_dimensional_ = qr.rank() == points_.rows() + 1;
  }
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorKind::InvalidArgument, "no points given");
  }
  const auto d = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw Error(ErrorKind::DimensionMismatch, "point " + std::to_string(i) + " has " +
                                                    std::to_string(rows[i].size()) +
                                                    " coordinates, expected " + std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rows[i][j];
  }
  return PointSet(std::move(m));
}

TentParams::TentParams(Eigen::VectorXd heights) : heights_(std::move(heights)) {
  if (heights_.size() < 1) throw Error(ErrorKind::InvalidArgument, "no heights given");
  if (!heights_.allFinite()) throw Error(ErrorKind::InvalidArgument, "heights must be finite");
}

Eigen::VectorXd PolyStat::dense() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(count);
  for (const auto& [i, w] : entries) v[i] = w;
  return v;
}

double PolyStat::dot(const Eigen::VectorXd& v) const {
  double s = 0.0;
  for (const auto& [i, w] : entries) s += w * v[i];
  return s;
}

std::vector<int> PolyStat::support() const {
  std::vector<int> idx;
  idx.reserve(entries.size());
  for (const auto& e : entries) idx.push_back(e.first);
  return idx;
}

LinearProgram density_program(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& x) {
  check_point(ps, x);
  check_params(ps, tp);
  const int d = ps.dim();
  const int n = ps.count();
  LinearProgram lp;
  lp.objective = tp.heights();
  lp.constraints.resize(d + 1, n);
  lp.constraints.topRows(d) = ps.points();
  lp.constraints.row(d).setOnes();
  lp.rhs.resize(d + 1);
  lp.rhs.head(d) = x;
  lp.rhs[d] = 1.0;
  return lp;
}

bool in_hull(const PointSet& ps, const Eigen::VectorXd& x) {
  check_point(ps, x);
  const TentParams flat(Eigen::VectorXd::Zero(ps.count()));
  return solve(density_program(ps, flat, x)).optimal();
}

double tent_eval(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& x) {
  const LpOutcome out = solve(density_program(ps, tp, x));
  if (!out.optimal()) return -std::numeric_limits<double>::infinity();
  return out.value;
}

double density_unscaled(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& x) {
  const double h = tent_eval(ps, tp, x);
  return std::isinf(h) ? 0.0 : std::exp(h);
}

PolyStat poly_stat(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& x) {
  const LinearProgram lp = density_program(ps, tp, x);
  LpOutcome out = solve(lp);
  if (!out.optimal()) throw Error(ErrorKind::OutsideHull, "query point is outside the convex hull");

  const int limit = ps.dim() + 1;
  const double target = out.value;
  std::vector<int> forbidden;
  PolyStat stat = stat_from_solution(out.solution);
  // A basic solution already has at most d+1 nonzeros; this loop only runs
  // when the solver hands back a non-vertex optimum.
  while (static_cast<int>(stat.entries.size()) > limit) {
    bool reduced = false;
    for (const auto& [idx, w] : stat.entries) {
      std::vector<int> trial = forbidden;
      trial.push_back(idx);
      LpOutcome next = fixed_basis_resolve(lp, trial);
      if (next.optimal() && next.value >= target - 1e-9 * (1.0 + std::abs(target))) {
        forbidden = std::move(trial);
        stat = stat_from_solution(next.solution);
        reduced = true;
        break;
      }
    }
    if (!reduced) {
      throw Error(ErrorKind::NumericalFailure, "could not sparsify the polyhedral statistic");
    }
  }
  return stat;
}

PolyStat barycentric_over(const PointSet& ps, const TentParams& tp, const std::vector<int>& support,
                          const Eigen::VectorXd& x) {
  const LinearProgram lp = density_program(ps, tp, x);
  std::vector<char> keep(ps.count(), 0);
  for (int i : support) keep.at(i) = 1;
  std::vector<int> forbidden;
  for (int i = 0; i < ps.count(); ++i) {
    if (!keep[i]) forbidden.push_back(i);
  }
  const LpOutcome out = fixed_basis_resolve(lp, forbidden);
  if (!out.optimal()) throw Error(ErrorKind::OutsideHull, "point is outside the hull of the support");
  return stat_from_solution(out.solution);
}

}  // namespace lcmle
