#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lcmle/lp.hpp"

namespace lcmle {

// Sample points X_1..X_n in R^d, stored as the columns of a d x n matrix.
class PointSet {
 public:
  explicit PointSet(Eigen::MatrixXd points);

  // One row per point (the CSV layout).
  static PointSet from_rows(const std::vector<std::vector<double>>& rows);

  int dim() const { return static_cast<int>(points_.rows()); }
  int count() const { return static_cast<int>(points_.cols()); }
  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::VectorXd point(int i) const { return points_.col(i); }

  // Affine hull of the points is all of R^d.
  bool full_dimensional() const { return full_dimensional_; }

  Eigen::VectorXd barycenter() const { return points_.rowwise().mean(); }
  Eigen::VectorXd lower_corner() const { return points_.rowwise().minCoeff(); }
  Eigen::VectorXd upper_corner() const { return points_.rowwise().maxCoeff(); }

 private:
  Eigen::MatrixXd points_;
  bool full_dimensional_ = false;
};

// Heights y_i of the tent poles (X_i, y_i).
class TentParams {
 public:
  TentParams() = default;
  explicit TentParams(Eigen::VectorXd heights);

  const Eigen::VectorXd& heights() const { return heights_; }
  int size() const { return static_cast<int>(heights_.size()); }
  double max_height() const { return heights_.maxCoeff(); }

 private:
  Eigen::VectorXd heights_;
};

// Polyhedral sufficient statistic T_y(x): convex weights over the corners of
// the cell containing x. Stored sparsely.
struct PolyStat {
  int count = 0;
  std::vector<std::pair<int, double>> entries;

  Eigen::VectorXd dense() const;
  double dot(const Eigen::VectorXd& v) const;
  std::vector<int> support() const;
};

// max y·a  s.t.  X a = x, 1·a = 1, a >= 0.
LinearProgram density_program(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& x);

bool in_hull(const PointSet& ps, const Eigen::VectorXd& x);

// h_{X,y}(x); -infinity outside the convex hull.
double tent_eval(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& x);

// exp(h_{X,y}(x)), zero outside the hull.
double density_unscaled(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& x);

// Throws OutsideHull when x is not in the hull.
PolyStat poly_stat(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& x);

// Convex weights of x over the listed poles only (the linear piece spanned by
// `support`). Throws OutsideHull if x is not in their hull.
PolyStat barycentric_over(const PointSet& ps, const TentParams& tp, const std::vector<int>& support,
                          const Eigen::VectorXd& x);

}  // namespace lcmle
