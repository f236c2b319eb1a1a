#pragma once

#include <limits>

#include <Eigen/Core>

#include "lcmle/line.hpp"
#include "lcmle/rng.hpp"
#include "lcmle/tent.hpp"

namespace lcmle {

// x = matrix * z + offset. Hit-and-run directions are drawn uniformly in z
// and mapped through `matrix`.
struct AffineMap {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
  double log_abs_det = 0.0;

  static AffineMap identity(int dim);
  static AffineMap from(Eigen::MatrixXd matrix, Eigen::VectorXd offset);

  int dim() const { return static_cast<int>(matrix.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const { return matrix * z + offset; }
  Eigen::VectorXd inverse_apply(const Eigen::VectorXd& x) const;
};

// Throws StuckChain after this many consecutive degenerate chords.
inline constexpr int kMaxDegenerateRedraws = 100;

int default_chain_steps(int count, int dim);

Eigen::VectorXd hit_and_run(Rng& rng, const PointSet& ps, const TentParams& tp, const AffineMap& map,
                            const Eigen::VectorXd& x_start, int steps);

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased
};

// Samples are the columns. Throws RankDeficient on a singular covariance.
Moments estimate_covariance(const Eigen::MatrixXd& samples);

struct RoundingOptions {
  int samples_per_round = 400;
  int thin = 0;         // chain steps between samples; 0 -> 2 * dim
  int burn_in = 0;      // 0 -> default_chain_steps
  int max_rounds = 8;
};

struct RoundingResult {
  AffineMap map;
  double eigen_ratio = 1.0;  // covariance condition number in the mapped space
  bool converged = false;
  int rounds = 0;
  Eigen::VectorXd last_point;  // chain state, for warm starts
};

// Composes the map with inverse square roots of the mapped covariance until
// its eigenvalue ratio is at most target_C^2. `start` and `initial` default
// to the barycenter and the identity.
RoundingResult round_to_isotropic(Rng& rng, const PointSet& ps, const TentParams& tp, double target_C,
                                  const RoundingOptions& opts = {},
                                  const Eigen::VectorXd* start = nullptr,
                                  const AffineMap* initial = nullptr);

// Either Z is in the level set {x : p(x) >= exp(y_max) delta}, or
// normal·Z > offset while normal·v <= offset for every v in the level set.
struct Separation {
  bool inside = true;
  Eigen::VectorXd normal;
  double offset = 0.0;
};

Separation level_set_separation(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& z,
                                double delta);

}  // namespace lcmle
