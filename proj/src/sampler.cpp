#include "lcmle/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "lcmle/error.hpp"

namespace lcmle {

AffineMap AffineMap::identity(int dim) {
  return AffineMap{Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim), 0.0};
}

AffineMap AffineMap::from(Eigen::MatrixXd matrix, Eigen::VectorXd offset) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix);
  const double det = lu.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw Error(ErrorKind::RankDeficient, "affine map is singular");
  }
  return AffineMap{std::move(matrix), std::move(offset), std::log(std::abs(det))};
}

Eigen::VectorXd AffineMap::inverse_apply(const Eigen::VectorXd& x) const {
  return matrix.partialPivLu().solve(x - offset);
}

int default_chain_steps(int count, int dim) { return std::max(500, 50 * count * dim); }

Eigen::VectorXd hit_and_run(Rng& rng, const PointSet& ps, const TentParams& tp, const AffineMap& map,
                            const Eigen::VectorXd& x_start, int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "hit-and-run needs at least one step");
  if (x_start.size() != ps.dim() || map.dim() != ps.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "hit-and-run start/map dimension mismatch");
  }
  Eigen::VectorXd x = x_start;
  for (int step = 0; step < steps; ++step) {
    int degenerate = 0;
    for (;;) {
      const Eigen::VectorXd theta = map.matrix * random_direction(rng, ps.dim());
      try {
        const Chord chord = make_chord(ps, x, theta);
        const LineTent lt = restrict_to_line(ps, tp, chord);
        // Keep the chain off the hull boundary.
        const double margin = 1e-9 * chord.length();
        const double t = std::clamp(sample_line_parameter(rng, lt), chord.t_lo + margin,
                                    chord.t_hi - margin);
        x = chord.at(t);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateChord) throw;
        if (++degenerate >= kMaxDegenerateRedraws) {
          throw Error(ErrorKind::StuckChain,
                      std::to_string(kMaxDegenerateRedraws) + " consecutive degenerate chords");
        }
      }
    }
  }
  return x;
}

Moments estimate_covariance(const Eigen::MatrixXd& samples) {
  const auto d = samples.rows();
  const auto count = samples.cols();
  if (count < d + 1) {
    throw Error(ErrorKind::RankDeficient, "need at least d+1 samples for a covariance estimate");
  }
  Moments m;
  m.mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - m.mean;
  m.cov = centered * centered.transpose() / static_cast<double>(count - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.cov, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, top))) {
    throw Error(ErrorKind::RankDeficient, "sample covariance is singular");
  }
  return m;
}

RoundingResult round_to_isotropic(Rng& rng, const PointSet& ps, const TentParams& tp, double target_C,
                                  const RoundingOptions& opts, const Eigen::VectorXd* start,
                                  const AffineMap* initial) {
  if (!(target_C > 1.0)) throw Error(ErrorKind::InvalidArgument, "target_C must exceed 1");
  const int d = ps.dim();
  RoundingResult best;
  best.map = initial ? *initial : AffineMap::identity(d);
  best.last_point = start ? *start : ps.barycenter();
  best.eigen_ratio = std::numeric_limits<double>::infinity();
  if (std::isinf(target_C)) {
    best.converged = true;
    return best;
  }

  const int thin = opts.thin > 0 ? opts.thin : 2 * d;
  const int burn = opts.burn_in > 0 ? opts.burn_in : default_chain_steps(ps.count(), d);
  const int count = std::max(opts.samples_per_round, d + 2);
  AffineMap map = best.map;
  Eigen::VectorXd x = hit_and_run(rng, ps, tp, map, best.last_point, burn);

  for (int round = 1; round <= opts.max_rounds; ++round) {
    Eigen::MatrixXd mapped(d, count);
    for (int i = 0; i < count; ++i) {
      x = hit_and_run(rng, ps, tp, map, x, thin);
      mapped.col(i) = map.inverse_apply(x);
    }
    const Moments mom = estimate_covariance(mapped);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mom.cov);
    const Eigen::VectorXd lambda = eig.eigenvalues();
    const double ratio = lambda.maxCoeff() / lambda.minCoeff();
    if (ratio < best.eigen_ratio) {
      best.map = map;
      best.eigen_ratio = ratio;
    }
    best.rounds = round;
    best.last_point = x;
    if (ratio <= target_C * target_C) {
      best.map = map;
      best.eigen_ratio = ratio;
      best.converged = true;
      return best;
    }
    const Eigen::MatrixXd root =
        eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    map = AffineMap::from(map.matrix * root, map.apply(mom.mean));
  }
  return best;
}

Separation level_set_separation(const PointSet& ps, const TentParams& tp, const Eigen::VectorXd& z,
                                double delta) {
  if (z.size() != ps.dim()) throw Error(ErrorKind::DimensionMismatch, "query dimension mismatch");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidArgument, "delta must be in (0, 1)");
  const int d = ps.dim();
  const int n = ps.count();
  Eigen::Index top = 0;
  const double y_max = tp.heights().maxCoeff(&top);
  const Eigen::VectorXd x_max = ps.point(static_cast<int>(top));
  const Eigen::VectorXd w = z - x_max;
  Separation sep;
  if (w.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + x_max.lpNorm<Eigen::Infinity>())) return sep;

  const double level = y_max + std::log(delta);
  // Variables (alpha_1..alpha_n, t, slack):
  //   X alpha - t w = X_max,  1·alpha = 1,  y·alpha - slack = level.
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(n + 2);
  lp.objective[n] = 1.0;
  lp.constraints = Eigen::MatrixXd::Zero(d + 2, n + 2);
  lp.constraints.block(0, 0, d, n) = ps.points();
  lp.constraints.block(0, n, d, 1) = -w;
  lp.constraints.block(d, 0, 1, n).setOnes();
  lp.constraints.block(d + 1, 0, 1, n) = tp.heights().transpose();
  lp.constraints(d + 1, n + 1) = -1.0;
  lp.rhs.resize(d + 2);
  lp.rhs.head(d) = x_max;
  lp.rhs[d] = 1.0;
  lp.rhs[d + 1] = level;

  const LpOutcome out = solve(lp);
  if (!out.optimal()) {
    throw Error(ErrorKind::NumericalFailure, "separation program did not reach an optimum");
  }
  if (out.value >= 1.0) return sep;

  // Dual (u, v, rho): u·X_i + v + rho y_i >= 0, -u·w >= 1, rho <= 0. With
  // phi(x) = u·x + v the level set lies in {phi >= -rho level} and
  // phi(Z) <= t* - rho level - 1.
  const Eigen::VectorXd u = out.duals.head(d);
  const double v = out.duals[d];
  const double r = -out.duals[d + 1];
  sep.inside = false;
  sep.normal = -u;
  sep.offset = v - r * level;
  return sep;
}

}  // namespace lcmle
