#include "lcmle/line.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lcmle/error.hpp"

namespace lcmle {

namespace {

constexpr double kFlatSlope = 1e-8;

// max s  s.t.  X_S a - s * theta = x0,  1·a = 1,  a, s >= 0.
LinearProgram ray_program(const PointSet& ps, const std::vector<int>& cols, const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& theta) {
  const int d = ps.dim();
  const int k = static_cast<int>(cols.size());
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(k + 1);
  lp.objective[k] = 1.0;
  lp.constraints = Eigen::MatrixXd::Zero(d + 1, k + 1);
  for (int c = 0; c < k; ++c) {
    lp.constraints.col(c).head(d) = ps.points().col(cols[c]);
    lp.constraints(d, c) = 1.0;
  }
  lp.constraints.col(k).head(d) = -theta;
  lp.rhs.resize(d + 1);
  lp.rhs.head(d) = x0;
  lp.rhs[d] = 1.0;
  return lp;
}

std::vector<int> all_columns(int n) {
  std::vector<int> cols(n);
  for (int i = 0; i < n; ++i) cols[i] = i;
  return cols;
}

double max_ray(const PointSet& ps, const std::vector<int>& cols, const Eigen::VectorXd& x0,
               const Eigen::VectorXd& theta) {
  const LpOutcome out = solve(ray_program(ps, cols, x0, theta));
  if (out.status == LpStatus::Infeasible) return -1.0;
  if (out.status == LpStatus::Unbounded) {
    throw Error(ErrorKind::NumericalFailure, "unbounded ray in a bounded hull");
  }
  return out.value;
}

// Mean of exp(u s) on [0, 1]; series near u = 0 where the closed form cancels.
double mean_fraction(double u) {
  if (std::abs(u) < 1e-3) return 0.5 + u / 12.0 - u * u * u / 720.0;
  return 1.0 / (-std::expm1(-u)) - 1.0 / u;
}

}  // namespace

std::pair<double, double> chord_range(const PointSet& ps, const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& theta) {
  if (x0.size() != ps.dim() || theta.size() != ps.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "chord origin/direction dimension mismatch");
  }
  const auto cols = all_columns(ps.count());
  const double forward = max_ray(ps, cols, x0, theta);
  if (forward < 0.0) throw Error(ErrorKind::OutsideHull, "chord origin is outside the hull");
  const double backward = max_ray(ps, cols, x0, -theta);
  if (backward < 0.0) throw Error(ErrorKind::OutsideHull, "chord origin is outside the hull");
  return {-backward, forward};
}

Chord make_chord(const PointSet& ps, const Eigen::VectorXd& x0, const Eigen::VectorXd& theta) {
  const double norm = theta.norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::InvalidArgument, "chord direction must be nonzero");
  Chord c;
  c.origin = x0;
  c.direction = theta / norm;
  std::tie(c.t_lo, c.t_hi) = chord_range(ps, x0, c.direction);
  return c;
}

LineTent restrict_to_line(const PointSet& ps, const TentParams& tp, const Chord& chord) {
  const double len = chord.length();
  const double scale = 1.0 + chord.origin.lpNorm<Eigen::Infinity>() + std::abs(chord.t_lo) +
                       std::abs(chord.t_hi);
  if (!(len > 1e-12 * scale)) throw Error(ErrorKind::DegenerateChord, "chord has zero length");

  LineTent lt;
  lt.breakpoints.push_back(chord.t_lo);
  lt.log_heights.push_back(0.0);  // filled in after the first piece

  const int cap = 4 * ps.count() * ps.count() + 64;
  double t = chord.t_lo;
  for (int iter = 0; t < chord.t_hi; ++iter) {
    if (iter >= cap) throw Error(ErrorKind::DegenerateChord, "cell walk did not terminate");
    bool stepped = false;
    for (double nudge_rel : {1e-7, 1e-5}) {
      const double nudge = nudge_rel * len;
      if (t + nudge >= chord.t_hi && !lt.supports.empty()) {
        // Remaining stub is shorter than the nudge: extend the last piece.
        const double prev_t = lt.breakpoints[lt.breakpoints.size() - 2];
        const double prev_h = lt.log_heights[lt.log_heights.size() - 2];
        const double slope = (lt.log_heights.back() - prev_h) / (lt.breakpoints.back() - prev_t);
        lt.log_heights.back() += slope * (chord.t_hi - lt.breakpoints.back());
        lt.breakpoints.back() = chord.t_hi;
        t = chord.t_hi;
        stepped = true;
        break;
      }
      const double probe_t = t + nudge;
      const Eigen::VectorXd probe = chord.at(probe_t);
      PolyStat stat;
      try {
        stat = poly_stat(ps, tp, probe);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::OutsideHull) continue;
        throw;
      }
      std::vector<int> support = stat.support();
      const LpOutcome ray = solve(ray_program(ps, support, probe, chord.direction));
      if (!ray.optimal()) continue;
      const double s = ray.value;
      double end_h = 0.0;
      for (std::size_t c = 0; c < support.size(); ++c) {
        end_h += ray.solution[static_cast<Eigen::Index>(c)] * tp.heights()[support[c]];
      }
      double next = std::min(probe_t + s, chord.t_hi);
      if (chord.t_hi - next <= 1e-9 * len) next = chord.t_hi;
      if (lt.supports.empty()) {
        // Extrapolate the first piece back to the hull boundary.
        const double probe_h = stat.dot(tp.heights());
        const double slope = s > 0.0 ? (end_h - probe_h) / s : 0.0;
        lt.log_heights[0] = probe_h - slope * (probe_t - chord.t_lo);
      }
      lt.breakpoints.push_back(next);
      lt.log_heights.push_back(end_h);
      lt.supports.push_back(std::move(support));
      t = next;
      stepped = true;
      break;
    }
    if (!stepped) throw Error(ErrorKind::DegenerateChord, "chord runs along a lower-dimensional face");
  }
  return lt;
}

double segment_mass(double length, double h0, double h1) {
  const double delta = h1 - h0;
  if (std::abs(delta) > kFlatSlope) {
    const double hi = std::max(h0, h1);
    return length * std::exp(hi) * (-std::expm1(-std::abs(delta))) / std::abs(delta);
  }
  return length * std::exp(0.5 * (h0 + h1)) * (1.0 + delta * delta / 24.0);
}

double segment_centroid(double length, double h0, double h1) {
  return length * mean_fraction(h1 - h0);
}

double sample_segment(Rng& rng, double length, double h0, double h1) {
  const double u = uniform01(rng);
  const double delta = h1 - h0;
  if (std::abs(delta) <= kFlatSlope) return u * length;
  // Sample the decreasing orientation and mirror, so expm1 never overflows.
  const double drop = -std::abs(delta);
  const double frac = std::log1p(u * std::expm1(drop)) / drop;
  const double t = std::clamp(frac, 0.0, 1.0) * length;
  return delta < 0.0 ? t : length - t;
}

std::vector<double> segment_masses(const LineTent& lt, double shift) {
  std::vector<double> mass(lt.segments());
  for (int j = 0; j < lt.segments(); ++j) {
    mass[j] = segment_mass(lt.breakpoints[j + 1] - lt.breakpoints[j], lt.log_heights[j] - shift,
                           lt.log_heights[j + 1] - shift);
  }
  return mass;
}

double sample_line_parameter(Rng& rng, const LineTent& lt) {
  const double shift = *std::max_element(lt.log_heights.begin(), lt.log_heights.end());
  const std::vector<double> mass = segment_masses(lt, shift);
  double total = 0.0;
  for (double m : mass) total += m;
  const double pick = uniform01(rng) * total;
  int j = 0;
  double acc = mass[0];
  while (acc <= pick && j + 1 < lt.segments()) acc += mass[++j];
  const double len = lt.breakpoints[j + 1] - lt.breakpoints[j];
  return lt.breakpoints[j] + sample_segment(rng, len, lt.log_heights[j], lt.log_heights[j + 1]);
}

Eigen::VectorXd sample_line(Rng& rng, const PointSet& ps, const TentParams& tp, const Chord& chord) {
  const LineTent lt = restrict_to_line(ps, tp, chord);
  return chord.at(sample_line_parameter(rng, lt));
}

}  // namespace lcmle
