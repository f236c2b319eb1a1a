#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lcmle/rng.hpp"
#include "lcmle/tent.hpp"

namespace lcmle {

// The segment {origin + t * direction : t in [t_lo, t_hi]} inside the hull.
struct Chord {
  Eigen::VectorXd origin;
  Eigen::VectorXd direction;  // unit length
  double t_lo = 0.0;
  double t_hi = 0.0;

  Eigen::VectorXd at(double t) const { return origin + t * direction; }
  double length() const { return t_hi - t_lo; }
};

// The tent function restricted to a chord: piecewise linear in t with the
// given breakpoints. supports[j] lists the poles spanning piece j.
struct LineTent {
  std::vector<double> breakpoints;
  std::vector<double> log_heights;
  std::vector<std::vector<int>> supports;

  int segments() const { return static_cast<int>(breakpoints.size()) - 1; }
};

// Extreme parameters t with x0 + t * theta in the hull.
std::pair<double, double> chord_range(const PointSet& ps, const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& theta);

// Normalizes theta and resolves the hull range.
Chord make_chord(const PointSet& ps, const Eigen::VectorXd& x0, const Eigen::VectorXd& theta);

LineTent restrict_to_line(const PointSet& ps, const TentParams& tp, const Chord& chord);

// Integral of exp(linear) over a segment with end log-heights h0, h1.
double segment_mass(double length, double h0, double h1);

// Mean position in [0, length] of the density proportional to exp(linear).
double segment_centroid(double length, double h0, double h1);

// Exact inverse-CDF draw from the density proportional to
// exp(h0 + (h1 - h0) t / length) on [0, length].
double sample_segment(Rng& rng, double length, double h0, double h1);

// Masses of every piece, computed after shifting heights by `shift`.
std::vector<double> segment_masses(const LineTent& lt, double shift);

// Exact draw of the chord parameter t.
double sample_line_parameter(Rng& rng, const LineTent& lt);

Eigen::VectorXd sample_line(Rng& rng, const PointSet& ps, const TentParams& tp, const Chord& chord);

}  // namespace lcmle
