#pragma once

#include <Eigen/Core>

#include "lcmle/rng.hpp"
#include "lcmle/tent.hpp"

namespace lcmle {

inline constexpr double kDefaultTruncationConstant = 8.0;

// z = 2 log(2/eps) + d log(constant * d); eps in (0, 0.1].
double truncation_depth(double eps, int dim, double constant = kDefaultTruncationConstant);

struct VolumeEstimate {
  double volume = 0.0;
  double std_error = 0.0;
  long samples = 0;
  long hits = 0;
};

struct MonteCarloOptions {
  double rel_err = 0.02;
  double confidence = 0.95;
  long pilot = 4000;
  long max_samples = 2'000'000;
};

// Rejection estimate of Vol{x : h(x) >= level} from uniform draws in the
// bounding box. Throws VanishingLevelSet when no draw lands in the set.
VolumeEstimate level_set_volume(Rng& rng, const PointSet& ps, const TentParams& tp, double level,
                                double rel_err = 0.02, double confidence = 0.95,
                                long max_samples = 2'000'000);

struct SliceEstimate {
  double log_partition = 0.0;
  double additive_error = 0.0;  // eps plus the Monte Carlo half-width (log scale)
  double mc_error = 0.0;        // standard error of the estimate (log scale)
  int slice_count = 0;
  double truncation_depth = 0.0;
  long samples = 0;
};

struct SliceOptions {
  MonteCarloOptions mc{0.01, 0.95, 4000, 2'000'000};
  double truncation_constant = kDefaultTruncationConstant;
};

// Lower Lebesgue sum over the level sets L_i = {h >= h_max + i log(1 - eps/2)}.
// All slice volumes share one cloud of uniform draws.
SliceEstimate log_partition_sliced(Rng& rng, const PointSet& ps, const TentParams& tp, double eps,
                                   const SliceOptions& opts = {});

struct QuadratureResult {
  double log_partition = 0.0;
  Eigen::VectorXd expected_stat;  // E[T_y(x)] under the normalized density; empty if not requested
};

// d = 1: exact. d = 2: exact along vertical chords, adaptive Gauss-Legendre
// across them (panels split at the pole abscissae, where the inner integral
// stops being smooth). Throws UnsupportedDimension for d >= 3.
QuadratureResult quadrature_moments(const PointSet& ps, const TentParams& tp, bool with_stat = true);
double log_partition_quadrature(const PointSet& ps, const TentParams& tp);
Eigen::VectorXd expected_stat_quadrature(const PointSet& ps, const TentParams& tp);

}  // namespace lcmle
