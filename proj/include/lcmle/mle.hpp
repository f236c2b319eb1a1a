#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lcmle/rng.hpp"
#include "lcmle/tent.hpp"

namespace lcmle {

enum class IterateMode { Last, SuffixAverage };

struct FitConfig {
  int iterations = 1000;        // m
  double step_constant = 1.0;   // eta_t = c / sqrt(t)
  std::uint64_t seed = 0;       // echoed into model files; the caller owns the Rng
  int chain_steps = 0;          // cold-start burn-in; 0 -> default_chain_steps(n, d)
  double round_target_C = 2.0;
  double tv_exponent = 2.0;     // each iteration's chain aims at TV distance m^-tv_exponent
  bool restart = false;
  std::optional<double> radius_clip;
  bool strict_tv = false;       // literal mixing-bound chain length (capped below)
  long strict_step_cap = 100'000;
  IterateMode iterate = IterateMode::Last;
  double suffix_fraction = 0.5;
  int rounding_cadence = 25;
  int rounding_window = 200;    // recent chain states used to refresh the map
  double epsilon = 0.1;         // log-partition accuracy for d >= 3 reporting
  bool estimate_partition = true;
  int max_doublings = 12;
  double wall_clock_cap = 0.0;  // seconds for fit_with_restarts; 0 disables
};

struct Diagnostics {
  int iterations_run = 0;
  double final_height_norm = 0.0;
  double max_height_norm = 0.0;
  // |running mean of g_t|_inf sampled along the run; tends to 0 at the MLE.
  std::vector<double> surrogate_trace;
};

struct Model {
  PointSet point_set;
  TentParams heights;
  double log_partition = 0.0;
  double log_partition_error = 0.0;
  bool normalized = false;
  Diagnostics diagnostics;
};

struct TraceRow {
  int iter = 0;
  double eta = 0.0;
  double grad_norm = 0.0;
  double height_sum = 0.0;
};

struct FitReport {
  Model model;
  double objective_estimate = 0.0;  // log_likelihood(model, data)
  double wall_time = 0.0;           // seconds
  std::vector<TraceRow> trace;
  int invocations = 1;
  int final_iterations = 0;
  double certified_gap = std::numeric_limits<double>::infinity();
  bool budget_exhausted = false;
};

// Hit-and-run steps between consecutive SGD samples.
long chain_steps_per_iteration(const FitConfig& cfg, int count, int dim);

FitReport sgd_fit(Rng& rng, const PointSet& ps, const FitConfig& cfg);

// (D^2/c + c G^2)(2 + log T)/sqrt(T).
double sgd_gap_bound(double diameter, double step_constant, double grad_bound, double iterations);

// Doubles the iteration budget until the bound above certifies target_gap.
FitReport fit_with_restarts(Rng& rng, const PointSet& ps, const FitConfig& cfg, double target_gap);

// sum_i h(x_i) - A; -infinity if any point is outside the hull.
double log_likelihood(const Model& model, const PointSet& data);

Model normalize(const Model& model);

struct OracleOptions {
  // On the distance from (1/n)1 to the hull of quadrature E[T] sampled within
  // the final radius; A has kinks wherever the subdivision changes, so a
  // single gradient need not vanish at the optimum.
  double tolerance = 1e-6;
  int max_iterations = 2'000;
  double initial_radius = 1e-2;
  double final_radius = 1e-9;
};

// Deterministic gradient-sampling ascent on <(1/n)1, y> - A(y) with
// quadrature gradients. Returns a normalized model; diagnostics.surrogate_trace
// holds the stationarity measure per iteration. Limited to d <= 2, n <= 8.
Model oracle_fit(const PointSet& ps, const OracleOptions& opts = {});

}  // namespace lcmle
