#pragma once

#include <vector>

#include <Eigen/Core>

#include "lcmle/line.hpp"
#include "lcmle/tent.hpp"

// Data-parallel batch kernels. Each OpenMP kernel has a serial twin kept as
// the reference implementation; both produce identical results in index
// order.
namespace lcmle::kernels {

// h_{X,y} at every column of `queries`.
Eigen::VectorXd tent_eval_batch(const PointSet& ps, const TentParams& tp, const Eigen::MatrixXd& queries);
Eigen::VectorXd tent_eval_batch_serial(const PointSet& ps, const TentParams& tp,
                                       const Eigen::MatrixXd& queries);

// Exact integrals along one chord of exp(h - shift) and, optionally, of
// T_y(x) exp(h - shift).
struct LineMoments {
  double mass = 0.0;
  Eigen::VectorXd stat;
};

LineMoments line_moments(const PointSet& ps, const TentParams& tp, const Chord& chord, double shift,
                         bool with_stat);

std::vector<LineMoments> line_moments_batch(const PointSet& ps, const TentParams& tp,
                                            const std::vector<Chord>& chords, double shift,
                                            bool with_stat);
std::vector<LineMoments> line_moments_batch_serial(const PointSet& ps, const TentParams& tp,
                                                   const std::vector<Chord>& chords, double shift,
                                                   bool with_stat);

}  // namespace lcmle::kernels
