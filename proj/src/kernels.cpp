#include "lcmle/kernels.hpp"

#include <exception>

#include <omp.h>

namespace lcmle::kernels {

namespace {

// Runs body(i) for i in [0, n) across threads; the first exception thrown is
// rethrown on the calling thread.
template <typename Body>
void parallel_for(long n, Body&& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(lcmle_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Eigen::VectorXd tent_eval_batch(const PointSet& ps, const TentParams& tp, const Eigen::MatrixXd& queries) {
  Eigen::VectorXd out(queries.cols());
  parallel_for(static_cast<long>(queries.cols()),
               [&](long i) { out[i] = tent_eval(ps, tp, queries.col(i)); });
  return out;
}

Eigen::VectorXd tent_eval_batch_serial(const PointSet& ps, const TentParams& tp,
                                       const Eigen::MatrixXd& queries) {
  Eigen::VectorXd out(queries.cols());
  for (Eigen::Index i = 0; i < queries.cols(); ++i) out[i] = tent_eval(ps, tp, queries.col(i));
  return out;
}

LineMoments line_moments(const PointSet& ps, const TentParams& tp, const Chord& chord, double shift,
                         bool with_stat) {
  LineMoments m;
  if (with_stat) m.stat = Eigen::VectorXd::Zero(ps.count());
  const LineTent lt = restrict_to_line(ps, tp, chord);
  const std::vector<double> mass = segment_masses(lt, shift);
  for (int j = 0; j < lt.segments(); ++j) {
    m.mass += mass[j];
    if (!with_stat) continue;
    // T is affine on a piece, so its integral is T at the centroid times mass.
    const double len = lt.breakpoints[j + 1] - lt.breakpoints[j];
    const double c = lt.breakpoints[j] + segment_centroid(len, lt.log_heights[j], lt.log_heights[j + 1]);
    const PolyStat t = barycentric_over(ps, tp, lt.supports[j], chord.at(c));
    for (const auto& [i, w] : t.entries) m.stat[i] += mass[j] * w;
  }
  return m;
}

std::vector<LineMoments> line_moments_batch(const PointSet& ps, const TentParams& tp,
                                            const std::vector<Chord>& chords, double shift,
                                            bool with_stat) {
  std::vector<LineMoments> out(chords.size());
  parallel_for(static_cast<long>(chords.size()),
               [&](long i) { out[i] = line_moments(ps, tp, chords[i], shift, with_stat); });
  return out;
}

std::vector<LineMoments> line_moments_batch_serial(const PointSet& ps, const TentParams& tp,
                                                   const std::vector<Chord>& chords, double shift,
                                                   bool with_stat) {
  std::vector<LineMoments> out;
  out.reserve(chords.size());
  for (const Chord& c : chords) out.push_back(line_moments(ps, tp, c, shift, with_stat));
  return out;
}

}  // namespace lcmle::kernels
