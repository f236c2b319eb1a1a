// Serial vs OpenMP kernels on a fixed random point set.

#include <benchmark/benchmark.h>

#include <random>

#include "lcmle/kernels.hpp"
#include "lcmle/line.hpp"
#include "lcmle/rng.hpp"
#include "lcmle/tent.hpp"

namespace {

struct Fixture {
  lcmle::PointSet ps;
  lcmle::TentParams tp;
  Eigen::MatrixXd queries;
  std::vector<lcmle::Chord> chords;
};

Fixture make_fixture(int d, int n, int q) {
  lcmle::Rng rng = lcmle::make_stream(7, "bench");
  std::normal_distribution<double> normal;
  Eigen::MatrixXd pts(d, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) pts(k, i) = normal(rng);
    y[i] = -0.5 * pts.col(i).squaredNorm();
  }
  lcmle::PointSet ps(pts);
  lcmle::TentParams tp(y);
  const Eigen::VectorXd c = ps.barycenter();
  Eigen::MatrixXd queries(d, q);
  std::vector<lcmle::Chord> chords;
  for (int j = 0; j < q; ++j) {
    const int a = j % n;
    const int b = (j * 7 + 3) % n;
    queries.col(j) = 0.25 * pts.col(a) + 0.25 * pts.col(b) + 0.5 * c;
    chords.push_back(lcmle::make_chord(ps, c, lcmle::random_direction(rng, d)));
  }
  return {ps, tp, queries, chords};
}

void BM_TentEvalSerial(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), 40, 256);
  for (auto _ : state) benchmark::DoNotOptimize(lcmle::kernels::tent_eval_batch_serial(f.ps, f.tp, f.queries));
}

void BM_TentEvalParallel(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), 40, 256);
  for (auto _ : state) benchmark::DoNotOptimize(lcmle::kernels::tent_eval_batch(f.ps, f.tp, f.queries));
}

void BM_LineMomentsSerial(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), 40, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lcmle::kernels::line_moments_batch_serial(f.ps, f.tp, f.chords, 0.0, true));
  }
}

void BM_LineMomentsParallel(benchmark::State& state) {
  const Fixture f = make_fixture(static_cast<int>(state.range(0)), 40, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lcmle::kernels::line_moments_batch(f.ps, f.tp, f.chords, 0.0, true));
  }
}

}  // namespace

BENCHMARK(BM_TentEvalSerial)->Arg(2)->Arg(3);
BENCHMARK(BM_TentEvalParallel)->Arg(2)->Arg(3);
BENCHMARK(BM_LineMomentsSerial)->Arg(2)->Arg(3);
BENCHMARK(BM_LineMomentsParallel)->Arg(2)->Arg(3);

BENCHMARK_MAIN();
