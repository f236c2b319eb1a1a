#include "lcmle/partition.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lcmle/error.hpp"
#include "lcmle/kernels.hpp"
#include "lcmle/line.hpp"

namespace lcmle {

namespace {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

GaussRule gauss_legendre(int order) {
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& rule16() {
  static const GaussRule r = gauss_legendre(16);
  return r;
}
const GaussRule& rule32() {
  static const GaussRule r = gauss_legendre(32);
  return r;
}

double box_volume(const PointSet& ps) {
  const Eigen::VectorXd lo = ps.lower_corner();
  const Eigen::VectorXd hi = ps.upper_corner();
  const double v = (hi - lo).prod();
  if (!(v > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "bounding box has zero volume");
  return v;
}

Eigen::MatrixXd uniform_box_draws(Rng& rng, const PointSet& ps, long count) {
  const Eigen::VectorXd lo = ps.lower_corner();
  const Eigen::VectorXd span = ps.upper_corner() - lo;
  Eigen::MatrixXd pts(ps.dim(), count);
  for (long j = 0; j < count; ++j) {
    for (int i = 0; i < ps.dim(); ++i) pts(i, j) = lo[i] + span[i] * uniform01(rng);
  }
  return pts;
}

double hoeffding_log_term(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "confidence must be in (0, 1)");
  }
  return std::log(2.0 / (1.0 - confidence));
}

// Chord {x_1 = s} through a 2-d hull, or nullopt where it is empty.
std::optional<Chord> vertical_chord(const PointSet& ps, double s) {
  const int n = ps.count();
  LinearProgram lp;
  lp.constraints.resize(2, n);
  lp.constraints.row(0) = ps.points().row(0);
  lp.constraints.row(1).setOnes();
  lp.rhs = Eigen::Vector2d(s, 1.0);
  lp.objective = ps.points().row(1).transpose();
  const LpOutcome top = solve(lp);
  lp.objective = -lp.objective;
  const LpOutcome bottom = solve(lp);
  if (!top.optimal() || !bottom.optimal()) return std::nullopt;
  const double hi = top.value;
  const double lo = -bottom.value;
  if (!(hi - lo > 1e-13 * (1.0 + std::abs(hi) + std::abs(lo)))) return std::nullopt;
  Chord c;
  c.origin = Eigen::Vector2d(s, 0.5 * (lo + hi));
  c.direction = Eigen::Vector2d(0.0, 1.0);
  c.t_lo = -0.5 * (hi - lo);
  c.t_hi = 0.5 * (hi - lo);
  return c;
}

struct PanelValue {
  double mass = 0.0;
  Eigen::VectorXd stat;
};

// Gauss-Legendre estimates of one panel at two orders, from one batch of chords.
std::pair<PanelValue, PanelValue> panel_estimates(const PointSet& ps, const TentParams& tp, double a,
                                                  double b, double shift, bool with_stat) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::vector<double> abscissae;
  std::vector<double> weights;
  std::vector<int> which;
  for (int r = 0; r < 2; ++r) {
    const GaussRule& rule = r == 0 ? rule16() : rule32();
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      abscissae.push_back(mid + half * rule.nodes[i]);
      weights.push_back(half * rule.weights[i]);
      which.push_back(r);
    }
  }
  std::vector<Chord> chords;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < abscissae.size(); ++i) {
    if (auto c = vertical_chord(ps, abscissae[i])) {
      chords.push_back(std::move(*c));
      owner.push_back(i);
    }
  }
  const auto moments = kernels::line_moments_batch(ps, tp, chords, shift, with_stat);
  PanelValue est[2];
  for (auto& e : est) {
    if (with_stat) e.stat = Eigen::VectorXd::Zero(ps.count());
  }
  for (std::size_t k = 0; k < chords.size(); ++k) {
    const std::size_t i = owner[k];
    PanelValue& e = est[which[i]];
    e.mass += weights[i] * moments[k].mass;
    if (with_stat) e.stat += weights[i] * moments[k].stat;
  }
  return {est[0], est[1]};
}

}  // namespace

double truncation_depth(double eps, int dim, double constant) {
  if (!(eps > 0.0 && eps <= 0.1)) throw Error(ErrorKind::InvalidArgument, "epsilon must be in (0, 0.1]");
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  return 2.0 * std::log(2.0 / eps) + dim * std::log(constant * dim);
}

VolumeEstimate level_set_volume(Rng& rng, const PointSet& ps, const TentParams& tp, double level,
                                double rel_err, double confidence, long max_samples) {
  if (!(rel_err > 0.0)) throw Error(ErrorKind::InvalidArgument, "rel_err must be positive");
  const double log_term = hoeffding_log_term(confidence);
  if (level > tp.max_height()) {
    throw Error(ErrorKind::VanishingLevelSet, "level exceeds the maximum tent height");
  }
  const double box = box_volume(ps);

  long drawn = 0;
  long hits = 0;
  long target = std::min<long>(4000, max_samples);
  while (drawn < target) {
    const Eigen::MatrixXd pts = uniform_box_draws(rng, ps, target - drawn);
    const Eigen::VectorXd h = kernels::tent_eval_batch(ps, tp, pts);
    for (Eigen::Index i = 0; i < h.size(); ++i) hits += h[i] >= level ? 1 : 0;
    drawn = target;
    if (hits == 0) {
      if (drawn >= max_samples) break;
      target = std::min(max_samples, 2 * drawn);
      continue;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(drawn);
    const double needed = log_term / (2.0 * rel_err * rel_err * p * p);
    target = std::max(drawn, std::min<long>(max_samples, static_cast<long>(std::ceil(needed))));
  }
  if (hits == 0) throw Error(ErrorKind::VanishingLevelSet, "no draw landed in the level set");

  const double p = static_cast<double>(hits) / static_cast<double>(drawn);
  VolumeEstimate est;
  est.volume = box * p;
  est.std_error = box * std::sqrt(p * (1.0 - p) / static_cast<double>(drawn));
  est.samples = drawn;
  est.hits = hits;
  return est;
}

SliceEstimate log_partition_sliced(Rng& rng, const PointSet& ps, const TentParams& tp, double eps,
                                   const SliceOptions& opts) {
  const double z = truncation_depth(eps, ps.dim(), opts.truncation_constant);
  const double log_term = hoeffding_log_term(opts.mc.confidence);
  const double log_q = std::log1p(-0.5 * eps);
  const int last = static_cast<int>(std::ceil(-z / log_q));
  const double h_max = tp.max_height();
  const double box = box_volume(ps);
  // q^(K+1): the part of every slice sum below the truncation depth.
  const double floor_term = std::exp((last + 1) * log_q);

  // A draw at depth s = (h - h_max)/log q lies in L_i for i >= ceil(s); its
  // share of the slice sum is q^ceil(s) - q^(K+1).
  auto contribution = [&](double h) {
    if (!std::isfinite(h)) return 0.0;
    const double depth = std::max(0.0, (h - h_max) / log_q);
    const double first = std::ceil(depth - 1e-12);
    if (first > last) return 0.0;
    return std::exp(first * log_q) - floor_term;
  };

  double sum = 0.0;
  double sum_sq = 0.0;
  long drawn = 0;
  long target = std::min(opts.mc.pilot, opts.mc.max_samples);
  while (drawn < target) {
    const Eigen::MatrixXd pts = uniform_box_draws(rng, ps, target - drawn);
    const Eigen::VectorXd h = kernels::tent_eval_batch(ps, tp, pts);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      const double c = contribution(h[i]);
      sum += c;
      sum_sq += c * c;
    }
    drawn = target;
    const double mean = sum / static_cast<double>(drawn);
    if (mean <= 0.0) {
      if (drawn >= opts.mc.max_samples) break;
      target = std::min(opts.mc.max_samples, 2 * drawn);
      continue;
    }
    const double needed = log_term / (2.0 * opts.mc.rel_err * opts.mc.rel_err * mean * mean);
    target = std::max(drawn, std::min<long>(opts.mc.max_samples, static_cast<long>(std::ceil(needed))));
  }
  const double mean = sum / static_cast<double>(drawn);
  if (!(mean > 0.0)) throw Error(ErrorKind::VanishingLevelSet, "no draw landed in any level set");

  const double var = std::max(0.0, sum_sq / static_cast<double>(drawn) - mean * mean);
  SliceEstimate est;
  est.log_partition = h_max + std::log(box) + std::log(mean);
  est.mc_error = std::sqrt(var / static_cast<double>(drawn)) / mean;
  const double half_width = std::sqrt(log_term / (2.0 * static_cast<double>(drawn))) / mean;
  est.additive_error = eps + (half_width < 1.0 ? -std::log1p(-half_width) : half_width);
  est.slice_count = last + 1;
  est.truncation_depth = z;
  est.samples = drawn;
  return est;
}

QuadratureResult quadrature_moments(const PointSet& ps, const TentParams& tp, bool with_stat) {
  if (tp.size() != ps.count()) throw Error(ErrorKind::DimensionMismatch, "height count mismatch");
  const double shift = tp.max_height();
  QuadratureResult res;
  if (ps.dim() == 1) {
    const Chord chord = make_chord(ps, ps.barycenter(), Eigen::VectorXd::Ones(1));
    const auto m = kernels::line_moments(ps, tp, chord, shift, with_stat);
    res.log_partition = shift + std::log(m.mass);
    if (with_stat) res.expected_stat = m.stat / m.mass;
    return res;
  }
  if (ps.dim() != 2) {
    throw Error(ErrorKind::UnsupportedDimension,
                "quadrature supports d <= 2, got d = " + std::to_string(ps.dim()));
  }

  std::vector<double> xs(ps.count());
  for (int i = 0; i < ps.count(); ++i) xs[i] = ps.points()(0, i);
  std::sort(xs.begin(), xs.end());
  const double width = xs.back() - xs.front();
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [&](double a, double b) { return b - a <= 1e-12 * (1.0 + width); }),
           xs.end());
  const double tol = 1e-12 * box_volume(ps);

  double mass = 0.0;
  Eigen::VectorXd stat = Eigen::VectorXd::Zero(with_stat ? ps.count() : 0);
  struct Panel { double a, b; int depth; };
  std::vector<Panel> todo;
  for (std::size_t i = xs.size() - 1; i-- > 0;) todo.push_back({xs[i], xs[i + 1], 0});
  while (!todo.empty()) {
    const Panel p = todo.back();
    todo.pop_back();
    auto [coarse, fine] = panel_estimates(ps, tp, p.a, p.b, shift, with_stat);
    double gap = std::abs(fine.mass - coarse.mass);
    if (with_stat) gap = std::max(gap, (fine.stat - coarse.stat).lpNorm<Eigen::Infinity>());
    if (gap <= tol || p.depth >= 24) {
      mass += fine.mass;
      if (with_stat) stat += fine.stat;
    } else {
      const double mid = 0.5 * (p.a + p.b);
      todo.push_back({mid, p.b, p.depth + 1});
      todo.push_back({p.a, mid, p.depth + 1});
    }
  }
  res.log_partition = shift + std::log(mass);
  if (with_stat) res.expected_stat = stat / mass;
  return res;
}

double log_partition_quadrature(const PointSet& ps, const TentParams& tp) {
  return quadrature_moments(ps, tp, false).log_partition;
}

Eigen::VectorXd expected_stat_quadrature(const PointSet& ps, const TentParams& tp) {
  return quadrature_moments(ps, tp, true).expected_stat;
}

}  // namespace lcmle
