#include "lcmle/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "lcmle/error.hpp"

namespace lcmle {

namespace {

// Row 0 holds reduced costs (z_j - c_j) and the objective value in the last
// column. Rows 1..m hold the constraint rows, columns [0, k) are structural,
// [k, k+m) artificial, k+m is the right-hand side.
class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), k_(cols), width_(cols + rows + 1),
                                cells_(static_cast<std::size_t>(rows + 1) * (cols + rows + 1), 0.0),
                                basis_(rows) {}

  double& at(int r, int c) { return cells_[static_cast<std::size_t>(r) * width_ + c]; }
  double at(int r, int c) const { return cells_[static_cast<std::size_t>(r) * width_ + c]; }
  double& rhs(int r) { return at(r, width_ - 1); }
  int rows() const { return m_; }
  int structural() const { return k_; }
  int width() const { return width_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(int row, int col) {
    const double p = at(row, col);
    double* pr = &cells_[static_cast<std::size_t>(row) * width_];
    for (int c = 0; c < width_; ++c) pr[c] /= p;
    pr[col] = 1.0;
    for (int r = 0; r <= m_; ++r) {
      if (r == row) continue;
      double* rr = &cells_[static_cast<std::size_t>(r) * width_];
      const double f = rr[col];
      if (f == 0.0) continue;
      for (int c = 0; c < width_; ++c) rr[c] -= f * pr[c];
      rr[col] = 0.0;
    }
    basis_[row - 1] = col;
  }

 private:
  int m_;
  int k_;
  int width_;
  std::vector<double> cells_;
  std::vector<int> basis_;
};

enum class PhaseResult { Optimal, Unbounded };

// Bland's rule over the structural columns only.
PhaseResult run_simplex(Tableau& t, const LpTolerances& tol, int cap) {
  const int m = t.rows();
  for (int iter = 0; iter < cap; ++iter) {
    int entering = -1;
    for (int j = 0; j < t.structural(); ++j) {
      if (t.at(0, j) < -tol.optimality) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return PhaseResult::Optimal;

    int leaving = -1;
    double best = 0.0;
    for (int r = 1; r <= m; ++r) {
      const double a = t.at(r, entering);
      if (a <= tol.pivot) continue;
      const double ratio = std::max(t.rhs(r), 0.0) / a;
      if (leaving < 0 || ratio < best - 1e-14 * (1.0 + best) ||
          (std::abs(ratio - best) <= 1e-14 * (1.0 + best) &&
           t.basis()[r - 1] < t.basis()[leaving - 1])) {
        leaving = r;
        best = ratio;
      }
    }
    if (leaving < 0) return PhaseResult::Unbounded;
    t.pivot(leaving, entering);
  }
  throw Error(ErrorKind::NumericalFailure,
              "simplex exceeded iteration cap of " + std::to_string(cap));
}

void check_shapes(const LinearProgram& lp) {
  const auto k = lp.objective.size();
  if (lp.constraints.cols() != k || lp.constraints.rows() != lp.rhs.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "constraint matrix is " + std::to_string(lp.constraints.rows()) + "x" +
                    std::to_string(lp.constraints.cols()) + ", objective has " +
                    std::to_string(k) + " entries, rhs has " + std::to_string(lp.rhs.size()));
  }
  if (!lp.objective.allFinite() || !lp.constraints.allFinite() || !lp.rhs.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "linear program has non-finite entries");
  }
}

}  // namespace

LpOutcome solve(const LinearProgram& lp, const LpTolerances& tol) {
  check_shapes(lp);
  const int m = static_cast<int>(lp.constraints.rows());
  const int k = static_cast<int>(lp.constraints.cols());
  LpOutcome out;

  if (m == 0) {
    if ((lp.objective.array() > tol.optimality).any()) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    out.status = LpStatus::Optimal;
    out.solution = Eigen::VectorXd::Zero(k);
    out.duals.resize(0);
    return out;
  }

  Tableau t(m, k);
  std::vector<double> sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    sign[i] = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < k; ++j) t.at(i + 1, j) = sign[i] * lp.constraints(i, j);
    t.at(i + 1, k + i) = 1.0;
    t.rhs(i + 1) = sign[i] * lp.rhs[i];
    t.basis()[i] = k + i;
  }
  const int cap = tol.iteration_factor * (m + k);

  // Phase 1: maximize -sum(artificials).
  for (int c = 0; c < t.width(); ++c) {
    if (c >= k && c < k + m) continue;
    double s = 0.0;
    for (int r = 1; r <= m; ++r) s += t.at(r, c);
    t.at(0, c) = -s;
  }
  run_simplex(t, tol, cap);
  const double scale = 1.0 + lp.rhs.lpNorm<Eigen::Infinity>();
  if (-t.rhs(0) > tol.feasibility * scale) {
    out.status = LpStatus::Infeasible;
    return out;
  }

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are linearly dependent on the others.
  for (int r = 1; r <= m; ++r) {
    if (t.basis()[r - 1] < k) continue;
    int best = -1;
    double mag = tol.pivot * 100.0;
    for (int j = 0; j < k; ++j) {
      if (std::abs(t.at(r, j)) > mag) {
        mag = std::abs(t.at(r, j));
        best = j;
      }
    }
    if (best >= 0) t.pivot(r, best);
  }

  // Phase 2.
  for (int c = 0; c < t.width(); ++c) {
    double z = 0.0;
    for (int r = 1; r <= m; ++r) {
      const int b = t.basis()[r - 1];
      if (b < k) z += lp.objective[b] * t.at(r, c);
    }
    t.at(0, c) = c < k ? z - lp.objective[c] : z;
  }
  if (run_simplex(t, tol, cap) == PhaseResult::Unbounded) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  out.status = LpStatus::Optimal;
  out.solution = Eigen::VectorXd::Zero(k);
  out.basis.assign(m, -1);
  bool square = true;
  for (int r = 1; r <= m; ++r) {
    const int b = t.basis()[r - 1];
    if (b < k) {
      out.basis[r - 1] = b;
      out.solution[b] = t.rhs(r);
    } else {
      square = false;
    }
  }

  // Re-solve the basic system on the original data to shed pivoting error.
  if (square) {
    Eigen::MatrixXd basic(m, m);
    for (int r = 0; r < m; ++r) basic.col(r) = lp.constraints.col(out.basis[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basic);
    const Eigen::VectorXd refined = lu.solve(lp.rhs);
    const double resid = (basic * refined - lp.rhs).lpNorm<Eigen::Infinity>();
    if (refined.allFinite() && refined.minCoeff() >= -tol.clamp && resid <= 1e-12 * scale) {
      for (int r = 0; r < m; ++r) out.solution[out.basis[r]] = refined[r];
    }
  }
  for (int j = 0; j < k; ++j) {
    if (out.solution[j] < 0.0 && out.solution[j] >= -tol.clamp) out.solution[j] = 0.0;
  }
  out.value = lp.objective.dot(out.solution);

  out.duals.resize(m);
  for (int i = 0; i < m; ++i) out.duals[i] = sign[i] * t.at(0, k + i);
  return out;
}

LpOutcome fixed_basis_resolve(const LinearProgram& lp, std::span<const int> forbidden,
                              const LpTolerances& tol) {
  check_shapes(lp);
  const int k = static_cast<int>(lp.objective.size());
  std::vector<char> banned(k, 0);
  for (int j : forbidden) {
    if (j < 0 || j >= k) {
      throw Error(ErrorKind::DimensionMismatch,
                  "forbidden index " + std::to_string(j) + " outside [0, " + std::to_string(k) + ")");
    }
    banned[j] = 1;
  }
  std::vector<int> kept;
  for (int j = 0; j < k; ++j) {
    if (!banned[j]) kept.push_back(j);
  }

  LinearProgram reduced;
  reduced.objective.resize(static_cast<Eigen::Index>(kept.size()));
  reduced.constraints.resize(lp.constraints.rows(), static_cast<Eigen::Index>(kept.size()));
  reduced.rhs = lp.rhs;
  for (std::size_t c = 0; c < kept.size(); ++c) {
    reduced.objective[c] = lp.objective[kept[c]];
    reduced.constraints.col(c) = lp.constraints.col(kept[c]);
  }

  LpOutcome sub = solve(reduced, tol);
  if (!sub.optimal()) return sub;
  LpOutcome out = sub;
  out.solution = Eigen::VectorXd::Zero(k);
  for (std::size_t c = 0; c < kept.size(); ++c) out.solution[kept[c]] = sub.solution[c];
  for (int& b : out.basis) {
    if (b >= 0) b = kept[b];
  }
  return out;
}

}  // namespace lcmle
