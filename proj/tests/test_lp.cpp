#include <doctest.h>

#include <array>
#include <random>

#include "helpers.hpp"
#include "lcmle/error.hpp"
#include "lcmle/lp.hpp"

using namespace lcmle;
using testing::vec;

namespace {

LinearProgram lp_of(Eigen::VectorXd c, Eigen::MatrixXd A, Eigen::VectorXd b) { return {c, A, b}; }

LinearProgram square_program() {
  Eigen::MatrixXd A(3, 4);
  A << 0, 1, 0, 1,
       0, 0, 1, 1,
       1, 1, 1, 1;
  return lp_of(vec({0, 0, 0, -1}), A, vec({0.5, 0.5, 1}));
}

}  // namespace

TEST_CASE("lp: forced by two equalities") {
  Eigen::MatrixXd A(2, 2);
  A << 1, 1,
       0, 1;
  const LpOutcome out = solve(lp_of(vec({0, 1}), A, vec({1, 0.5})));
  REQUIRE(out.optimal());
  CHECK(out.value == doctest::Approx(0.5));
  CHECK(out.solution[0] == doctest::Approx(0.5));
  CHECK(out.solution[1] == doctest::Approx(0.5));
}

TEST_CASE("lp: contradictory equalities are infeasible") {
  Eigen::MatrixXd A(2, 1);
  A << 1, 1;
  CHECK(solve(lp_of(vec({1}), A, vec({1, 2}))).status == LpStatus::Infeasible);
}

TEST_CASE("lp: unbounded ray") {
  Eigen::MatrixXd A(1, 2);
  A << 1, -1;
  CHECK(solve(lp_of(vec({0, 1}), A, vec({1}))).status == LpStatus::Unbounded);
}

TEST_CASE("lp: square density program picks the anti-diagonal") {
  const LinearProgram lp = square_program();
  Eigen::VectorXd best;
  const double oracle = testing::enumerate_bases(lp, &best);
  const LpOutcome out = solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.value == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(out.value == doctest::Approx(0.0));
  CHECK((out.solution - vec({0, 0.5, 0.5, 0})).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("lp: forbidding a variable") {
  const LinearProgram lp = square_program();
  SUBCASE("support variable forbidden falls back to the diagonal") {
    const std::array<int, 1> forbid{1};
    const LpOutcome out = fixed_basis_resolve(lp, forbid);
    REQUIRE(out.optimal());
    CHECK(out.solution[1] == 0.0);
    // Enumeration over the remaining columns.
    Eigen::MatrixXd A(3, 3);
    A << lp.constraints.col(0), lp.constraints.col(2), lp.constraints.col(3);
    const double oracle = testing::enumerate_bases(lp_of(vec({0, 0, -1}), A, lp.rhs));
    CHECK(out.value == doctest::Approx(oracle));
    CHECK(out.value == doctest::Approx(-0.5));
  }
  SUBCASE("forbidding a zero variable changes nothing") {
    const std::array<int, 1> forbid{0};
    const LpOutcome a = solve(lp);
    const LpOutcome b = fixed_basis_resolve(lp, forbid);
    REQUIRE(b.optimal());
    CHECK(b.value == doctest::Approx(a.value));
    CHECK((a.solution - b.solution).norm() < 1e-12);
  }
  SUBCASE("out-of-range index") {
    const std::array<int, 1> forbid{7};
    CHECK_THROWS_AS(fixed_basis_resolve(lp, forbid), Error);
  }
}

TEST_CASE("lp: two-pole program at the midpoint needs both poles") {
  Eigen::MatrixXd A(2, 2);
  A << 0, 1,
       1, 1;
  const std::array<int, 1> forbid{0};
  CHECK(fixed_basis_resolve(lp_of(vec({0, 0}), A, vec({0.5, 1})), forbid).status == LpStatus::Infeasible);
}

TEST_CASE("lp: shape and finiteness checks") {
  Eigen::MatrixXd A(2, 2);
  A << 1, 0,
       0, 1;
  CHECK_THROWS_AS(solve(lp_of(vec({1, 1, 1}), A, vec({1, 1}))), Error);
  CHECK_THROWS_AS(solve(lp_of(vec({1, 1}), A, vec({1}))), Error);
  try {
    solve(lp_of(vec({1, std::nan("")}), A, vec({1, 1})));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("lp: random instances agree with basis enumeration") {
  Rng rng = make_stream(11, "lp-random");
  std::uniform_int_distribution<int> rows_dist(1, 4);
  std::uniform_int_distribution<int> cols_dist(2, 8);
  std::normal_distribution<double> normal;
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int m = rows_dist(rng);
    const int k = std::max(cols_dist(rng), m);
    // Simplex row keeps the feasible set bounded; rhs from a feasible point.
    Eigen::MatrixXd A(m + 1, k);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < k; ++c) A(r, c) = normal(rng);
    }
    A.row(m).setOnes();
    Eigen::VectorXd w(k);
    for (int c = 0; c < k; ++c) w[c] = std::abs(normal(rng));
    w /= w.sum();
    if (trial % 5 == 0 && k > 2) {
      w.head(k / 2).setZero();
      w /= w.sum();
    }
    const Eigen::VectorXd b = A * w;
    Eigen::VectorXd c(k);
    for (int j = 0; j < k; ++j) c[j] = normal(rng);
    const LinearProgram lp = lp_of(c, A, b);
    const LpOutcome out = solve(lp);
    REQUIRE(out.optimal());
    const double oracle = testing::enumerate_bases(lp);
    CHECK(out.value == doctest::Approx(oracle).epsilon(1e-8));
    // Feasibility, nonnegativity, basic support.
    CHECK((A * out.solution - b).lpNorm<Eigen::Infinity>() <= 1e-9 * (1 + b.lpNorm<Eigen::Infinity>()));
    CHECK(out.solution.minCoeff() >= 0.0);
    CHECK((out.solution.array() > 1e-9).count() <= m + 1);
    // Dual certificate: A^T u >= c and b.u = value.
    REQUIRE(out.duals.size() == m + 1);
    CHECK((A.transpose() * out.duals - c).minCoeff() >= -1e-8);
    CHECK(b.dot(out.duals) == doctest::Approx(out.value).epsilon(1e-8));
    ++checked;
  }
  CHECK(checked == 400);
}

TEST_CASE("lp: degenerate programs with redundant rows") {
  // Duplicate rows and a zero row.
  Eigen::MatrixXd A(4, 3);
  A << 1, 1, 1,
       1, 1, 1,
       0, 0, 0,
       1, 2, 3;
  const LinearProgram lp = lp_of(vec({1, 0, 2}), A, vec({1, 1, 0, 2}));
  const LpOutcome out = solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.value == doctest::Approx(testing::enumerate_bases(lp)));
}
