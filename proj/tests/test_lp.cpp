#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support/lp_oracle.hpp"
#include "whatif/lp.hpp"

using namespace whatif::lp;

namespace {

// Checks primal feasibility, dual sign conditions and complementary slackness.
void check_optimality_certificate(const LinearProgram& lp, const LpSolution& sol) {
  constexpr double tol = 1e-6;
  const auto act = lp.row_activity(sol.x);
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const double slack = lp.rhs()[iu] - act[iu];
    const double y = sol.row_duals[iu];
    switch (lp.senses()[iu]) {
      case Sense::kLessEqual:
        CHECK(slack >= -tol);
        CHECK(y <= tol);
        break;
      case Sense::kGreaterEqual:
        CHECK(slack <= tol);
        CHECK(y >= -tol);
        break;
      case Sense::kEqual:
        CHECK(std::abs(slack) <= tol);
        break;
    }
    CHECK(std::abs(y * slack) <= tol);
  }
  for (int j = 0; j < lp.num_variables(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double x = sol.x[ju];
    const double d = sol.reduced_costs[ju];
    const double lo = lp.lower()[ju];
    const double hi = lp.upper()[ju];
    CHECK(x >= lo - tol);
    CHECK(x <= hi + tol);
    const bool at_lo = std::abs(x - lo) <= tol;
    const bool at_hi = std::isfinite(hi) && std::abs(x - hi) <= tol;
    if (!at_lo && !at_hi) CHECK(std::abs(d) <= tol);
    if (at_lo && !at_hi) CHECK(d >= -tol);
    if (at_hi && !at_lo) CHECK(d <= tol);
  }
}

}  // namespace

TEST_CASE("textbook corner point") {
  // maximise 3x + 2y  s.t.  x + y <= 4, x <= 2
  LinearProgram lp;
  int x = lp.add_variable(-3.0);
  int y = lp.add_variable(-2.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, Sense::kLessEqual, 4.0);
  lp.add_row({{x, 1.0}}, Sense::kLessEqual, 2.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(2.0));
  CHECK(sol.x[1] == doctest::Approx(2.0));
  CHECK(sol.objective_value == doctest::Approx(-10.0));
  check_optimality_certificate(lp, sol);
}

TEST_CASE("contradictory bounds as rows are infeasible") {
  LinearProgram lp;
  int x = lp.add_variable(1.0);
  lp.add_row({{x, 1.0}}, Sense::kGreaterEqual, 1.0);
  lp.add_row({{x, 1.0}}, Sense::kLessEqual, 0.0);
  CHECK(solve_lp(lp).status == LpStatus::kInfeasible);
}

TEST_CASE("unbounded ray is detected") {
  LinearProgram lp;
  lp.add_variable(-1.0);
  CHECK(solve_lp(lp).status == LpStatus::kUnbounded);
}

TEST_CASE("equality rows and upper bounds") {
  // min x + 2y + 3z  s.t.  x + y + z = 6, x <= 2 (bound), y - z >= 1
  LinearProgram lp;
  int x = lp.add_variable(1.0, 0.0, 2.0);
  int y = lp.add_variable(2.0);
  int z = lp.add_variable(3.0);
  lp.add_row({{x, 1.0}, {y, 1.0}, {z, 1.0}}, Sense::kEqual, 6.0);
  lp.add_row({{y, 1.0}, {z, -1.0}}, Sense::kGreaterEqual, 1.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(2.0));
  CHECK(sol.x[1] == doctest::Approx(4.0));
  CHECK(sol.x[2] == doctest::Approx(0.0));
  CHECK(sol.objective_value == doctest::Approx(10.0));
  check_optimality_certificate(lp, sol);
}

TEST_CASE("negative lower bounds and empty programs") {
  LinearProgram lp;
  int x = lp.add_variable(1.0, -3.0, 5.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[static_cast<std::size_t>(x)] == doctest::Approx(-3.0));

  LinearProgram empty;
  auto none = solve_lp(empty);
  CHECK(none.status == LpStatus::kOptimal);
  CHECK(none.objective_value == 0.0);
}

TEST_CASE("malformed programs are rejected") {
  LinearProgram lp;
  lp.add_variable(1.0);
  CHECK_THROWS_AS(lp.add_row({{3, 1.0}}, Sense::kLessEqual, 1.0), LpError);

  LinearProgram nan_cost;
  nan_cost.add_variable(std::nan(""));
  CHECK_THROWS_AS(solve_lp(nan_cost), LpError);

  LinearProgram inf_coef;
  int v = inf_coef.add_variable(1.0);
  inf_coef.add_row({{v, kInfinity}}, Sense::kLessEqual, 1.0);
  CHECK_THROWS_AS(solve_lp(inf_coef), LpError);

  LinearProgram crossed;
  crossed.add_variable(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(solve_lp(crossed), LpError);

  CHECK_THROWS_AS(LinearProgram::from_dense({1.0}, {{1.0, 2.0}}, {Sense::kEqual}, {1.0}, {0.0},
                                            {kInfinity}),
                  LpError);
}

TEST_CASE("degenerate program terminates") {
  // Classic cycling example (Beale) in minimisation form.
  LinearProgram lp;
  int x1 = lp.add_variable(-0.75);
  int x2 = lp.add_variable(150.0);
  int x3 = lp.add_variable(-0.02);
  int x4 = lp.add_variable(6.0);
  lp.add_row({{x1, 0.25}, {x2, -60.0}, {x3, -0.04}, {x4, 9.0}}, Sense::kLessEqual, 0.0);
  lp.add_row({{x1, 0.5}, {x2, -90.0}, {x3, -0.02}, {x4, 3.0}}, Sense::kLessEqual, 0.0);
  lp.add_row({{x3, 1.0}}, Sense::kLessEqual, 1.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective_value == doctest::Approx(-0.05));
  check_optimality_certificate(lp, sol);
}

TEST_CASE("deterministic for a fixed instance") {
  std::mt19937_64 rng(11);
  auto dense = oracle::random_lp(rng);
  auto lp = dense.build();
  auto a = solve_lp(lp);
  auto b = solve_lp(lp);
  CHECK(a.status == b.status);
  CHECK(a.iterations == b.iterations);
  CHECK(a.x == b.x);
}

TEST_CASE("random programs agree with vertex enumeration") {
  std::mt19937_64 rng(20240607);
  int optimal = 0, infeasible = 0, unbounded = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto dense = oracle::random_lp(rng);
    auto lp = dense.build();
    auto expected = oracle::solve(dense);
    auto got = solve_lp(lp);
    CAPTURE(trial);
    const int limit = 10 * (lp.num_rows() + lp.num_variables());
    CHECK(got.iterations < limit);
    switch (expected.status) {
      case oracle::Status::kOptimal:
        ++optimal;
        REQUIRE(got.status == LpStatus::kOptimal);
        CHECK(std::abs(got.objective_value - expected.objective) <= 1e-6);
        check_optimality_certificate(lp, got);
        break;
      case oracle::Status::kInfeasible:
        ++infeasible;
        CHECK(got.status == LpStatus::kInfeasible);
        break;
      case oracle::Status::kUnbounded:
        ++unbounded;
        CHECK(got.status == LpStatus::kUnbounded);
        break;
    }
  }
  // The generator should exercise every outcome.
  CHECK(optimal > 10);
  CHECK(infeasible > 5);
  CHECK(unbounded > 5);
}

TEST_CASE("deadline in the past aborts") {
  std::mt19937_64 rng(3);
  auto lp = oracle::random_lp(rng).build();
  LpOptions opt;
  opt.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  CHECK_THROWS_AS(solve_lp(lp, opt), DeadlineExceeded);
}

TEST_CASE("text dump lists objective, rows and bounds") {
  LinearProgram lp;
  int x = lp.add_variable(2.0, 0.0, 4.0, "x");
  int y = lp.add_variable(-1.0, 0.0, kInfinity, "y");
  lp.add_row({{x, 1.0}, {y, -3.0}}, Sense::kGreaterEqual, 1.0, "cap");
  std::ostringstream out;
  write_lp(out, lp);
  const auto text = out.str();
  CHECK(text.find("minimize") != std::string::npos);
  CHECK(text.find("cap: + 1 x - 3 y >= 1") != std::string::npos);
  CHECK(text.find("0 <= y <= inf") != std::string::npos);
}
