#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "vfsmooth/bilevel_solver.hpp"

using namespace vfsmooth;
using vfsmooth::testing::v1;

TEST_CASE("kkt residual examples") {
  const ProblemInstance p = make_builtin("toy_bilevel");
  KKTResidual r = kkt_residual(p, v1(0.0), v1(0.0), 0.0, 0.1, 0.01, SmootherKind::kQuad);
  CHECK(r.stationarity == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.feasibility == 0.0);
  CHECK(r.complementarity == 0.0);

  // Unconstrained minimizer of f is (0, 1); with eps large the constraint is slack.
  r = kkt_residual(p, v1(0.0), v1(1.0), 0.0, 0.1, 5.0, SmootherKind::kQuad);
  CHECK(r.stationarity <= 1e-8);
  CHECK(r.feasibility <= 1e-8);
  CHECK(r.complementarity <= 1e-8);

  r = kkt_residual(p, v1(0.0), v1(0.0), 1.0, 0.1, 0.01, SmootherKind::kQuad);
  CHECK(r.slack < 0.0);
  CHECK(r.complementarity == doctest::Approx(std::abs(r.slack)));

  CHECK_THROWS_AS(kkt_residual(p, v1(3.0), v1(0.0), 0.0, 0.1, 0.01, SmootherKind::kQuad), std::invalid_argument);
  CHECK_THROWS_AS(kkt_residual(p, v1(0.0), v1(0.0), -1.0, 0.1, 0.01, SmootherKind::kQuad), std::invalid_argument);
}

TEST_CASE("toy solve reaches the grid optimum") {
  const ProblemInstance p = make_builtin("toy_bilevel");
  const SolveResult r = solve_vfp(p, SolveOptions{});
  // 801 x 801 grid search of min (y-1)^2 + x^2 s.t. (y-x)^2 <= 0.01 on [-2,2]^2.
  CHECK(std::abs(r.x(0) - 0.45) <= 5e-2);
  CHECK(std::abs(r.y(0) - 0.55) <= 5e-2);
  CHECK(r.lambda == doctest::Approx(4.5).epsilon(1e-2));
  CHECK_FALSE(r.trace.lambda_cap_hit);

  const auto& rows = r.trace.rows;
  REQUIRE(rows.size() == 13);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].mu < rows[k - 1].mu);
    CHECK(rows[k].tol_stationarity <= rows[k - 1].tol_stationarity);
    CHECK(rows[k].tol_feasibility <= rows[k - 1].tol_feasibility);
    CHECK(rows[k].tol_complementarity <= rows[k - 1].tol_complementarity);
  }
  for (const auto& row : rows) {
    CHECK(row.residual.stationarity <= row.tol_stationarity);
    CHECK(row.residual.feasibility <= row.tol_feasibility);
    CHECK(row.residual.complementarity <= row.tol_complementarity);
    CHECK(row.lambda >= 0.0);
  }
  // Final point is feasible for the smoothed constraint.
  CHECK(rows.back().residual.slack <= 1e-8);
  CHECK(rows.back().residual.feasibility <= 1e-4);

  const StationarityReport s = limit_stationarity_check(p, r.x, r.y, r.lambda, 0.01, 1e-2);
  CHECK(s.pass);
}

TEST_CASE("solver is deterministic") {
  const ProblemInstance p = make_builtin("toy_bilevel");
  CHECK(to_csv(solve_vfp(p, SolveOptions{}).trace) == to_csv(solve_vfp(p, SolveOptions{}).trace));
}

TEST_CASE("entropic threshold failure names the bound") {
  const ProblemInstance p = make_builtin("toy_bilevel");
  SolveOptions o;
  o.smoother = SmootherKind::kEntropic;
  try {
    solve_vfp(p, o);
    FAIL("expected throw");
  } catch (const ThresholdError& e) {
    CHECK(e.mu() == 0.5);
    CHECK(e.bound() == doctest::Approx(0.01 / std::log(4.0)).epsilon(1e-12));
    CHECK(std::string(e.what()).find("0.007213") != std::string::npos);
  }
  o.mu0 = 0.007;
  o.K = 4;
  CHECK_NOTHROW(solve_vfp(p, o));
}

TEST_CASE("penalty divergence carries the trace") {
  const ProblemInstance p = make_builtin("toy_bilevel");
  SolveOptions o;
  o.penalty0 = 10.0;
  o.penalty_max = 50.0;
  o.K = 8;
  try {
    solve_vfp(p, o);
    FAIL("expected throw");
  } catch (const PenaltyDivergence& e) {
    CHECK(std::string(e.what()).find("penalty") != std::string::npos);
    CHECK(e.trace().rows.size() < 9);
  }
}

TEST_CASE("lambda cap is flagged") {
  SolveOptions o;
  o.lambda_cap = 1.0;
  const SolveResult r = solve_vfp(make_builtin("toy_bilevel"), o);
  CHECK(r.trace.lambda_cap_hit);
  const auto j = summary_json(r, StationarityReport{});
  CHECK(j["warning"] == "possible ENNAMCQ failure at the limit");
}

TEST_CASE("option validation") {
  const ProblemInstance p = make_builtin("toy_bilevel");
  SolveOptions o;
  o.eps = 0.0;
  CHECK_THROWS_AS(solve_vfp(p, o), std::invalid_argument);
  o = {};
  o.theta = 1.0;
  CHECK_THROWS_AS(solve_vfp(p, o), std::invalid_argument);
  o = {};
  o.mu0 = 1.5;
  CHECK_THROWS_AS(solve_vfp(p, o), std::invalid_argument);
}

TEST_CASE("limit stationarity check") {
  const ProblemInstance p = make_builtin("toy_bilevel");
  // Analytic optimum: x = 0.45, y = 0.55, lambda = 4.5.
  StationarityReport s = limit_stationarity_check(p, v1(0.45), v1(0.55), 4.5, 0.01, 1e-8);
  CHECK(s.pass);

  s = limit_stationarity_check(p, v1(-1.3), v1(1.6), 0.7, 0.01, 1e-2);
  CHECK_FALSE(s.pass);
  CHECK(s.feasibility > 0.0);
  CHECK(s.message.find("feasibility violation") != std::string::npos);

  try {
    limit_stationarity_check(p, v1(0.0), v1(0.0), -1.0, 0.01, 1e-2);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()) == "multiplier must be nonnegative");
  }

  ProblemInstance q = p;
  q.upper = nullptr;
  CHECK_THROWS_AS(limit_stationarity_check(q, v1(0.0), v1(0.0), 0.0, 0.01, 1e-2), std::invalid_argument);
}

TEST_CASE("limit check handles active box bounds") {
  // f = x^2 + (y-1)^2 with eps large: optimum (0, 1) interior. Shift f so the
  // unconstrained optimum lies outside X: f = (x-3)^2 + (y-1)^2, X = [-2, 2].
  ProblemInstance p = make_builtin("toy_bilevel");
  p.upper = [](const Vec& x, const Vec& y) {
    return PartialEval{(x(0) - 3) * (x(0) - 3) + (y(0) - 1) * (y(0) - 1), v1(2 * (x(0) - 3)), v1(2 * (y(0) - 1))};
  };
  const StationarityReport s = limit_stationarity_check(p, v1(2.0), v1(1.0), 0.0, 5.0, 1e-10);
  CHECK(s.stationarity <= 1e-10);
  CHECK(s.pass);
}

TEST_CASE("trace csv header") {
  const SolveResult r = solve_vfp(make_builtin("toy_bilevel"), SolveOptions{});
  const std::string csv = to_csv(r.trace);
  CHECK(csv.rfind("k,mu,x,y,lambda,stationarity,feasibility,complementarity,", 0) == 0);
}
