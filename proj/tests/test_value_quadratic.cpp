#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "vfsmooth/consistency_lab.hpp"
#include "vfsmooth/problems.hpp"
#include "vfsmooth/value_quadratic.hpp"

using namespace vfsmooth;
using vfsmooth::testing::v1;

TEST_CASE("solve_inner examples") {
  InnerSolveOptions o;
  o.tol = 1e-10;
  InnerSolveResult r = solve_inner(make_builtin("quad_conv"), v1(2.0), 0.1, o);
  CHECK(r.minimizer(0) == doctest::Approx(4.0 / 2.1).epsilon(1e-10));
  CHECK(r.residual <= 1e-10);

  r = solve_inner(make_builtin("gauss_well"), v1(0.4), 1.0, o);
  CHECK(std::abs(r.minimizer(0)) <= 1e-10);
  CHECK(std::abs(r.value) <= 1e-18);

  o.tol = 1e-8;
  // Huber keeps the minimizer inside |y| <= mu: 2(y - 1) + x y / mu + mu y = 0.
  r = solve_inner(make_builtin("lasso_hyper"), v1(2.0), 0.01, o);
  CHECK(r.minimizer(0) == doctest::Approx(2.0 / (2.0 + 200.0 + 0.01)).epsilon(1e-8));
  CHECK(std::abs(r.minimizer(0)) <= 0.01);
}

TEST_CASE("solve_inner rejects non-convex instances") {
  ProblemInstance p = make_builtin("gauss_well");
  p.flags.convex_in_y = false;
  try {
    solve_inner(p, v1(0.0), 0.1);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("quadratic smoother requires convexity in y") != std::string::npos);
  }
}

TEST_CASE("iteration cap carries the best iterate") {
  InnerSolveOptions o;
  o.max_iter = 1;
  o.warm_start = v1(1.0);
  try {
    solve_inner(make_builtin("lasso_hyper"), v1(1.0), 1e-3, o);
    FAIL("expected throw");
  } catch (const InnerSolveError& e) {
    CHECK(e.best().minimizer.size() == 1);
    CHECK(e.best().iterations <= 1);
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("quad_value and quad_grad closed forms on quad_conv") {
  const ProblemInstance p = make_builtin("quad_conv");
  CHECK(quad_value(p, v1(2.0), 0.1) == doctest::Approx(0.1 * 4 / 2.1).epsilon(1e-10));
  CHECK(std::abs(quad_grad(p, v1(2.0), 0.1)(0) - 0.4 / 2.1) <= 1e-6);
  CHECK(std::abs(quad_value(p, v1(0.0), 0.37)) <= 1e-14);
  CHECK(std::abs(quad_grad(p, v1(0.0), 0.37)(0)) <= 1e-12);
  CHECK(std::abs(quad_value(make_builtin("gauss_well"), v1(0.9), 0.5)) <= 1e-14);
}

TEST_CASE("quad_grad on lasso_hyper follows the Danskin derivative") {
  CHECK(std::abs(quad_grad(make_builtin("lasso_hyper"), v1(1.0), 1e-3)(0) - 0.5) <= 1e-2);
}

TEST_CASE("smoothing convergence on a 21-point grid") {
  for (const auto& name : builtin_names()) {
    const ProblemInstance p = make_builtin(name);
    if (!p.flags.convex_in_y || !p.v_exact) continue;
    for (int i = 0; i <= 20; ++i) {
      const Vec x = p.X.lower() + (p.X.upper() - p.X.lower()) * (i / 20.0);
      // Bound uses the unregularized minimizer of least norm.
      double ynorm2 = INFINITY;
      for (const auto& y : p.S_exact(x).points) ynorm2 = std::min(ynorm2, y.squaredNorm());
      double prev = INFINITY;
      for (double mu : {1.0, 0.1, 0.01, 0.001}) {
        const double err = std::abs(quad_value(p, x, mu) - p.v_exact(x));
        CAPTURE(name);
        CAPTURE(x(0));
        CAPTURE(mu);
        CHECK(err <= prev + 1e-8);
        CHECK(err <= p.kappa() * mu + 0.5 * mu * ynorm2 + 1e-10);
        prev = err;
      }
    }
  }
}

TEST_CASE("gradient identity against finite differences") {
  for (const auto& name : builtin_names()) {
    const ProblemInstance p = make_builtin(name);
    if (!p.flags.convex_in_y) continue;
    for (double mu : {0.1, 0.01}) {
      for (double t : {0.13, 0.37, 0.71}) {
        const Vec x = p.X.lower() + (p.X.upper() - p.X.lower()) * t;
        CAPTURE(name);
        CAPTURE(mu);
        CAPTURE(t);
        CHECK(fd_check(SmootherKind::kQuad, p, x, mu) <= 1e-5);
      }
    }
  }
}

TEST_CASE("inner minimizer does not depend on the start") {
  for (const auto& name : builtin_names()) {
    const ProblemInstance p = make_builtin(name);
    if (!p.flags.convex_in_y) continue;
    const double mu = 0.05;
    const Vec x = p.X.project(v1(0.7));
    const BoxSet box = p.search_box(x);
    InnerSolveOptions a;
    InnerSolveOptions b;
    a.tol = b.tol = 1e-9;
    a.warm_start = box.lower();
    b.warm_start = box.upper();
    const Vec ya = solve_inner(p, x, mu, a).minimizer;
    const Vec yb = solve_inner(p, x, mu, b).minimizer;
    CAPTURE(name);
    CHECK((ya - yb).norm() <= 2 * 1e-9 / mu);
  }
}

TEST_CASE("ENNAMCQ diagnostic branches") {
  const ProblemInstance p = make_builtin("toy_bilevel");
  QuadEnnamcqReport r = ennamcq_quad_diagnostic(p, v1(0.0), v1(0.0), 0.1, 0.01);
  CHECK_FALSE(r.active);
  CHECK(r.message == "inactive: CQ holds trivially");
  CHECK(r.slack == doctest::Approx(-0.01));

  r = ennamcq_quad_diagnostic(p, v1(0.0), v1(1.0), 0.1, 0.01);
  CHECK(r.active);
  CHECK(r.certificate == doctest::Approx(0.01).epsilon(1e-12));

  r = ennamcq_quad_diagnostic(p, v1(0.5), v1(1.0), 0.1, 0.0);
  CHECK_FALSE(r.in_scope);
  CHECK(r.message.find("outside the certified range") != std::string::npos);

  CHECK_THROWS_AS(ennamcq_quad_diagnostic(p, v1(3.0), v1(0.0), 0.1, 0.01), std::invalid_argument);
}
