#include <doctest.h>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "test_util.hpp"
#include "vfsmooth/consistency_lab.hpp"
#include "vfsmooth/problems.hpp"
#include "vfsmooth/smoothing_kernels.hpp"
#include "vfsmooth/value_entropic.hpp"

using namespace vfsmooth;
using vfsmooth::testing::v1;

namespace {

EntropicEval eval_at(const std::string& name, double x, double mu, int level) {
  const ProblemInstance p = make_builtin(name);
  return entropic_value(p, v1(x), mu, build_grid(entropic_box(p, mu, {level, 1.0}), level));
}

}  // namespace

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  const GaussLegendreRule r = gauss_legendre(16);
  CHECK(r.weights.sum() == doctest::Approx(2.0).epsilon(1e-15));
  // Degree 30 is within 2n - 1.
  CHECK(r.weights.dot(r.nodes.array().pow(30).matrix()) == doctest::Approx(2.0 / 31).epsilon(1e-13));
  for (int i = 1; i < 16; ++i) CHECK(r.nodes(i) > r.nodes(i - 1));
}

TEST_CASE("build_grid sizes and weights") {
  QuadratureGrid g = build_grid(BoxSet::interval(-1, 1), 0);
  CHECK(g.size() == 16);
  CHECK(g.weights.sum() == doctest::Approx(2.0).epsilon(1e-12));
  g = build_grid(BoxSet::cube(2, -1, 1), 1);
  CHECK(g.size() == 1024);
  CHECK(g.weights.sum() == doctest::Approx(4.0).epsilon(1e-12));
  g = build_grid(BoxSet::interval(0, 3), 0);
  CHECK(g.weights.sum() == doctest::Approx(3.0).epsilon(1e-12));
  for (Eigen::Index j = 0; j < g.size(); ++j) CHECK(g.box.contains(g.nodes.col(j)));
  CHECK(nodes_per_axis(3) == 128);
}

TEST_CASE("build_grid errors") {
  CHECK_THROWS_AS(build_grid(BoxSet::whole(1), 0), std::invalid_argument);
  try {
    build_grid(BoxSet::cube(4, 0, 1), 0);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("entropic quadrature limited to m <= 3") != std::string::npos);
  }
  CHECK_THROWS_AS(build_grid(BoxSet::interval(0, 1), -1), std::invalid_argument);
}

TEST_CASE("gauss_well against the Gaussian integral") {
  // -mu ln int_{-1}^{1} exp(-y^2/mu) dy at mu = 0.01, from an independent high-precision quadrature.
  const double oracle = 0.0173022015;
  CHECK(std::abs(eval_at("gauss_well", 0.0, 0.01, 3).value - oracle) <= 1e-8);
  CHECK(std::abs(eval_at("gauss_well", 0.0, 0.01, 3).value - eval_at("gauss_well", 0.0, 0.01, 4).value) <= 1e-6);
}

TEST_CASE("constant integrand is exact at every level") {
  for (int level = 0; level <= 4; ++level) {
    for (double mu : {0.2, 0.02}) {
      CHECK(std::abs(eval_at("sign_flip", 0.0, mu, level).value + mu * std::log(2.0)) <= 1e-9);
    }
  }
}

TEST_CASE("sign_flip at x = 0.5, mu = 1e-3") {
  // Exact integral: -mu ln((mu/x)(e^{x/mu} - e^{-x/mu})).
  const double mu = 1e-3;
  const double exact = -0.5 - mu * std::log(mu / 0.5) - mu * std::log1p(-std::exp(-1.0 / mu));
  CHECK(exact == doctest::Approx(-0.493785391901578).epsilon(1e-12));
  const EntropicEval e = eval_at("sign_flip", 0.5, mu, 4);
  CHECK(std::abs(e.value - exact) <= 1e-8);
  const double bound = mu * (std::abs(std::log(mu)) + std::log(2.0) + 1.0);
  CHECK(std::abs(e.value + 0.5) <= bound);
  CHECK(std::abs(e.gradient(0) + 1.0) <= 1e-2);
}

TEST_CASE("gradient examples") {
  CHECK(std::abs(eval_at("sign_flip", 0.0, 0.05, 3).gradient(0)) <= 1e-12);
  CHECK(eval_at("gauss_well", 0.4, 0.05, 3).gradient(0) == 0.0);
  const ProblemInstance p = make_builtin("sign_flip");
  const QuadratureGrid grid = build_grid(p.Y, 3);
  CHECK(entropic_grad(p, v1(0.3), 0.05, grid)(0) == entropic_value(p, v1(0.3), 0.05, grid).gradient(0));
}

TEST_CASE("alpha is a probability density and the value is bracketed") {
  for (const auto& name : builtin_names()) {
    const ProblemInstance p = make_builtin(name);
    for (double mu : {0.1, 0.01, 1e-3, 1e-6}) {
      const QuadratureGrid grid = build_grid(entropic_box(p, mu, {}), 3);
      const Vec x = p.X.project(v1(0.3));
      const EntropicEval e = entropic_value(p, x, mu, grid);
      CAPTURE(name);
      CAPTURE(mu);
      CHECK(std::isfinite(e.value));
      CHECK(e.alpha.minCoeff() >= 0.0);
      CHECK(std::abs(grid.weights.dot(e.alpha) - 1.0) <= 1e-10);
      const double m0 = e.stabilizer;
      CHECK(e.value >= m0 - mu * std::log(grid.box.volume()) - 1e-12);
      CHECK(e.value <= m0 - mu * std::log(grid.weights.minCoeff()) + 1e-12);
    }
  }
}

TEST_CASE("quadrature refinement: level 3 and 4 agree for smooth integrands") {
  const std::vector<std::pair<std::string, double>> cases = {
      {"gauss_well", 0.1}, {"gauss_well", 0.01}, {"gauss_well", 0.001}, {"sign_flip", 0.1},
      {"sign_flip", 0.01}, {"sign_flip", 0.001}, {"toy_bilevel", 0.1}, {"toy_bilevel", 0.01}};
  for (const auto& [name, mu] : cases) {
    const ProblemInstance p = make_builtin(name);
    for (double t : {0.2, 0.5, 0.9}) {
      const Vec x = p.X.lower() + (p.X.upper() - p.X.lower()) * t;
      const double v3 = entropic_value(p, x, mu, build_grid(p.Y, 3)).value;
      const double v4 = entropic_value(p, x, mu, build_grid(p.Y, 4)).value;
      CAPTURE(name);
      CAPTURE(mu);
      CAPTURE(t);
      CHECK(std::abs(v4 - v3) <= 1e-6);
    }
  }
}

TEST_CASE("quadrature refinement converges slowly across kinks") {
  // Huber-smoothed integrands are only C^1, so Gauss-Legendre converges
  // algebraically; the level-6 step is still far smaller than the level-3 one.
  for (const std::string name : {"abs_track", "lasso_hyper"}) {
    const ProblemInstance p = make_builtin(name);
    for (double mu : {0.1, 0.01, 0.001}) {
      for (double t : {0.2, 0.5, 0.9}) {
        const Vec x = p.X.lower() + (p.X.upper() - p.X.lower()) * t;
        double v[7];
        for (int l : {2, 3, 5, 6}) v[l] = entropic_value(p, x, mu, build_grid(p.Y, l)).value;
        CAPTURE(name);
        CAPTURE(mu);
        CAPTURE(t);
        CHECK(std::abs(v[6] - v[5]) < std::abs(v[3] - v[2]));
      }
    }
  }
}

TEST_CASE("smoothing convergence bound on sign_flip and gauss_well") {
  for (const std::string name : {"sign_flip", "gauss_well"}) {
    const ProblemInstance p = make_builtin(name);
    for (double mu : {0.1, 0.01, 0.001}) {
      const QuadratureGrid grid = build_grid(p.Y, 4);
      for (int i = 0; i <= 20; ++i) {
        const Vec x = p.X.lower() + (p.X.upper() - p.X.lower()) * (i / 20.0);
        const double err = std::abs(entropic_value(p, x, mu, grid).value - p.v_exact(x));
        CAPTURE(name);
        CAPTURE(mu);
        CAPTURE(x(0));
        CHECK(err <= mu * (std::abs(std::log(mu)) + std::log(p.Y.volume()) + 1.0));
      }
    }
  }
}

TEST_CASE("alpha mass concentrates at the unique minimizer") {
  double prev = 1.0;
  for (int k = 1; k <= 3; ++k) {
    const double mu = std::pow(10.0, -k);
    const ProblemInstance p = make_builtin("sign_flip");
    const QuadratureGrid grid = build_grid(p.Y, 4);
    const EntropicEval e = entropic_value(p, v1(0.5), mu, grid);
    const double mass = alpha_mass(e, grid, [](const Vec& y) { return y(0) > -0.5; });
    CHECK(mass < prev);
    prev = mass;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("gradient lies in the hull of node gradients") {
  for (const auto& name : builtin_names()) {
    const ProblemInstance p = make_builtin(name);
    for (double mu : {0.1, 0.01}) {
      const QuadratureGrid grid = build_grid(entropic_box(p, mu, {}), 3);
      const Vec x = p.X.project(v1(0.45));
      const EntropicEval e = entropic_value(p, x, mu, grid);
      double lo = INFINITY;
      double hi = -INFINITY;
      for (Eigen::Index j = 0; j < grid.size(); ++j) {
        const double gx = smooth_lower(p, x, grid.nodes.col(j), mu).grad_x(0);
        lo = std::min(lo, gx);
        hi = std::max(hi, gx);
      }
      CAPTURE(name);
      CHECK(e.gradient(0) >= lo - 1e-10);
      CHECK(e.gradient(0) <= hi + 1e-10);
    }
  }
}

TEST_CASE("gradient identity against finite differences") {
  for (const auto& name : builtin_names()) {
    const ProblemInstance p = make_builtin(name);
    for (double mu : {0.1, 0.01}) {
      for (double t : {0.3, 0.65}) {
        const Vec x = p.X.lower() + (p.X.upper() - p.X.lower()) * t;
        CAPTURE(name);
        CAPTURE(mu);
        CHECK(fd_check(SmootherKind::kEntropic, p, x, mu) <= 1e-5);
      }
    }
  }
  CHECK(fd_check(SmootherKind::kEntropic, make_builtin("gauss_well"), v1(0.2), 0.05) <= 1e-12);
}

TEST_CASE("growing_set") {
  CHECK(growing_set(BoxSet::whole(1), 0.01, 1.0) == BoxSet::interval(-50, 50));
  CHECK(growing_set(BoxSet::interval(-1, 1), 0.5, 1.0) == BoxSet::interval(-1, 1));
  const BoxSet g = growing_set(BoxSet::whole(1), 0.01, 1.0);
  CHECK(0.01 * std::log(g.volume()) == doctest::Approx(0.04605170186).epsilon(1e-10));
  double prev = INFINITY;
  for (int k = 1; k <= 20; ++k) {
    const double mu = std::ldexp(1.0, -k);
    const BoxSet a = growing_set(BoxSet::whole(2), mu, 1.0);
    const BoxSet b = growing_set(BoxSet::whole(2), mu / 2, 1.0);
    CHECK(b.intersect(a) == a);
    const double s = mu * std::log(a.volume());
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("entropic threshold") {
  const BoxSet sq = BoxSet::cube(2, -1, 1);
  EntropicThreshold t = ennamcq_entropic_threshold(sq, 0.05, 0.1);
  CHECK(t.holds);
  CHECK(std::abs(t.margin - 0.030685281944005) <= 1e-12);
  CHECK_FALSE(ennamcq_entropic_threshold(sq, 0.08, 0.1).holds);
  CHECK(ennamcq_entropic_threshold(BoxSet::interval(-0.5, 0.5), 10.0, 1e-9).holds);
  try {
    ennamcq_entropic_threshold(BoxSet::whole(1), 0.1, 0.1);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("growing_set") != std::string::npos);
  }
}

TEST_CASE("summation order is reproducible") {
  const EntropicEval a = eval_at("lasso_hyper", 0.8, 0.01, 3);
  const EntropicEval b = eval_at("lasso_hyper", 0.8, 0.01, 3);
  CHECK(a.value == b.value);
  CHECK(a.gradient == b.gradient);
}
