#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "vfsmooth/problems.hpp"

namespace vfsmooth {

struct InnerSolveResult {
  Vec minimizer;
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // ||y - P_Y(y - grad_y)||
};

struct InnerSolveOptions {
  double tol = 1e-12;
  int max_iter = 200000;
  std::optional<Vec> warm_start;
};

/// Inner iteration cap reached; carries the best iterate found.
class InnerSolveError : public std::runtime_error {
 public:
  InnerSolveError(const std::string& what, InnerSolveResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const InnerSolveResult& best() const { return best_; }

 private:
  InnerSolveResult best_;
};

/// argmin over Y of g_mu(x, y) + (mu/2)||y||^2, by projected gradient with
/// backtracking. The effective tolerance is min(options.tol, mu^2).
///
/// Throws std::invalid_argument unless the instance is convex in y.
InnerSolveResult solve_inner(const ProblemInstance& p, const Vec& x, double mu,
                             const InnerSolveOptions& options = {});

/// v_mu(x) = min_{y in Y} g_mu(x, y) + (mu/2)||y||^2.
double quad_value(const ProblemInstance& p, const Vec& x, double mu,
                  const InnerSolveOptions& options = {});

/// grad v_mu(x) = grad_x g_mu(x, S_mu(x)).
Vec quad_grad(const ProblemInstance& p, const Vec& x, double mu,
              const InnerSolveOptions& options = {});

struct QuadEval {
  double value = 0.0;
  Vec gradient;
  InnerSolveResult inner;
};

/// Value and gradient from a single inner solve.
QuadEval quad_evaluate(const ProblemInstance& p, const Vec& x, double mu,
                       const InnerSolveOptions& options = {});

struct QuadEnnamcqReport {
  double slack = 0.0;  // g_mu(x, y) - v_mu(x) - eps
  bool active = false;
  double certificate = 0.0;  // eps + (mu/2)||S_mu(x)||^2 on the active branch
  bool in_scope = true;      // false when eps == 0
  std::string message;
};

/// Constraint-qualification diagnostic for g_mu - v_mu <= eps at (x, y).
QuadEnnamcqReport ennamcq_quad_diagnostic(const ProblemInstance& p, const Vec& x, const Vec& y,
                                          double mu, double eps);

}  // namespace vfsmooth
