#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfsmooth/consistency_lab.hpp"
#include "vfsmooth/problems.hpp"
#include "vfsmooth/smoother.hpp"

namespace vfsmooth {

/// Residuals of the approximate KKT system of
///   min f_mu(x, y)  s.t.  g_mu(x, y) - v_mu(x) <= eps,  (x, y) in X x Y.
struct KKTResidual {
  double stationarity = 0.0;     // dist(-grad f - lam grad g + lam (grad v, 0), N_{XxY})
  double feasibility = 0.0;      // max(g_mu - v_mu - eps, 0)
  double complementarity = 0.0;  // |lam (g_mu - v_mu - eps)|
  double multiplier = 0.0;
  double slack = 0.0;            // g_mu - v_mu - eps
};

KKTResidual kkt_residual(const ProblemInstance& p, const Vec& x, const Vec& y, double lambda,
                         double mu, double eps, SmootherKind kind, const SmootherParams& params = {});

struct TraceRow {
  int k = 0;
  double mu = 0.0;
  Vec x;
  Vec y;
  double lambda = 0.0;
  KKTResidual residual;
  double tol_stationarity = 0.0;  // eps_{k,1}
  double tol_feasibility = 0.0;   // eps_{k,2}
  double tol_complementarity = 0.0;  // eps_{k,3}
  double penalty = 0.0;           // augmented-Lagrangian rho at exit
  int multiplier_updates = 0;
  long smoother_evaluations = 0;
};

struct SolverTrace {
  std::vector<TraceRow> rows;
  bool lambda_cap_hit = false;
};

struct SolveOptions {
  SmootherKind smoother = SmootherKind::kQuad;
  double eps = 0.01;
  double mu0 = 0.5;
  double theta = 0.5;
  int K = 12;                      // rows k = 0..K
  double tol_scale = 1.0;          // eps_{k,i} = tol_scale * mu_k
  double final_feasibility = 1e-9;  // enforced on the last row
  double penalty0 = 10.0;
  double penalty_max = 1e10;
  double lambda_cap = 1e6;
  int max_multiplier_updates = 200;
  int max_inner_iterations = 20000;
  SmootherParams params;
};

struct SolveResult {
  Vec x;
  Vec y;
  double lambda = 0.0;
  SolverTrace trace;
};

/// The entropic volume threshold fails at some mu_k.
class ThresholdError : public std::runtime_error {
 public:
  ThresholdError(const std::string& what, double mu, double bound)
      : std::runtime_error(what), mu_(mu), bound_(bound) {}
  double mu() const { return mu_; }
  double bound() const { return bound_; }  // eps / ln vol

 private:
  double mu_;
  double bound_;
};

/// Penalty parameter exceeded its cap; carries the trace so far.
class PenaltyDivergence : public std::runtime_error {
 public:
  PenaltyDivergence(const std::string& what, SolverTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const SolverTrace& trace() const { return trace_; }

 private:
  SolverTrace trace_;
};

/// Follows mu_k = mu0 theta^k, solving each smoothed problem by an augmented
/// Lagrangian loop with projected-gradient inner solves, warm-started across k.
SolveResult solve_vfp(const ProblemInstance& p, const SolveOptions& options,
                      const Vec& x0 = Vec(), const Vec& y0 = Vec());

struct StationarityReport {
  double stationarity = 0.0;  // dist(0, grad f + lam dg - lam (dv, 0) + N)
  double feasibility = 0.0;   // max(g - v - eps, 0)
  double complementarity = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string message;
};

/// Checks the nonsmooth stationarity inclusion of the unsmoothed problem at
/// (x, y) using Clarke generators for g and the Danskin hull for v.
StationarityReport limit_stationarity_check(const ProblemInstance& p, const Vec& x, const Vec& y,
                                            double lambda, double eps, double tol,
                                            const HullOptions& hull = {});

std::string to_csv(const SolverTrace& trace);
nlohmann::json summary_json(const SolveResult& result, const StationarityReport& limit);

}  // namespace vfsmooth
