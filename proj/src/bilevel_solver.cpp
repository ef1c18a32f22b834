#include "vfsmooth/bilevel_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "csv_format.hpp"
#include "vfsmooth/smoothing_kernels.hpp"

namespace vfsmooth {

namespace {

BoxSet product_box(const BoxSet& X, const BoxSet& Y) {
  Vec lo(X.dim() + Y.dim());
  Vec hi(X.dim() + Y.dim());
  lo << X.lower(), Y.lower();
  hi << X.upper(), Y.upper();
  return {lo, hi};
}

Vec stack(const Vec& a, const Vec& b) {
  Vec z(a.size() + b.size());
  z << a, b;
  return z;
}

// Constraint c(x, y) = g_mu(x, y) - v_mu(x) - eps and its gradient.
struct ConstraintEval {
  double f = 0.0;
  Vec grad_f;
  double c = 0.0;
  Vec grad_c;
};

class SmoothedProblem {
 public:
  SmoothedProblem(const ProblemInstance& p, SmootherKind kind, const SmootherParams& params,
                  double mu, double eps)
      : p_(p), kind_(kind), params_(params), mu_(mu), eps_(eps) {}

  ConstraintEval eval(const Vec& z) {
    const Vec x = z.head(p_.n);
    const Vec y = z.tail(p_.m);
    const PartialEval f = p_.upper(x, y);
    const PartialEval g = smooth_lower(p_, x, y, mu_);
    const SmoothedValue v = evaluate_smoother(kind_, p_, x, mu_, params_);
    ++evaluations_;
    return {f.value, stack(f.grad_x, f.grad_y), g.value - v.value - eps_,
            stack(g.grad_x - v.gradient, g.grad_y)};
  }

  long evaluations() const { return evaluations_; }

 private:
  const ProblemInstance& p_;
  SmootherKind kind_;
  const SmootherParams& params_;
  double mu_;
  double eps_;
  long evaluations_ = 0;
};

struct LagrangianEval {
  double value = 0.0;
  Vec grad;
  ConstraintEval base;
};

LagrangianEval lagrangian(SmoothedProblem& prob, const Vec& z, double lambda, double rho) {
  ConstraintEval e = prob.eval(z);
  const double t = std::max(0.0, lambda + rho * e.c);
  LagrangianEval out;
  out.value = e.f + (t * t - lambda * lambda) / (2.0 * rho);
  out.grad = e.grad_f + t * e.grad_c;
  out.base = std::move(e);
  return out;
}

// Projected gradient with Barzilai-Borwein trial steps and Armijo backtracking.
Vec minimize_lagrangian(SmoothedProblem& prob, const BoxSet& box, Vec z, double lambda, double rho,
                        double tol, int max_iter) {
  LagrangianEval cur = lagrangian(prob, z, lambda, rho);
  double step = 1.0 / (1.0 + cur.grad.norm());
  for (int it = 0; it < max_iter; ++it) {
    if (box.normal_cone_distance(z, -cur.grad) <= tol) break;
    bool moved = false;
    LagrangianEval next;
    Vec trial;
    for (int bt = 0; bt < 60; ++bt) {
      trial = box.project(z - step * cur.grad);
      const Vec d = trial - z;
      if (d.squaredNorm() == 0.0) break;
      next = lagrangian(prob, trial, lambda, rho);
      if (next.value <= cur.value + 1e-4 * cur.grad.dot(d)) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    const Vec s = trial - z;
    const Vec r = next.grad - cur.grad;
    const double sr = s.dot(r);
    step = sr > 0.0 ? std::clamp(s.squaredNorm() / sr, 1e-12, 1e6) : std::min(2.0 * step, 1e6);
    z = std::move(trial);
    cur = std::move(next);
  }
  return z;
}

KKTResidual residual_from(const BoxSet& box, const Vec& z, const ConstraintEval& e, double lambda) {
  KKTResidual r;
  r.multiplier = lambda;
  r.slack = e.c;
  r.stationarity = box.normal_cone_distance(z, -(e.grad_f + lambda * e.grad_c));
  r.feasibility = std::max(e.c, 0.0);
  r.complementarity = std::abs(lambda * e.c);
  return r;
}

void check_point(const ProblemInstance& p, const Vec& x, const Vec& y) {
  if (x.size() != p.n || y.size() != p.m || !p.X.contains(x) || !p.Y.contains(y)) {
    throw std::invalid_argument("point outside X x Y");
  }
}

}  // namespace

KKTResidual kkt_residual(const ProblemInstance& p, const Vec& x, const Vec& y, double lambda,
                         double mu, double eps, SmootherKind kind, const SmootherParams& params) {
  check_point(p, x, y);
  if (lambda < 0.0) throw std::invalid_argument("multiplier must be nonnegative");
  SmoothedProblem prob(p, kind, params, mu, eps);
  const Vec z = stack(x, y);
  return residual_from(product_box(p.X, p.Y), z, prob.eval(z), lambda);
}

SolveResult solve_vfp(const ProblemInstance& p, const SolveOptions& o, const Vec& x0, const Vec& y0) {
  if (!(o.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(o.mu0 > 0.0 && o.mu0 <= 1.0)) throw std::invalid_argument("mu0 must lie in (0, 1]");
  if (!(o.theta > 0.0 && o.theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
  if (o.K < 0) throw std::invalid_argument("K must be nonnegative");
  require_applicable(o.smoother, p);

  std::vector<double> mus;
  for (int k = 0; k <= o.K; ++k) mus.push_back(o.mu0 * std::pow(o.theta, k));

  if (o.smoother == SmootherKind::kEntropic) {
    for (double mu : mus) {
      const BoxSet box = entropic_box(p, mu, o.params.entropic);
      const EntropicThreshold th = ennamcq_entropic_threshold(box, mu, o.eps);
      if (!th.holds) {
        const double bound = o.eps / std::log(box.volume());
        std::ostringstream msg;
        msg << "volume threshold mu ln vol(Y) < eps fails at mu_k = " << detail::num(mu)
            << "; need mu < eps / ln vol(Y) = " << fmt::format("{:.6f}", bound);
        throw ThresholdError(msg.str(), mu, bound);
      }
    }
  }

  const BoxSet box = product_box(p.X, p.Y);
  Vec z = stack(x0.size() == p.n ? x0 : p.X.project(Vec::Zero(p.n)),
                y0.size() == p.m ? y0 : p.Y.project(Vec::Zero(p.m)));
  z = box.project(z);

  SolveResult result;
  double lambda = 0.0;
  double rho = o.penalty0;
  for (int k = 0; k <= o.K; ++k) {
    const double mu = mus[k];
    const double tol = o.tol_scale * mu;
    const double feas_target = k == o.K ? std::min(tol, o.final_feasibility) : tol;
    SmoothedProblem prob(p, o.smoother, o.params, mu, o.eps);

    KKTResidual res;
    double prev_feas = std::numeric_limits<double>::infinity();
    int updates = 0;
    for (;; ++updates) {
      if (updates >= o.max_multiplier_updates) {
        std::ostringstream msg;
        msg << "multiplier loop did not converge at mu_k = " << detail::num(mu);
        throw PenaltyDivergence(msg.str(), result.trace);
      }
      z = minimize_lagrangian(prob, box, z, lambda, rho, 0.5 * tol, o.max_inner_iterations);
      const ConstraintEval e = prob.eval(z);
      lambda = std::max(0.0, lambda + rho * e.c);
      res = residual_from(box, z, e, lambda);
      if (res.stationarity <= tol && res.feasibility <= feas_target && res.complementarity <= tol) break;
      if (res.feasibility > 0.25 * prev_feas) {
        rho *= 10.0;
        if (rho > o.penalty_max) {
          std::ostringstream msg;
          msg << "penalty parameter exceeded " << detail::num(o.penalty_max) << " at mu_k = " << detail::num(mu);
          throw PenaltyDivergence(msg.str(), result.trace);
        }
      }
      prev_feas = res.feasibility;
    }

    if (lambda > o.lambda_cap) result.trace.lambda_cap_hit = true;
    TraceRow row;
    row.k = k;
    row.mu = mu;
    row.x = z.head(p.n);
    row.y = z.tail(p.m);
    row.lambda = lambda;
    row.residual = res;
    row.tol_stationarity = tol;
    row.tol_feasibility = tol;
    row.tol_complementarity = tol;
    row.penalty = rho;
    row.multiplier_updates = updates + 1;
    row.smoother_evaluations = prob.evaluations();
    result.trace.rows.push_back(std::move(row));
  }

  result.x = z.head(p.n);
  result.y = z.tail(p.m);
  result.lambda = lambda;
  return result;
}

StationarityReport limit_stationarity_check(const ProblemInstance& p, const Vec& x, const Vec& y,
                                            double lambda, double eps, double tol,
                                            const HullOptions& hull_options) {
  if (lambda < 0.0) throw std::invalid_argument("multiplier must be nonnegative");
  check_point(p, x, y);
  if (!p.upper) throw std::invalid_argument("limit_stationarity_check: missing upper-level oracle");

  const PartialEval f = p.upper(x, y);
  const Vec grad_f = stack(f.grad_x, f.grad_y);

  HullSet dg{p.joint_generators(x, y)};
  // Prefer the closed-form subdifferential; the grid hull is off by the grid spacing.
  const HullSet dv = p.dv_exact ? p.dv_exact(x) : danskin_hull(p, x, hull_options).hull;

  // grad f + lam * dg - lam * (dv, 0)
  HullSet combined;
  for (const auto& a : dg.generators) {
    for (const auto& b : dv.generators) {
      combined.generators.push_back(grad_f + lambda * (a - stack(b, Vec::Zero(p.m))));
    }
  }

  // The normal cone enters as a bounded polytope: rays truncated at a radius
  // that exceeds any component the nearest point can need.
  const BoxSet box = product_box(p.X, p.Y);
  const Vec z = stack(x, y);
  double radius = 1.0;
  for (const auto& g : combined.generators) radius = std::max(radius, 2.0 * g.norm() + 1.0);
  HullSet cone{{Vec::Zero(z.size())}};
  for (int i = 0; i < z.size(); ++i) {
    std::vector<double> dirs;
    if (z(i) <= box.lower()(i)) dirs.push_back(-radius);
    if (z(i) >= box.upper()(i)) dirs.push_back(radius);
    if (dirs.empty()) continue;
    std::vector<Vec> grown = cone.generators;
    for (const auto& g : cone.generators) {
      for (double d : dirs) {
        Vec e = g;
        e(i) += d;
        grown.push_back(e);
      }
    }
    cone.generators = std::move(grown);
  }

  StationarityReport r;
  r.tolerance = tol;
  r.stationarity = hull_distance(Vec::Zero(z.size()), minkowski_sum(combined, cone));
  const double v = p.v_exact ? p.v_exact(x) : brute_force_value(p, x, 4001);
  const double slack = p.lower(x, y) - v - eps;
  r.feasibility = std::max(slack, 0.0);
  r.complementarity = std::abs(lambda * slack);
  r.pass = r.stationarity <= tol && r.feasibility <= tol && r.complementarity <= tol;

  std::ostringstream msg;
  msg << (r.pass ? "stationary" : "not stationary") << ": stationarity " << detail::num(r.stationarity)
      << ", feasibility violation " << detail::num(r.feasibility) << ", complementarity "
      << detail::num(r.complementarity) << " (tol " << detail::num(tol) << ")";
  r.message = msg.str();
  return r;
}

std::string to_csv(const SolverTrace& trace) {
  std::string out =
      "k,mu,x,y,lambda,stationarity,feasibility,complementarity,tol_stationarity,"
      "tol_feasibility,tol_complementarity,penalty,multiplier_updates,smoother_evaluations\n";
  for (const auto& r : trace.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.k, detail::num(r.mu),
                       detail::vec(r.x), detail::vec(r.y), detail::num(r.lambda),
                       detail::num(r.residual.stationarity), detail::num(r.residual.feasibility),
                       detail::num(r.residual.complementarity), detail::num(r.tol_stationarity),
                       detail::num(r.tol_feasibility), detail::num(r.tol_complementarity),
                       detail::num(r.penalty), r.multiplier_updates, r.smoother_evaluations);
  }
  return out;
}

nlohmann::json summary_json(const SolveResult& result, const StationarityReport& limit) {
  nlohmann::json j;
  j["x"] = detail::vec_json(result.x);
  j["y"] = detail::vec_json(result.y);
  j["lambda"] = result.lambda;
  if (!result.trace.rows.empty()) {
    const auto& last = result.trace.rows.back();
    j["mu_final"] = last.mu;
    j["residuals"] = {{"stationarity", last.residual.stationarity},
                      {"feasibility", last.residual.feasibility},
                      {"complementarity", last.residual.complementarity}};
    j["rows"] = result.trace.rows.size();
  }
  j["lambda_cap_hit"] = result.trace.lambda_cap_hit;
  if (result.trace.lambda_cap_hit) j["warning"] = "possible ENNAMCQ failure at the limit";
  j["limit_stationarity"] = {{"stationarity", limit.stationarity},
                             {"feasibility", limit.feasibility},
                             {"complementarity", limit.complementarity},
                             {"tolerance", limit.tolerance},
                             {"verdict", limit.pass ? "pass" : "fail"}};
  return j;
}

}  // namespace vfsmooth
