#include "vfsmooth/consistency_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "csv_format.hpp"

namespace vfsmooth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

HullSource source_from_flags(const ProblemFlags& f) {
  if (f.smooth_in_x) return HullSource::kDanskinSmooth;
  if (f.weakly_concave_in_x) return HullSource::kDanskinConcave;
  if (f.convex_joint && f.partial_formula_holds) return HullSource::kDanskinConvex;
  return HullSource::kLemmaLevel;
}

double exact_or_brute_value(const ProblemInstance& p, const Vec& x, int resolution) {
  return p.v_exact ? p.v_exact(x) : brute_force_value(p, x, resolution);
}

}  // namespace

std::string to_string(HullSource source) {
  switch (source) {
    case HullSource::kDanskinSmooth:
      return "danskin_smooth";
    case HullSource::kDanskinConcave:
      return "danskin_concave";
    case HullSource::kDanskinConvex:
      return "danskin_convex";
    case HullSource::kLemmaLevel:
      break;
  }
  return "lemma_level";
}

DanskinHull danskin_hull(const ProblemInstance& p, const Vec& anchor, const HullOptions& options) {
  DanskinHull out;
  out.source = source_from_flags(p.flags);
  out.argmin = brute_force_argmin(p, anchor, options.resolution, options.delta);
  for (const auto& y : out.argmin.points) {
    for (auto& g : p.dx_generators(anchor, y)) out.hull.generators.push_back(std::move(g));
  }
  if (out.hull.empty()) throw std::runtime_error("danskin_hull: no generators for " + p.name);
  return out;
}

void ProbeSchedule::validate() const {
  if (points.size() != mus.size() || points.empty()) {
    throw std::invalid_argument("probe schedule: points and mus must be non-empty and equal length");
  }
  double prev_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mus.size(); ++k) {
    if (!(mus[k] > 0.0)) throw std::invalid_argument("probe schedule: mu must be positive");
    if (k > 0 && !(mus[k] < mus[k - 1])) {
      throw std::invalid_argument("probe schedule: mu must be strictly decreasing");
    }
    if (points[k].size() != anchor.size()) throw std::invalid_argument("probe schedule: dimension mismatch");
    const double d = (points[k] - anchor).norm();
    if (d > prev_dist) throw std::invalid_argument("probe schedule: ||x_k - anchor|| must not increase");
    prev_dist = d;
  }
}

ProbeSchedule radial_schedule(const Vec& anchor, const Vec& direction, int first, int last) {
  ProbeSchedule s{anchor, {}, {}};
  for (int k = first; k <= last; ++k) {
    const double scale = std::ldexp(1.0, -k);
    s.points.push_back(anchor + scale * direction);
    s.mus.push_back(scale);
  }
  return s;
}

std::vector<double> ConsistencyReport::distances() const {
  std::vector<double> d;
  d.reserve(rows.size());
  for (const auto& r : rows) d.push_back(r.distance);
  return d;
}

std::string ConsistencyReport::certifies() const {
  return hull.source == HullSource::kLemmaLevel ? "danskin set" : "subdifferential";
}

ConsistencyReport consistency_probe(SmootherKind kind, const ProblemInstance& p,
                                    const ProbeSchedule& schedule, const ProbeParams& params) {
  require_applicable(kind, p);
  schedule.validate();

  ConsistencyReport r;
  r.problem = p.name;
  r.smoother = kind;
  r.anchor = schedule.anchor;
  r.hull = danskin_hull(p, schedule.anchor, params.hull);
  r.tolerance = params.tolerance;

  for (std::size_t k = 0; k < schedule.mus.size(); ++k) {
    const SmoothedValue sv = evaluate_smoother(kind, p, schedule.points[k], schedule.mus[k], params.smoother);
    ProbeRow row{schedule.points[k], schedule.mus[k], sv.gradient, hull_distance(sv.gradient, r.hull.hull)};
    r.max_gradient_norm = std::max(r.max_gradient_norm, sv.gradient.norm());
    r.rows.push_back(std::move(row));
  }
  const auto tail = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(params.tail_fraction * static_cast<double>(r.rows.size()))), 1,
      r.rows.size());
  for (std::size_t k = r.rows.size() - tail; k < r.rows.size(); ++k) {
    r.tail_distance = std::max(r.tail_distance, r.rows[k].distance);
  }
  r.bounded = r.max_gradient_norm <= p.lipschitz_x + 1.0;
  r.pass = r.tail_distance <= params.tolerance;
  return r;
}

double fd_check(SmootherKind kind, const ProblemInstance& p, const Vec& x, double mu, double h,
                const SmootherParams& params) {
  const double step = h > 0.0 ? h : mu / 1000.0;
  const Vec grad = evaluate_smoother(kind, p, x, mu, params).gradient;
  double worst = 0.0;
  for (int i = 0; i < p.n; ++i) {
    auto at = [&](double offset) {
      Vec xs = x;
      xs(i) += offset;
      return evaluate_smoother(kind, p, xs, mu, params).value;
    };
    // Fourth-order central stencil. Huber terms make v_mu only C^{1,1}, so a
    // kink inside the stencil costs O(h); the small default step keeps that rare.
    const double cd = (8.0 * (at(step) - at(-step)) - (at(2 * step) - at(-2 * step))) / (12.0 * step);
    worst = std::max(worst, std::abs(cd - grad(i)) / (1.0 + std::abs(grad(i))));
  }
  return worst;
}

ScanTable smoothing_error_scan(SmootherKind kind, const ProblemInstance& p,
                               const std::vector<Vec>& x_grid, const std::vector<double>& mus,
                               const ScanOptions& options) {
  require_applicable(kind, p);
  ScanTable table;
  table.smoother = kind;
  table.problem = p.name;
  table.level = options.smoother.entropic.level;

  for (const auto& x : x_grid) {
    const double exact = exact_or_brute_value(p, x, options.brute_force_resolution);
    const ArgminSet argmin = p.S_exact ? p.S_exact(x) : brute_force_argmin(p, x, options.brute_force_resolution);
    const std::size_t first_row = table.rows.size();
    for (double mu : mus) {
      ScanRow row;
      row.x = x;
      row.mu = mu;
      row.exact = exact;
      row.alpha_tail_mass = kNaN;
      if (kind == SmootherKind::kQuad) {
        const QuadEval q = quad_evaluate(p, x, mu, options.smoother.inner);
        row.value = q.value;
        row.gradient = q.gradient;
        row.work = q.inner.iterations;
      } else {
        const QuadratureGrid grid =
            build_grid(entropic_box(p, mu, options.smoother.entropic), options.smoother.entropic.level);
        const EntropicEval e = entropic_value(p, x, mu, grid);
        row.value = e.value;
        row.gradient = e.gradient;
        row.work = static_cast<int>(grid.size());
        // For m = 1 the argmin points are treated as spanning an interval.
        row.alpha_tail_mass = alpha_mass(e, grid, [&](const Vec& y) {
          if (p.m == 1) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& s : argmin.points) {
              lo = std::min(lo, s(0));
              hi = std::max(hi, s(0));
            }
            return y(0) < lo - options.tail_radius || y(0) > hi + options.tail_radius;
          }
          double d = std::numeric_limits<double>::infinity();
          for (const auto& s : argmin.points) d = std::min(d, (y - s).norm());
          return d > options.tail_radius;
        });
      }
      row.error = std::abs(row.value - row.exact);
      row.fd_error = mu >= 1e-3 ? fd_check(kind, p, x, mu, -1.0, options.smoother) : kNaN;
      table.rows.push_back(std::move(row));
    }

    // Error must not grow as mu shrinks.
    std::vector<const ScanRow*> by_mu;
    for (std::size_t i = first_row; i < table.rows.size(); ++i) by_mu.push_back(&table.rows[i]);
    std::stable_sort(by_mu.begin(), by_mu.end(), [](const ScanRow* a, const ScanRow* b) { return a->mu > b->mu; });
    for (std::size_t i = 1; i < by_mu.size(); ++i) {
      if (by_mu[i]->error > by_mu[i - 1]->error + options.monotone_slack) {
        table.monotone = false;
        std::ostringstream msg;
        msg << "x=" << detail::vec(x) << " mu=" << detail::num(by_mu[i]->mu)
            << " error=" << detail::num(by_mu[i]->error) << " exceeds error "
            << detail::num(by_mu[i - 1]->error) << " at mu=" << detail::num(by_mu[i - 1]->mu);
        table.violations.push_back(msg.str());
      }
    }
  }
  return table;
}

nlohmann::json to_json(const ConsistencyReport& report) {
  nlohmann::json schedule = nlohmann::json::array();
  nlohmann::json distances = nlohmann::json::array();
  for (const auto& r : report.rows) {
    schedule.push_back({{"x", detail::vec_json(r.x)}, {"mu", r.mu}});
    distances.push_back(r.distance);
  }
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : report.hull.hull.generators) gens.push_back(detail::vec_json(g));
  return {
      {"problem", report.problem},
      {"smoother", to_string(report.smoother)},
      {"anchor", detail::vec_json(report.anchor)},
      {"schedule", schedule},
      {"distances", distances},
      {"tail_distance", report.tail_distance},
      {"tolerance", report.tolerance},
      {"verdict", report.pass ? "pass" : "fail"},
      {"hull_source", to_string(report.hull.source)},
      {"certifies", report.certifies()},
      {"hull_generators", gens},
      {"max_gradient_norm", report.max_gradient_norm},
      {"gradients_bounded", report.bounded},
  };
}

std::string to_csv(const ConsistencyReport& report) {
  std::string out = "k,x,mu,gradient,distance\n";
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const auto& r = report.rows[k];
    out += fmt::format("{},{},{},{},{}\n", k, detail::vec(r.x), detail::num(r.mu), detail::vec(r.gradient),
                       detail::num(r.distance));
  }
  return out;
}

std::string to_csv(const ScanTable& table) {
  std::string out;
  if (table.smoother == SmootherKind::kQuad) {
    out = "x,mu,v_mu,v,error,grad,grad_norm,fd_error,inner_iterations\n";
    for (const auto& r : table.rows) {
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", detail::vec(r.x), detail::num(r.mu),
                         detail::num(r.value), detail::num(r.exact), detail::num(r.error),
                         detail::vec(r.gradient), detail::num(r.gradient.norm()), detail::num(r.fd_error),
                         r.work);
    }
  } else {
    out = "x,mu,level,v_mu,v,error,grad,fd_error,alpha_tail_mass\n";
    for (const auto& r : table.rows) {
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", detail::vec(r.x), detail::num(r.mu),
                         table.level, detail::num(r.value), detail::num(r.exact), detail::num(r.error),
                         detail::vec(r.gradient), detail::num(r.fd_error), detail::num(r.alpha_tail_mass));
    }
  }
  return out;
}

}  // namespace vfsmooth
