#include "vfsmooth/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vfsmooth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Arguments within this band of a kink are treated as on the kink.
constexpr double kKinkTol = 1e-9;

Vec scalar(double v) { return Vec::Constant(1, v); }

std::vector<double> kernel_slopes(Kernel k, double a) {
  if (std::abs(a) <= kKinkTol) {
    return k == Kernel::kAbs ? std::vector<double>{-1.0, 1.0} : std::vector<double>{0.0, 1.0};
  }
  if (k == Kernel::kAbs) return {a > 0 ? 1.0 : -1.0};
  return {a > 0 ? 1.0 : 0.0};
}

double kernel_value(Kernel k, double a) { return k == Kernel::kAbs ? std::abs(a) : std::max(a, 0.0); }

// max over the box of |w(x)| for an affine weight.
double max_abs_weight(const NonsmoothTerm& t, const BoxSet& X) {
  double hi = t.weight_const;
  double lo = t.weight_const;
  for (int i = 0; i < t.weight_x.size(); ++i) {
    const double c = t.weight_x(i);
    if (c == 0.0) continue;
    const double a = c * X.lower()(i);
    const double b = c * X.upper()(i);
    hi += std::max(a, b);
    lo += std::min(a, b);
  }
  return std::max(std::abs(hi), std::abs(lo));
}

// Cartesian expansion of per-term slope choices into gradient generators.
std::vector<Vec> expand_generators(const ProblemInstance& p, const Vec& x, const Vec& y,
                                   bool joint) {
  const PartialEval s = p.lower_smooth(x, y);
  Vec base(joint ? p.n + p.m : p.n);
  if (joint) {
    base << s.grad_x, s.grad_y;
  } else {
    base = s.grad_x;
  }
  std::vector<Vec> gens{base};
  for (const auto& t : p.lower_terms) {
    const double a = t.argument(x, y);
    const double w = t.weight(x);
    const double phi = kernel_value(t.kernel, a);
    std::vector<Vec> next;
    for (double slope : kernel_slopes(t.kernel, a)) {
      Vec dir(base.size());
      if (joint) {
        dir << t.weight_x * phi + (w * slope) * t.arg_x, (w * slope) * t.arg_y;
      } else {
        dir = t.weight_x * phi + (w * slope) * t.arg_x;
      }
      for (const auto& g : gens) next.push_back(g + dir);
    }
    gens = std::move(next);
  }
  return gens;
}

PartialEval eval_scalar(double value, double gx, double gy) {
  return {value, scalar(gx), scalar(gy)};
}

ArgminSet single_point(double y) { return {{scalar(y)}, 0.0}; }
HullSet single_hull(double g) { return {{scalar(g)}}; }

ProblemInstance base_instance(std::string name, std::string description, BoxSet X, BoxSet Y) {
  ProblemInstance p;
  p.name = std::move(name);
  p.description = std::move(description);
  p.n = X.dim();
  p.m = Y.dim();
  p.X = std::move(X);
  p.Y = std::move(Y);
  p.upper = [](const Vec& x, const Vec& y) {
    return PartialEval{0.5 * (x.squaredNorm() + y.squaredNorm()), x, y};
  };
  return p;
}

ProblemInstance make_quad_conv() {
  auto p = base_instance("quad_conv", "g = (y - x)^2 on Y = R", BoxSet::interval(-5, 5),
                         BoxSet::whole(1));
  p.lower_smooth = [](const Vec& x, const Vec& y) {
    const double d = y(0) - x(0);
    return eval_scalar(d * d, -2 * d, 2 * d);
  };
  p.flags = {true, true, true, true, true};
  // S(x) = {x}; regularized minimizers lie between 0 and x.
  p.certified_box = [](const Vec& x) {
    return BoxSet::interval(std::min(x(0), 0.0) - 1.0, std::max(x(0), 0.0) + 1.0);
  };
  p.lipschitz_x = 2.0;
  p.lipschitz_y = 2.0;
  p.smooth_curvature_y = 2.0;
  p.v_exact = [](const Vec&) { return 0.0; };
  p.S_exact = [](const Vec& x) { return single_point(x(0)); };
  p.dv_exact = [](const Vec&) { return single_hull(0.0); };
  return p;
}

ProblemInstance make_gauss_well() {
  auto p = base_instance("gauss_well", "g = y^2 on Y = [-1, 1]", BoxSet::interval(-1, 1),
                         BoxSet::interval(-1, 1));
  p.lower_smooth = [](const Vec&, const Vec& y) { return eval_scalar(y(0) * y(0), 0.0, 2 * y(0)); };
  p.flags = {true, true, true, true, true};
  p.lipschitz_x = 0.0;
  p.lipschitz_y = 2.0;
  p.smooth_curvature_y = 2.0;
  p.v_exact = [](const Vec&) { return 0.0; };
  p.S_exact = [](const Vec&) { return single_point(0.0); };
  p.dv_exact = [](const Vec&) { return single_hull(0.0); };
  return p;
}

ProblemInstance make_sign_flip() {
  auto p = base_instance("sign_flip", "g = x y on Y = [-1, 1], v(x) = -|x|",
                         BoxSet::interval(-1, 1), BoxSet::interval(-1, 1));
  p.lower_smooth = [](const Vec& x, const Vec& y) {
    return eval_scalar(x(0) * y(0), y(0), x(0));
  };
  p.flags = {true, true, true, false, true};
  p.lipschitz_x = 1.0;
  p.lipschitz_y = 1.0;
  p.smooth_curvature_y = 0.0;
  p.v_exact = [](const Vec& x) { return -std::abs(x(0)); };
  p.S_exact = [](const Vec& x) -> ArgminSet {
    if (x(0) > 0) return single_point(-1.0);
    if (x(0) < 0) return single_point(1.0);
    return {{scalar(-1.0), scalar(1.0)}, 0.0};  // endpoints of [-1, 1]
  };
  p.dv_exact = [](const Vec& x) -> HullSet {
    if (x(0) > 0) return single_hull(-1.0);
    if (x(0) < 0) return single_hull(1.0);
    return {{scalar(-1.0), scalar(1.0)}};
  };
  return p;
}

ProblemInstance make_abs_track() {
  auto p = base_instance("abs_track", "g = |x - y| on Y = [-1, 1]", BoxSet::interval(-1, 1),
                         BoxSet::interval(-1, 1));
  p.lower_smooth = [](const Vec&, const Vec&) { return eval_scalar(0.0, 0.0, 0.0); };
  p.lower_terms.push_back({Kernel::kAbs, scalar(0.0), 1.0, scalar(1.0), scalar(-1.0), 0.0});
  // Jointly convex, but the partial differentiation formula fails at the kink.
  p.flags = {true, false, false, true, false};
  p.lipschitz_x = 1.0;
  p.lipschitz_y = 1.0;
  p.smooth_curvature_y = 0.0;
  p.v_exact = [](const Vec&) { return 0.0; };
  p.S_exact = [](const Vec& x) { return single_point(x(0)); };
  p.dv_exact = [](const Vec&) { return single_hull(0.0); };
  return p;
}

ProblemInstance make_lasso_hyper() {
  auto p = base_instance("lasso_hyper", "g = (y - 1)^2 + x |y| on Y = [-3, 3], X = [0, 2]",
                         BoxSet::interval(0, 2), BoxSet::interval(-3, 3));
  p.lower_smooth = [](const Vec&, const Vec& y) {
    const double d = y(0) - 1.0;
    return eval_scalar(d * d, 0.0, 2 * d);
  };
  p.lower_terms.push_back({Kernel::kAbs, scalar(1.0), 0.0, scalar(0.0), scalar(1.0), 0.0});
  // Convexity in y needs x >= 0, which X guarantees.
  p.flags = {true, true, true, false, false};
  p.lipschitz_x = 3.0;
  p.lipschitz_y = 10.0;
  p.smooth_curvature_y = 2.0;
  // Soft threshold: y* = max(1 - x/2, 0).
  p.v_exact = [](const Vec& x) { return x(0) >= 2.0 ? 1.0 : x(0) - 0.25 * x(0) * x(0); };
  p.S_exact = [](const Vec& x) { return single_point(std::max(1.0 - 0.5 * x(0), 0.0)); };
  p.dv_exact = [](const Vec& x) { return single_hull(std::max(1.0 - 0.5 * x(0), 0.0)); };
  return p;
}

ProblemInstance make_toy_bilevel() {
  auto p = base_instance("toy_bilevel", "f = (y - 1)^2 + x^2, g = (y - x)^2 on [-2, 2]^2",
                         BoxSet::interval(-2, 2), BoxSet::interval(-2, 2));
  p.upper = [](const Vec& x, const Vec& y) {
    const double d = y(0) - 1.0;
    return eval_scalar(d * d + x(0) * x(0), 2 * x(0), 2 * d);
  };
  p.lower_smooth = [](const Vec& x, const Vec& y) {
    const double d = y(0) - x(0);
    return eval_scalar(d * d, -2 * d, 2 * d);
  };
  p.flags = {true, true, true, true, true};
  p.lipschitz_x = 8.0;
  p.lipschitz_y = 8.0;
  p.smooth_curvature_y = 2.0;
  p.v_exact = [](const Vec&) { return 0.0; };
  p.S_exact = [](const Vec& x) { return single_point(x(0)); };
  p.dv_exact = [](const Vec&) { return single_hull(0.0); };
  return p;
}

// Calls fn on every point of the resolution^m tensor grid, in lexicographic order.
template <typename Fn>
void for_each_grid_point(const BoxSet& box, int resolution, Fn&& fn) {
  const int m = box.dim();
  std::vector<int> idx(m, 0);
  Vec y(m);
  while (true) {
    for (int i = 0; i < m; ++i) {
      const double t = static_cast<double>(idx[i]) / (resolution - 1);
      y(i) = idx[i] == resolution - 1 ? box.upper()(i)
                                      : box.lower()(i) + t * (box.upper()(i) - box.lower()(i));
    }
    fn(y);
    int d = 0;
    while (d < m && ++idx[d] == resolution) idx[d++] = 0;
    if (d == m) break;
  }
}

void check_brute_force_args(const ProblemInstance& p, const Vec& x, int resolution) {
  if (resolution < 2) throw std::invalid_argument("brute force resolution must be >= 2");
  if (x.size() != p.n) throw std::invalid_argument("x has wrong dimension");
}

}  // namespace

BoxSet::BoxSet(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) throw std::invalid_argument("BoxSet: bound sizes differ");
  for (int i = 0; i < lower_.size(); ++i) {
    if (!(lower_(i) <= upper_(i))) throw std::invalid_argument("BoxSet: lower bound exceeds upper");
  }
}

BoxSet BoxSet::interval(double lo, double hi) { return {scalar(lo), scalar(hi)}; }

BoxSet BoxSet::cube(int dim, double lo, double hi) {
  return {Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

BoxSet BoxSet::whole(int dim) { return cube(dim, -kInf, kInf); }

bool BoxSet::bounded() const {
  return lower_.array().isFinite().all() && upper_.array().isFinite().all();
}

double BoxSet::volume() const {
  if (!bounded()) return kInf;
  return (upper_ - lower_).prod();
}

Vec BoxSet::project(const Vec& p) const { return p.cwiseMax(lower_).cwiseMin(upper_); }

bool BoxSet::contains(const Vec& p, double margin) const {
  if (p.size() != lower_.size()) return false;
  return ((p.array() >= lower_.array() - margin) && (p.array() <= upper_.array() + margin)).all();
}

BoxSet BoxSet::intersect(const BoxSet& other) const {
  Vec lo = lower_.cwiseMax(other.lower_);
  Vec hi = upper_.cwiseMin(other.upper_);
  return {lo, hi};
}

double BoxSet::normal_cone_distance(const Vec& p, const Vec& w) const {
  double sq = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    const bool at_lo = p(i) <= lower_(i);
    const bool at_hi = p(i) >= upper_(i);
    double r = w(i);
    if (at_lo && at_hi) {
      r = 0.0;
    } else if (at_lo) {
      r = std::max(w(i), 0.0);
    } else if (at_hi) {
      r = std::min(w(i), 0.0);
    }
    sq += r * r;
  }
  return std::sqrt(sq);
}

double ProblemInstance::lower(const Vec& x, const Vec& y) const {
  double g = lower_smooth(x, y).value;
  for (const auto& t : lower_terms) g += t.weight(x) * kernel_value(t.kernel, t.argument(x, y));
  return g;
}

std::vector<Vec> ProblemInstance::dx_generators(const Vec& x, const Vec& y) const {
  return expand_generators(*this, x, y, false);
}

std::vector<Vec> ProblemInstance::joint_generators(const Vec& x, const Vec& y) const {
  return expand_generators(*this, x, y, true);
}

double ProblemInstance::kappa() const {
  double k = 0.0;
  for (const auto& t : lower_terms) {
    k += (t.kernel == Kernel::kAbs ? 0.5 : 0.125) * max_abs_weight(t, X);
  }
  return k;
}

double ProblemInstance::smoothness_y(double mu) const {
  double L = smooth_curvature_y;
  for (const auto& t : lower_terms) L += max_abs_weight(t, X) * t.arg_y.squaredNorm() / mu;
  return L;
}

BoxSet ProblemInstance::search_box(const Vec& x) const {
  if (Y.bounded()) return Y;
  if (!certified_box) throw std::invalid_argument("cannot brute-force unbounded set");
  return certified_box(x).intersect(Y);
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"quad_conv",  "gauss_well",  "sign_flip",
                                              "abs_track",  "lasso_hyper", "toy_bilevel"};
  return names;
}

ProblemInstance make_builtin(const std::string& name) {
  if (name == "quad_conv") return make_quad_conv();
  if (name == "gauss_well") return make_gauss_well();
  if (name == "sign_flip") return make_sign_flip();
  if (name == "abs_track") return make_abs_track();
  if (name == "lasso_hyper") return make_lasso_hyper();
  if (name == "toy_bilevel") return make_toy_bilevel();
  std::ostringstream msg;
  msg << "unknown problem '" << name << "'; valid names:";
  for (const auto& n : builtin_names()) msg << ' ' << n;
  throw std::invalid_argument(msg.str());
}

double brute_force_value(const ProblemInstance& p, const Vec& x, int resolution) {
  check_brute_force_args(p, x, resolution);
  const BoxSet box = p.search_box(x);
  double best = kInf;
  for_each_grid_point(box, resolution, [&](const Vec& y) { best = std::min(best, p.lower(x, y)); });
  return best;
}

ArgminSet brute_force_argmin(const ProblemInstance& p, const Vec& x, int resolution, double delta) {
  check_brute_force_args(p, x, resolution);
  const BoxSet box = p.search_box(x);
  std::vector<std::pair<Vec, double>> samples;
  double best = kInf;
  for_each_grid_point(box, resolution, [&](const Vec& y) {
    const double g = p.lower(x, y);
    best = std::min(best, g);
    samples.emplace_back(y, g);
  });
  const double band = delta > 0 ? delta : 1e-6 * (1.0 + std::abs(best));
  ArgminSet out;
  out.tolerance = band;
  for (auto& [y, g] : samples) {
    if (g <= best + band) out.points.push_back(y);
  }
  return out;
}

nlohmann::json instance_metadata(const ProblemInstance& p) {
  auto box_json = [](const BoxSet& b) {
    nlohmann::json lo = nlohmann::json::array();
    nlohmann::json hi = nlohmann::json::array();
    for (int i = 0; i < b.dim(); ++i) {
      // JSON has no infinity; unbounded sides are null.
      lo.push_back(std::isfinite(b.lower()(i)) ? nlohmann::json(b.lower()(i)) : nlohmann::json());
      hi.push_back(std::isfinite(b.upper()(i)) ? nlohmann::json(b.upper()(i)) : nlohmann::json());
    }
    return nlohmann::json{{"lower", lo}, {"upper", hi}};
  };
  nlohmann::json oracles = nlohmann::json::array();
  if (p.v_exact) oracles.push_back("v_exact");
  if (p.S_exact) oracles.push_back("S_exact");
  if (p.dv_exact) oracles.push_back("dv_exact");
  oracles.push_back("dx_generators");
  if (p.certified_box) oracles.push_back("certified_box");
  return {
      {"name", p.name},
      {"description", p.description},
      {"n", p.n},
      {"m", p.m},
      {"X", box_json(p.X)},
      {"Y", box_json(p.Y)},
      {"flags",
       {{"convex_in_y", p.flags.convex_in_y},
        {"smooth_in_x", p.flags.smooth_in_x},
        {"weakly_concave_in_x", p.flags.weakly_concave_in_x},
        {"convex_joint", p.flags.convex_joint},
        {"partial_formula_holds", p.flags.partial_formula_holds}}},
      {"kappa", p.kappa()},
      {"lipschitz_x", p.lipschitz_x},
      {"lipschitz_y", p.lipschitz_y},
      {"oracles", oracles},
  };
}

bool convexity_spot_check(const ProblemInstance& p, const Vec& x, int trials,
                          unsigned long long seed) {
  const BoxSet box = p.search_box(x);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample = [&]() {
    Vec y(p.m);
    for (int i = 0; i < p.m; ++i) {
      y(i) = box.lower()(i) + unit(rng) * (box.upper()(i) - box.lower()(i));
    }
    return y;
  };
  for (int k = 0; k < trials; ++k) {
    const Vec y1 = sample();
    const Vec y2 = sample();
    const double t = unit(rng);
    const double lhs = p.lower(x, t * y1 + (1 - t) * y2);
    const double rhs = t * p.lower(x, y1) + (1 - t) * p.lower(x, y2);
    if (lhs > rhs + 1e-12 * (1.0 + std::abs(rhs))) return false;
  }
  return true;
}

}  // namespace vfsmooth
