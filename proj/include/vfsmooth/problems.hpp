#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vfsmooth/hull.hpp"

namespace vfsmooth {

/// Axis-aligned box; bounds may be infinite.
class BoxSet {
 public:
  BoxSet() = default;
  BoxSet(Vec lower, Vec upper);

  static BoxSet interval(double lo, double hi);
  static BoxSet cube(int dim, double lo, double hi);
  static BoxSet whole(int dim);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  bool bounded() const;
  /// Product of side lengths; +inf when unbounded.
  double volume() const;
  Vec project(const Vec& p) const;
  bool contains(const Vec& p, double margin = 0.0) const;
  BoxSet intersect(const BoxSet& other) const;

  /// dist(w, N_box(p)) for p in the box. Coordinates at a bound admit the
  /// outward ray; interior coordinates admit only 0.
  double normal_cone_distance(const Vec& p, const Vec& w) const;

  friend bool operator==(const BoxSet& a, const BoxSet& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  Vec lower_;
  Vec upper_;
};

/// One-dimensional nonsmooth kernel appearing in a composite lower objective.
enum class Kernel {
  kAbs,   // |z|, smoothed by its Moreau envelope (Huber)
  kPlus,  // max(z, 0), smoothed by the Chen-Mangasarian uniform-density integral
};

/// Term w(x) * phi(a(x, y)) with w and a affine. w must be nonnegative on X.
struct NonsmoothTerm {
  Kernel kernel = Kernel::kAbs;
  Vec weight_x;  // w(x) = weight_x . x + weight_const
  double weight_const = 0.0;
  Vec arg_x;     // a(x, y) = arg_x . x + arg_y . y + arg_const
  Vec arg_y;
  double arg_const = 0.0;

  double weight(const Vec& x) const { return weight_x.dot(x) + weight_const; }
  double argument(const Vec& x, const Vec& y) const {
    return arg_x.dot(x) + arg_y.dot(y) + arg_const;
  }
};

/// Value and partial gradients of a function of (x, y).
struct PartialEval {
  double value = 0.0;
  Vec grad_x;
  Vec grad_y;
};

using SmoothFn = std::function<PartialEval(const Vec& x, const Vec& y)>;

struct ProblemFlags {
  bool convex_in_y = false;
  bool smooth_in_x = false;
  bool weakly_concave_in_x = false;
  bool convex_joint = false;
  bool partial_formula_holds = false;
};

/// Near-minimizers of g(x, .) over Y.
struct ArgminSet {
  std::vector<Vec> points;
  double tolerance = 0.0;
};

/// Bilevel instance: min f(x, y) over X x Y subject to y in argmin_{Y} g(x, .).
///
/// The lower objective is g(x, y) = s(x, y) + sum_i w_i(x) phi_i(a_i(x, y)) with
/// s smooth; its smoothing g_mu replaces each phi_i by its kernel family. The
/// upper objective is smooth, so f_mu = f.
struct ProblemInstance {
  std::string name;
  std::string description;
  int n = 1;
  int m = 1;
  BoxSet X;
  BoxSet Y;
  SmoothFn upper;
  SmoothFn lower_smooth;
  std::vector<NonsmoothTerm> lower_terms;
  ProblemFlags flags;

  double lipschitz_x = 0.0;       // of g in x on X x Y
  double lipschitz_y = 0.0;       // of g in y on X x (search box)
  double smooth_curvature_y = 0.0;  // Lipschitz constant of grad_y s on X x Y

  /// Certified box containing S(x) when Y is unbounded.
  std::function<BoxSet(const Vec&)> certified_box;

  std::function<double(const Vec&)> v_exact;
  std::function<ArgminSet(const Vec&)> S_exact;
  std::function<HullSet(const Vec&)> dv_exact;

  /// Exact lower objective g(x, y).
  double lower(const Vec& x, const Vec& y) const;
  /// Upper objective f(x, y).
  double upper_value(const Vec& x, const Vec& y) const { return upper(x, y).value; }

  /// Generators of the Clarke partial subdifferential of g in x.
  std::vector<Vec> dx_generators(const Vec& x, const Vec& y) const;
  /// Generators of the Clarke subdifferential of g in (x, y), stacked [x; y].
  std::vector<Vec> joint_generators(const Vec& x, const Vec& y) const;

  /// Uniform error constant: |g_mu - g| <= kappa() * mu on X x Y.
  double kappa() const;
  /// Lipschitz constant of grad_y g_mu(x, .) on Y, for x in X.
  double smoothness_y(double mu) const;

  /// Box used for brute-force search and projection in y at x: Y itself when
  /// bounded, otherwise the certified box.
  BoxSet search_box(const Vec& x) const;

  bool has_exact_value() const { return static_cast<bool>(v_exact); }
};

/// Names accepted by make_builtin, in listing order.
const std::vector<std::string>& builtin_names();

/// Zoo instance by name. Throws std::invalid_argument listing valid names.
ProblemInstance make_builtin(const std::string& name);

/// min over a tensor grid of g(x, .) on the search box.
double brute_force_value(const ProblemInstance& p, const Vec& x, int resolution);

/// Grid points within `delta` of the grid minimum. A negative delta selects the
/// default band 1e-6 * (1 + |grid min|).
ArgminSet brute_force_argmin(const ProblemInstance& p, const Vec& x, int resolution,
                             double delta = -1.0);

/// Dims, flags, constants and available oracles.
nlohmann::json instance_metadata(const ProblemInstance& p);

/// Random-midpoint convexity spot check of g(x, .) on the search box.
bool convexity_spot_check(const ProblemInstance& p, const Vec& x, int trials,
                          unsigned long long seed);

}  // namespace vfsmooth
