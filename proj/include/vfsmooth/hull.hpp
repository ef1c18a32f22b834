#pragma once

#include <vector>

#include <Eigen/Dense>

namespace vfsmooth {

using Vec = Eigen::VectorXd;

/// Convex hull of a finite generator list. Used to represent Clarke
/// subdifferentials and the Danskin set co{d_x g(x, y) : y in S(x)}.
struct HullSet {
  std::vector<Vec> generators;

  int dim() const {
    return generators.empty() ? 0 : static_cast<int>(generators.front().size());
  }
  bool empty() const { return generators.empty(); }
};

struct MinNormResult {
  Vec point;            // nearest point of the hull
  Vec weights;          // convex weights over the (deduplicated) generators
  double distance = 0;  // ||point - query||
  double gap = 0;       // Frank-Wolfe duality gap at termination
  int iterations = 0;
};

/// Nearest point of co(generators) to `query`, by Wolfe's minimum-norm-point
/// algorithm on the shifted polytope. Terminates when the conditional-gradient
/// gap drops below `gap_tol` (relative to the squared generator scale) or
/// after `max_iter` major cycles.
MinNormResult min_norm_point(const Vec& query, const HullSet& hull,
                             double gap_tol = 1e-12, int max_iter = 10000);

/// Euclidean distance from `point` to the convex hull of `hull`.
/// Throws std::invalid_argument for an empty hull or mismatched dimension.
double hull_distance(const Vec& point, const HullSet& hull);

/// Generators of the Minkowski sum a + b (all pairwise sums).
HullSet minkowski_sum(const HullSet& a, const HullSet& b);

/// Largest distance from a generator of `a` to co(b) and vice versa.
/// Zero iff co(a) == co(b).
double hull_hausdorff(const HullSet& a, const HullSet& b);

}  // namespace vfsmooth
