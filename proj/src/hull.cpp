#include "vfsmooth/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vfsmooth {

namespace {

std::vector<Vec> dedupe(const std::vector<Vec>& in) {
  std::vector<Vec> out;
  out.reserve(in.size());
  for (const auto& g : in) {
    bool seen = false;
    for (const auto& h : out) {
      if ((g - h).lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + g.lpNorm<Eigen::Infinity>())) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(g);
  }
  return out;
}

// Minimizer of ||Q a|| subject to sum(a) = 1, Q = columns indexed by `corral`.
Vec affine_minimizer(const std::vector<Vec>& pts, const std::vector<int>& corral) {
  const int k = static_cast<int>(corral.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const double d = pts[corral[a]].dot(pts[corral[b]]);
      kkt(a, b) = d;
      kkt(b, a) = d;
    }
    kkt(a, k) = 1.0;
    kkt(k, a) = 1.0;
  }
  Vec rhs = Vec::Zero(k + 1);
  rhs(k) = 1.0;
  Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(k);
}

Vec combine(const std::vector<Vec>& pts, const std::vector<int>& corral, const Vec& lambda) {
  Vec x = Vec::Zero(pts.front().size());
  for (std::size_t i = 0; i < corral.size(); ++i) x += lambda(static_cast<Eigen::Index>(i)) * pts[corral[i]];
  return x;
}

}  // namespace

MinNormResult min_norm_point(const Vec& query, const HullSet& hull, double gap_tol, int max_iter) {
  if (hull.empty()) throw std::invalid_argument("hull_distance: empty hull");
  for (const auto& g : hull.generators) {
    if (g.size() != query.size()) throw std::invalid_argument("hull_distance: dimension mismatch");
  }

  const std::vector<Vec> gens = dedupe(hull.generators);
  std::vector<Vec> pts;
  pts.reserve(gens.size());
  double scale = 0.0;
  for (const auto& g : gens) {
    pts.push_back(g - query);
    scale = std::max(scale, pts.back().squaredNorm());
  }
  scale = std::max(scale, 1.0);
  const int npts = static_cast<int>(pts.size());

  int start = 0;
  for (int i = 1; i < npts; ++i) {
    if (pts[i].squaredNorm() < pts[start].squaredNorm()) start = i;
  }
  std::vector<int> corral{start};
  Vec lambda = Vec::Ones(1);
  Vec x = pts[start];

  MinNormResult res;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    int best = 0;
    double best_dot = std::numeric_limits<double>::infinity();
    for (int j = 0; j < npts; ++j) {
      const double d = x.dot(pts[j]);
      if (d < best_dot) {
        best_dot = d;
        best = j;
      }
    }
    res.gap = x.squaredNorm() - best_dot;
    if (res.gap <= gap_tol * scale) break;
    if (std::find(corral.begin(), corral.end(), best) != corral.end()) break;

    corral.push_back(best);
    lambda.conservativeResize(lambda.size() + 1);
    lambda(lambda.size() - 1) = 0.0;

    for (int minor = 0; minor <= npts + 1; ++minor) {
      const Vec alpha = affine_minimizer(pts, corral);
      if ((alpha.array() > 1e-14).all()) {
        lambda = alpha;
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha(i) <= 1e-14) {
          const double denom = lambda(i) - alpha(i);
          if (denom > 0) theta = std::min(theta, lambda(i) / denom);
        }
      }
      lambda = theta * alpha + (1.0 - theta) * lambda;
      std::vector<int> kept;
      std::vector<double> kept_w;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > 1e-15) {
          kept.push_back(corral[i]);
          kept_w.push_back(lambda(i));
        }
      }
      if (kept.empty()) {
        // Degenerate step; keep the newest vertex.
        kept.push_back(corral.back());
        kept_w.push_back(1.0);
      }
      corral = kept;
      lambda = Eigen::Map<Vec>(kept_w.data(), static_cast<Eigen::Index>(kept_w.size()));
      lambda /= lambda.sum();
    }
    x = combine(pts, corral, lambda);
  }

  res.iterations = iter;
  res.point = x + query;
  res.distance = x.norm();
  res.weights = Vec::Zero(npts);
  for (std::size_t i = 0; i < corral.size(); ++i) res.weights(corral[i]) = lambda(static_cast<Eigen::Index>(i));
  return res;
}

double hull_distance(const Vec& point, const HullSet& hull) {
  return min_norm_point(point, hull).distance;
}

HullSet minkowski_sum(const HullSet& a, const HullSet& b) {
  HullSet out;
  out.generators.reserve(a.generators.size() * b.generators.size());
  for (const auto& p : a.generators) {
    for (const auto& q : b.generators) out.generators.push_back(p + q);
  }
  return out;
}

double hull_hausdorff(const HullSet& a, const HullSet& b) {
  double d = 0.0;
  for (const auto& g : a.generators) d = std::max(d, hull_distance(g, b));
  for (const auto& g : b.generators) d = std::max(d, hull_distance(g, a));
  return d;
}

}  // namespace vfsmooth
