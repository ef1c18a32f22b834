#include "vfsmooth/value_entropic.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "vfsmooth/smoothing_kernels.hpp"

namespace vfsmooth {

namespace {

GaussLegendreRule compute_gauss_legendre(int n) {
  GaussLegendreRule rule{Vec(n), Vec(n)};
  // Roots are symmetric; solve for the upper half by Newton on P_n.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes(i) = -z;
    rule.nodes(n - 1 - i) = z;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

}  // namespace

GaussLegendreRule gauss_legendre(int npoints) {
  if (npoints < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(npoints);
  if (it == cache.end()) it = cache.emplace(npoints, compute_gauss_legendre(npoints)).first;
  return it->second;
}

int nodes_per_axis(int level) { return 16 << level; }

QuadratureGrid build_grid(const BoxSet& box, int level) {
  if (!box.bounded()) throw std::invalid_argument("build_grid: box must be bounded");
  if (box.dim() > 3) throw std::invalid_argument("entropic quadrature limited to m <= 3");
  if (level < 0 || level > 10) throw std::invalid_argument("build_grid: level must be in [0, 10]");
  const int m = box.dim();
  const int per_axis = nodes_per_axis(level);
  const Eigen::Index total = static_cast<Eigen::Index>(std::pow(per_axis, m));
  if (total > 50'000'000) throw std::invalid_argument("build_grid: grid too large");

  const GaussLegendreRule rule = gauss_legendre(per_axis);
  const Vec half = 0.5 * (box.upper() - box.lower());
  const Vec mid = 0.5 * (box.upper() + box.lower());

  QuadratureGrid grid{Eigen::MatrixXd(m, total), Vec(total), box, level};
  std::vector<int> idx(m, 0);
  for (Eigen::Index j = 0; j < total; ++j) {
    double w = 1.0;
    for (int d = 0; d < m; ++d) {
      grid.nodes(d, j) = mid(d) + half(d) * rule.nodes(idx[d]);
      w *= half(d) * rule.weights(idx[d]);
    }
    grid.weights(j) = w;
    for (int d = 0; d < m && ++idx[d] == per_axis; ++d) idx[d] = 0;
  }
  return grid;
}

EntropicEval entropic_value(const ProblemInstance& p, const Vec& x, double mu,
                            const QuadratureGrid& grid) {
  if (!(mu > 0.0)) throw std::invalid_argument("smoothing parameter mu must be positive");
  const Eigen::Index count = grid.size();
  if (count == 0) throw std::invalid_argument("entropic_value: empty grid");

  Vec values(count);
  Eigen::MatrixXd grads(p.n, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const PartialEval e = smooth_lower(p, x, grid.nodes.col(j), mu);
    values(j) = e.value;
    grads.col(j) = e.grad_x;
  }
  const double m0 = values.minCoeff();

  Vec expo(count);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < count; ++j) {
    expo(j) = std::exp(-(values(j) - m0) / mu);
    sum += grid.weights(j) * expo(j);
  }

  EntropicEval out;
  out.stabilizer = m0;
  out.value = m0 - mu * std::log(sum);
  out.alpha = expo / sum;
  out.gradient = Vec::Zero(p.n);
  for (Eigen::Index j = 0; j < count; ++j) {
    out.gradient += (grid.weights(j) * out.alpha(j)) * grads.col(j);
  }
  return out;
}

Vec entropic_grad(const ProblemInstance& p, const Vec& x, double mu, const QuadratureGrid& grid) {
  return entropic_value(p, x, mu, grid).gradient;
}

double alpha_mass(const EntropicEval& eval, const QuadratureGrid& grid,
                  const std::function<bool(const Vec&)>& select) {
  double mass = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    if (select(grid.nodes.col(j))) mass += grid.weights(j) * eval.alpha(j);
  }
  return mass;
}

BoxSet growing_set(const BoxSet& Y, double mu, double p_exp) {
  if (!(mu > 0.0) || !(p_exp > 0.0)) {
    throw std::invalid_argument("growing_set: mu and p_exp must be positive");
  }
  const int m = Y.dim();
  const double radius = 0.5 * std::pow(mu, -p_exp / m);
  return Y.intersect(BoxSet::cube(m, -radius, radius));
}

EntropicThreshold ennamcq_entropic_threshold(const BoxSet& box, double mu, double eps) {
  if (!box.bounded()) {
    throw std::invalid_argument(
        "volume threshold needs a bounded box; intersect Y with growing_set first");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("volume threshold requires eps > 0");
  const double margin = eps - mu * std::log(box.volume());
  return {margin > 0.0, margin};
}

BoxSet entropic_box(const ProblemInstance& p, double mu, const EntropicOptions& options) {
  return p.Y.bounded() ? p.Y : growing_set(p.Y, mu, options.p_exp);
}

EntropicEval entropic_evaluate(const ProblemInstance& p, const Vec& x, double mu,
                               const EntropicOptions& options) {
  return entropic_value(p, x, mu, build_grid(entropic_box(p, mu, options), options.level));
}

}  // namespace vfsmooth
