#pragma once

#include <functional>

#include "vfsmooth/problems.hpp"

namespace vfsmooth {

/// Gauss-Legendre rule on [-1, 1] with `npoints` nodes, ascending.
struct GaussLegendreRule {
  Vec nodes;
  Vec weights;
};
GaussLegendreRule gauss_legendre(int npoints);

/// Tensor-product Gauss-Legendre grid over a bounded box. Node j is column j
/// of `nodes`; the first coordinate varies fastest.
struct QuadratureGrid {
  Eigen::MatrixXd nodes;
  Vec weights;
  BoxSet box;
  int level = 0;

  Eigen::Index size() const { return weights.size(); }
};

/// Nodes per axis at a refinement level: 16 * 2^level.
int nodes_per_axis(int level);

/// (16 * 2^level)^m-node grid. Throws std::invalid_argument for an unbounded
/// box, m > 3, or a negative level.
QuadratureGrid build_grid(const BoxSet& box, int level);

struct EntropicEval {
  double value = 0.0;
  Vec gradient;
  Vec alpha;              // softmin density at each node; sum_j w_j alpha_j = 1
  double stabilizer = 0;  // m0 = min_j g_mu(x, y_j)
};

/// v_mu(x) = -mu ln sum_j w_j exp(-g_mu(x, y_j) / mu), evaluated as
/// m0 - mu ln sum_j w_j exp(-(g_mu(x, y_j) - m0) / mu), with gradient
/// sum_j w_j alpha_j grad_x g_mu(x, y_j). Summation runs in node order.
EntropicEval entropic_value(const ProblemInstance& p, const Vec& x, double mu,
                            const QuadratureGrid& grid);

Vec entropic_grad(const ProblemInstance& p, const Vec& x, double mu, const QuadratureGrid& grid);

/// Quadrature-weighted alpha mass on nodes satisfying `select`.
double alpha_mass(const EntropicEval& eval, const QuadratureGrid& grid,
                  const std::function<bool(const Vec&)>& select);

/// Y intersected with the centered cube [-r, r]^m, where (2r)^m = mu^(-p_exp).
BoxSet growing_set(const BoxSet& Y, double mu, double p_exp);

struct EntropicThreshold {
  bool holds = false;
  double margin = 0.0;  // eps - mu ln vol(box)
};

/// Whether mu ln vol(box) < eps. Throws std::invalid_argument on an unbounded box.
EntropicThreshold ennamcq_entropic_threshold(const BoxSet& box, double mu, double eps);

struct EntropicOptions {
  int level = 3;
  double p_exp = 1.0;
};

/// Integration box for the instance at mu: Y when compact, else growing_set(Y, mu, p_exp).
BoxSet entropic_box(const ProblemInstance& p, double mu, const EntropicOptions& options);

/// entropic_value on the grid built from entropic_box.
EntropicEval entropic_evaluate(const ProblemInstance& p, const Vec& x, double mu,
                               const EntropicOptions& options);

}  // namespace vfsmooth
