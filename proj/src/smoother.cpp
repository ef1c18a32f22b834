#include "vfsmooth/smoother.hpp"

#include <stdexcept>

namespace vfsmooth {

std::string to_string(SmootherKind kind) {
  return kind == SmootherKind::kQuad ? "quad" : "entropic";
}

SmootherKind parse_smoother(const std::string& name) {
  if (name == "quad") return SmootherKind::kQuad;
  if (name == "entropic") return SmootherKind::kEntropic;
  throw std::invalid_argument("unknown smoother '" + name + "' (expected quad or entropic)");
}

void require_applicable(SmootherKind kind, const ProblemInstance& p) {
  if (kind == SmootherKind::kQuad && !p.flags.convex_in_y) {
    throw std::invalid_argument("quadratic smoother requires convexity in y (instance '" + p.name +
                                "')");
  }
  if (kind == SmootherKind::kEntropic && p.m > 3) {
    throw std::invalid_argument("entropic quadrature limited to m <= 3");
  }
}

SmoothedValue evaluate_smoother(SmootherKind kind, const ProblemInstance& p, const Vec& x,
                                double mu, const SmootherParams& params) {
  if (kind == SmootherKind::kQuad) {
    QuadEval q = quad_evaluate(p, x, mu, params.inner);
    return {q.value, std::move(q.gradient), q.inner.iterations};
  }
  const QuadratureGrid grid = build_grid(entropic_box(p, mu, params.entropic), params.entropic.level);
  EntropicEval e = entropic_value(p, x, mu, grid);
  return {e.value, std::move(e.gradient), static_cast<int>(grid.size())};
}

}  // namespace vfsmooth
