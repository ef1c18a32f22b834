#pragma once

#include <string>

#include "vfsmooth/value_entropic.hpp"
#include "vfsmooth/value_quadratic.hpp"

namespace vfsmooth {

enum class SmootherKind { kQuad, kEntropic };

std::string to_string(SmootherKind kind);
/// Accepts "quad" and "entropic"; throws std::invalid_argument otherwise.
SmootherKind parse_smoother(const std::string& name);

struct SmootherParams {
  InnerSolveOptions inner;
  EntropicOptions entropic;
};

struct SmoothedValue {
  double value = 0.0;
  Vec gradient;
  int work = 0;  // inner iterations (quad) or quadrature nodes (entropic)
};

/// Throws std::invalid_argument when the smoother cannot be used on the instance.
void require_applicable(SmootherKind kind, const ProblemInstance& p);

/// v_mu(x) and its gradient for the chosen smoother.
SmoothedValue evaluate_smoother(SmootherKind kind, const ProblemInstance& p, const Vec& x,
                                double mu, const SmootherParams& params = {});

}  // namespace vfsmooth
