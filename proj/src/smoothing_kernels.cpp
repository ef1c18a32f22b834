#include "vfsmooth/smoothing_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vfsmooth {

namespace {

void require_positive_mu(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("smoothing parameter mu must be positive");
}

}  // namespace

KernelEval cm_plus(double z, double mu) {
  require_positive_mu(mu);
  const double half = 0.5 * mu;
  if (z >= half) return {z, 1.0};
  if (z <= -half) return {0.0, 0.0};
  const double s = z + half;
  return {s * s / (2.0 * mu), s / mu};
}

KernelEval huber_abs(double z, double mu) {
  require_positive_mu(mu);
  if (std::abs(z) <= mu) return {z * z / (2.0 * mu), z / mu};
  return {std::abs(z) - 0.5 * mu, z > 0 ? 1.0 : -1.0};
}

SmoothFamily cm_plus_family() {
  return {"max(z, 0)", 0.125, [](double z) { return std::max(z, 0.0); }, cm_plus};
}

SmoothFamily huber_abs_family() {
  return {"|z|", 0.5, [](double z) { return std::abs(z); }, huber_abs};
}

SmoothFamily family_for(Kernel k) {
  return k == Kernel::kAbs ? huber_abs_family() : cm_plus_family();
}

MoreauEval moreau_generic(const std::function<double(const Vec&)>& phi, const ProxOracle& prox,
                          const Vec& z, double mu) {
  require_positive_mu(mu);
  const Vec p = prox(z, mu);
  const Vec diff = z - p;
  return {phi(p) + diff.squaredNorm() / (2.0 * mu), diff / mu};
}

PartialEval smooth_lower(const ProblemInstance& p, const Vec& x, const Vec& y, double mu) {
  require_positive_mu(mu);
  PartialEval out = p.lower_smooth(x, y);
  for (const auto& term : p.lower_terms) {
    const double w = term.weight(x);
    const KernelEval k = family_for(term.kernel).eval(term.argument(x, y), mu);
    out.value += w * k.value;
    out.grad_x += term.weight_x * k.value + (w * k.derivative) * term.arg_x;
    out.grad_y += (w * k.derivative) * term.arg_y;
  }
  return out;
}

PartialEval quad_regularize(const ProblemInstance& p, const Vec& x, const Vec& y, double mu) {
  PartialEval out = smooth_lower(p, x, y, mu);
  out.value += 0.5 * mu * y.squaredNorm();
  out.grad_y += mu * y;
  return out;
}

}  // namespace vfsmooth
