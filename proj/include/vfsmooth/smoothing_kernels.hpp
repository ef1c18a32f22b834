#pragma once

#include <functional>
#include <string>

#include "vfsmooth/problems.hpp"

namespace vfsmooth {

struct KernelEval {
  double value = 0.0;
  double derivative = 0.0;
};

/// Parametric smoothing family phi_mu of a nonsmooth scalar target phi with
/// sup_z |phi_mu(z) - phi(z)| <= kappa * mu.
struct SmoothFamily {
  std::string target;
  double kappa = 0.0;
  std::function<double(double)> exact;
  std::function<KernelEval(double z, double mu)> eval;

  double value(double z, double mu) const { return eval(z, mu).value; }
  double derivative(double z, double mu) const { return eval(z, mu).derivative; }
};

/// Chen-Mangasarian smoothing of max(z, 0) with the uniform density on
/// [-1/2, 1/2]: 0 <= value - max(z, 0) <= mu / 8.
KernelEval cm_plus(double z, double mu);

/// Huber function, the Moreau envelope of |.|: 0 <= |z| - value <= mu / 2.
KernelEval huber_abs(double z, double mu);

SmoothFamily cm_plus_family();
SmoothFamily huber_abs_family();
SmoothFamily family_for(Kernel k);

/// Proximal oracle: prox(z, mu) = argmin_u phi(u) + ||z - u||^2 / (2 mu).
using ProxOracle = std::function<Vec(const Vec& z, double mu)>;

struct MoreauEval {
  double value = 0.0;
  Vec gradient;
};

/// Moreau envelope e_mu phi(z) and its gradient (z - p) / mu, given phi and
/// its exact prox.
MoreauEval moreau_generic(const std::function<double(const Vec&)>& phi, const ProxOracle& prox,
                          const Vec& z, double mu);

/// Smoothed lower objective g_mu(x, y) with both partial gradients.
PartialEval smooth_lower(const ProblemInstance& p, const Vec& x, const Vec& y, double mu);

/// g_mu(x, y) + (mu / 2) ||y||^2.
PartialEval quad_regularize(const ProblemInstance& p, const Vec& x, const Vec& y, double mu);

}  // namespace vfsmooth
