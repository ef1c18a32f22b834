#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfsmooth/hull.hpp"
#include "vfsmooth/problems.hpp"
#include "vfsmooth/smoother.hpp"

namespace vfsmooth {

/// Which result identifies the Danskin set with the Clarke subdifferential of v.
/// kLemmaLevel means only the inclusion into the Danskin set is certified.
enum class HullSource { kDanskinSmooth, kDanskinConcave, kDanskinConvex, kLemmaLevel };

std::string to_string(HullSource source);

struct HullOptions {
  int resolution = 601;  // brute-force points per axis for S(x); 601 keeps multiples of 0.01 on [-3, 3]
  double delta = -1.0;   // admission band; negative selects the default
};

struct DanskinHull {
  HullSet hull;
  HullSource source = HullSource::kLemmaLevel;
  ArgminSet argmin;
};

/// co{ d_x g(x, y) : y in S(x) } with S(x) from the brute-force argmin.
DanskinHull danskin_hull(const ProblemInstance& p, const Vec& anchor, const HullOptions& options = {});

/// Sequence (x_k, mu_k) with x_k -> anchor and mu_k decreasing to 0.
struct ProbeSchedule {
  Vec anchor;
  std::vector<Vec> points;
  std::vector<double> mus;

  /// Throws std::invalid_argument unless mu_k is positive and strictly
  /// decreasing and ||x_k - anchor|| is non-increasing.
  void validate() const;
};

/// x_k = anchor + 2^-k d, mu_k = 2^-k for k = first..last.
ProbeSchedule radial_schedule(const Vec& anchor, const Vec& direction, int first = 4, int last = 10);

struct ProbeRow {
  Vec x;
  double mu = 0.0;
  Vec gradient;
  double distance = 0.0;
};

struct ProbeParams {
  SmootherParams smoother;
  HullOptions hull;
  double tolerance = 1e-2;
  double tail_fraction = 1.0 / 3.0;  // trailing share of rows (rounded up) behind the verdict
};

struct ConsistencyReport {
  std::string problem;
  SmootherKind smoother = SmootherKind::kQuad;
  Vec anchor;
  DanskinHull hull;
  std::vector<ProbeRow> rows;
  double tail_distance = 0.0;  // max distance over the trailing rows
  double max_gradient_norm = 0.0;
  bool bounded = false;  // max_gradient_norm <= lipschitz_x + 1
  double tolerance = 0.0;
  bool pass = false;

  std::vector<double> distances() const;
  /// "subdifferential" when the hull equals the Clarke subdifferential of v,
  /// "danskin set" when only the weaker inclusion is certified.
  std::string certifies() const;
};

ConsistencyReport consistency_probe(SmootherKind kind, const ProblemInstance& p,
                                    const ProbeSchedule& schedule, const ProbeParams& params = {});

/// max_i |central difference_i - grad_i| / (1 + |grad_i|), with the five-point
/// central stencil. A non-positive step
/// selects h = mu / 1000.
double fd_check(SmootherKind kind, const ProblemInstance& p, const Vec& x, double mu,
                double h = -1.0, const SmootherParams& params = {});

struct ScanRow {
  Vec x;
  double mu = 0.0;
  double value = 0.0;      // v_mu(x)
  double exact = 0.0;      // v(x)
  double error = 0.0;      // |v_mu(x) - v(x)|
  Vec gradient;
  double fd_error = 0.0;   // NaN when mu < 1e-3
  int work = 0;
  double alpha_tail_mass = 0.0;  // entropic only; NaN otherwise
};

struct ScanOptions {
  SmootherParams smoother;
  int brute_force_resolution = 4001;  // used when the instance has no exact v
  double tail_radius = 0.5;           // alpha mass farther than this from S(x)
  double monotone_slack = 1e-8;
};

struct ScanTable {
  SmootherKind smoother = SmootherKind::kQuad;
  std::string problem;
  int level = 0;  // quadrature level (entropic)
  std::vector<ScanRow> rows;
  bool monotone = true;             // per-x error non-increasing as mu decreases
  std::vector<std::string> violations;
};

ScanTable smoothing_error_scan(SmootherKind kind, const ProblemInstance& p,
                               const std::vector<Vec>& x_grid, const std::vector<double>& mus,
                               const ScanOptions& options = {});

nlohmann::json to_json(const ConsistencyReport& report);
std::string to_csv(const ConsistencyReport& report);
std::string to_csv(const ScanTable& table);

}  // namespace vfsmooth
