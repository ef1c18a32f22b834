#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfsmooth/smoother.hpp"

namespace vfsmooth {

/// Bad configuration or usage. The CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string problem;
  SmootherKind smoother = SmootherKind::kQuad;

  // mu_k = mu0 theta^k, k = 0..K
  double mu0 = 0.5;
  double theta = 0.5;
  int K = 12;
  double eps = 0.01;

  int level = 3;
  double p_exp = 1.0;

  // smooth-scan
  std::vector<double> mus{0.1, 0.01, 0.001};
  std::vector<Vec> xs;  // empty: five points across X clipped to [-1, 1]
  double fd_tolerance = 1e-5;

  // consistency
  std::optional<Vec> anchor;     // default 0 projected onto X
  std::optional<Vec> direction;  // default all ones
  int first = 4;
  int last = 10;
  double tolerance = 1e-2;

  // solve
  std::optional<Vec> x0;
  std::optional<Vec> y0;
  double limit_tolerance = 1e-2;

  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  SmootherParams params() const;
  nlohmann::json echo() const;
};

/// Overlays the keys of a JSON object onto cfg. Unknown keys are rejected.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Each command returns its exit code: 0 success, 1 check failure.
// ConfigError and std::invalid_argument propagate for exit code 2.
int cmd_list_problems(bool json, std::ostream& out);
int cmd_smooth_scan(const ExperimentConfig& cfg, std::ostream& out);
int cmd_consistency(const ExperimentConfig& cfg, std::ostream& out);
int cmd_solve(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace vfsmooth
