#include "vfsmooth/experiment.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "csv_format.hpp"
#include "vfsmooth/bilevel_solver.hpp"
#include "vfsmooth/consistency_lab.hpp"
#include "vfsmooth/problems.hpp"

namespace vfsmooth {

namespace fs = std::filesystem;

namespace {

Vec json_vec(const nlohmann::json& j, const char* key) {
  if (j.is_number()) return Vec::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError(std::string("config key '") + key + "' must be a number or array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
}

ProblemInstance resolve_problem(const ExperimentConfig& cfg) {
  if (cfg.problem.empty()) throw ConfigError("missing problem name");
  try {
    return make_builtin(cfg.problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void check_dim(const Vec& v, int n, const char* what) {
  if (v.size() != n) throw ConfigError(fmt::format("{} has dimension {}, expected {}", what, v.size(), n));
}

std::vector<Vec> default_x_grid(const ProblemInstance& p) {
  const Vec lo = p.X.lower().cwiseMax(-1.0);
  const Vec hi = p.X.upper().cwiseMin(1.0);
  std::vector<Vec> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(lo + (hi - lo) * (i / 4.0));
  return xs;
}

void prepare_out(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out_dir.string());
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

void ExperimentConfig::validate() const {
  if (!(mu0 > 0.0 && mu0 <= 1.0)) throw ConfigError("mu0 must lie in (0, 1]");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (K < 0) throw ConfigError("K must be nonnegative");
  if (level < 0 || level > 10) throw ConfigError("level must lie in [0, 10]");
  if (!(p_exp > 0.0)) throw ConfigError("p_exp must be positive");
  if (mus.empty()) throw ConfigError("mus must be non-empty");
  for (double mu : mus) {
    if (!(mu > 0.0)) throw ConfigError("mus entries must be positive");
  }
  if (first < 0 || last < first) throw ConfigError("probe range needs 0 <= first <= last");
  if (!(tolerance > 0.0) || !(limit_tolerance > 0.0) || !(fd_tolerance > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
}

SmootherParams ExperimentConfig::params() const {
  SmootherParams p;
  p.entropic.level = level;
  p.entropic.p_exp = p_exp;
  return p;
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j;
  j["problem"] = problem;
  j["smoother"] = to_string(smoother);
  j["mu0"] = mu0;
  j["theta"] = theta;
  j["K"] = K;
  j["eps"] = eps;
  j["level"] = level;
  j["p_exp"] = p_exp;
  j["mus"] = mus;
  nlohmann::json xj = nlohmann::json::array();
  for (const auto& x : xs) xj.push_back(detail::vec_json(x));
  j["x"] = xj;
  j["fd_tolerance"] = fd_tolerance;
  j["anchor"] = anchor ? detail::vec_json(*anchor) : nlohmann::json();
  j["direction"] = direction ? detail::vec_json(*direction) : nlohmann::json();
  j["first"] = first;
  j["last"] = last;
  j["tolerance"] = tolerance;
  j["x0"] = x0 ? detail::vec_json(*x0) : nlohmann::json();
  j["y0"] = y0 ? detail::vec_json(*y0) : nlohmann::json();
  j["limit_tolerance"] = limit_tolerance;
  j["seed"] = seed;
  return j;
}

void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "problem") cfg.problem = val.get<std::string>();
      else if (key == "smoother") cfg.smoother = parse_smoother(val.get<std::string>());
      else if (key == "mu0") cfg.mu0 = val.get<double>();
      else if (key == "theta") cfg.theta = val.get<double>();
      else if (key == "K") cfg.K = val.get<int>();
      else if (key == "eps") cfg.eps = val.get<double>();
      else if (key == "level") cfg.level = val.get<int>();
      else if (key == "p_exp") cfg.p_exp = val.get<double>();
      else if (key == "mus") cfg.mus = val.get<std::vector<double>>();
      else if (key == "x") {
        cfg.xs.clear();
        for (const auto& e : val) cfg.xs.push_back(json_vec(e, "x"));
      }
      else if (key == "fd_tolerance") cfg.fd_tolerance = val.get<double>();
      else if (key == "anchor") cfg.anchor = json_vec(val, "anchor");
      else if (key == "direction") cfg.direction = json_vec(val, "direction");
      else if (key == "first") cfg.first = val.get<int>();
      else if (key == "last") cfg.last = val.get<int>();
      else if (key == "tolerance") cfg.tolerance = val.get<double>();
      else if (key == "x0") cfg.x0 = json_vec(val, "x0");
      else if (key == "y0") cfg.y0 = json_vec(val, "y0");
      else if (key == "limit_tolerance") cfg.limit_tolerance = val.get<double>();
      else if (key == "out") cfg.out_dir = val.get<std::string>();
      else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  ExperimentConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

int cmd_list_problems(bool json, std::ostream& out) {
  if (json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& name : builtin_names()) arr.push_back(instance_metadata(make_builtin(name)));
    out << arr.dump(2) << "\n";
    return 0;
  }
  out << fmt::format("{:<12} {:>2} {:>2}  {:<82} {}\n", "name", "n", "m", "flags", "oracles");
  for (const auto& name : builtin_names()) {
    const ProblemInstance p = make_builtin(name);
    std::string flags;
    auto add = [&flags](bool on, const char* label) {
      if (!on) return;
      if (!flags.empty()) flags += ',';
      flags += label;
    };
    add(p.flags.convex_in_y, "convex_in_y");
    add(p.flags.smooth_in_x, "smooth_in_x");
    add(p.flags.weakly_concave_in_x, "weakly_concave_in_x");
    add(p.flags.convex_joint, "convex_joint");
    add(p.flags.partial_formula_holds, "partial_formula_holds");
    std::string oracles;
    if (p.v_exact) oracles += "v_exact ";
    if (p.S_exact) oracles += "S_exact ";
    if (p.dv_exact) oracles += "dv_exact ";
    oracles += "brute_force";
    out << fmt::format("{:<12} {:>2} {:>2}  {:<82} {}\n", name, p.n, p.m, flags.empty() ? "-" : flags,
                       oracles);
  }
  return 0;
}

int cmd_smooth_scan(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const ProblemInstance p = resolve_problem(cfg);
  require_applicable(cfg.smoother, p);
  std::vector<Vec> xs = cfg.xs.empty() ? default_x_grid(p) : cfg.xs;
  for (const auto& x : xs) {
    check_dim(x, p.n, "x");
    if (!p.X.contains(x)) throw ConfigError("x = " + detail::vec(x) + " lies outside X");
  }
  prepare_out(cfg);

  ScanOptions opts;
  opts.smoother = cfg.params();
  const ScanTable table = smoothing_error_scan(cfg.smoother, p, xs, cfg.mus, opts);

  std::vector<std::string> failures = table.violations;
  double worst_fd = 0.0;
  for (const auto& r : table.rows) {
    if (std::isnan(r.fd_error)) continue;
    worst_fd = std::max(worst_fd, r.fd_error);
    if (r.fd_error > cfg.fd_tolerance) {
      failures.push_back(fmt::format("x={} mu={} fd_error={} exceeds {}", detail::vec(r.x), detail::num(r.mu),
                                     detail::num(r.fd_error), detail::num(cfg.fd_tolerance)));
    }
  }

  write_file(cfg.out_dir / "smooth_scan.csv", to_csv(table));
  nlohmann::json summary;
  summary["config"] = cfg.echo();
  summary["rows"] = table.rows.size();
  summary["monotone"] = table.monotone;
  summary["max_fd_error"] = worst_fd;
  summary["failures"] = failures;
  summary["verdict"] = failures.empty() ? "pass" : "fail";
  write_file(cfg.out_dir / "smooth_scan.json", dump(summary));

  out << "smooth-scan " << to_string(cfg.smoother) << " " << p.name << ": " << table.rows.size()
      << " rows, " << (failures.empty() ? "pass" : "fail") << "\n";
  for (const auto& f : failures) out << "  failing row: " << f << "\n";
  return failures.empty() ? 0 : 1;
}

int cmd_consistency(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const ProblemInstance p = resolve_problem(cfg);
  require_applicable(cfg.smoother, p);
  const Vec anchor = cfg.anchor ? *cfg.anchor : p.X.project(Vec::Zero(p.n));
  const Vec direction = cfg.direction ? *cfg.direction : Vec::Ones(p.n);
  check_dim(anchor, p.n, "anchor");
  check_dim(direction, p.n, "direction");
  const ProbeSchedule schedule = radial_schedule(anchor, direction, cfg.first, cfg.last);
  for (const auto& x : schedule.points) {
    if (!p.X.contains(x)) throw ConfigError("probe point " + detail::vec(x) + " lies outside X");
  }
  prepare_out(cfg);

  ProbeParams params;
  params.smoother = cfg.params();
  params.tolerance = cfg.tolerance;
  const ConsistencyReport report = consistency_probe(cfg.smoother, p, schedule, params);

  nlohmann::json j = to_json(report);
  j["config"] = cfg.echo();
  j["convexity_spot_check"] = convexity_spot_check(p, anchor, 64, cfg.seed);
  write_file(cfg.out_dir / "consistency.json", dump(j));
  write_file(cfg.out_dir / "consistency.csv", to_csv(report));

  out << "consistency " << to_string(cfg.smoother) << " " << p.name << " at " << detail::vec(anchor)
      << ": tail distance " << detail::num(report.tail_distance) << " (tol " << detail::num(report.tolerance)
      << "), certifies " << report.certifies() << ", " << (report.pass ? "pass" : "fail") << "\n";
  return report.pass ? 0 : 1;
}

int cmd_solve(const ExperimentConfig& cfg, std::ostream& out) {
  cfg.validate();
  const ProblemInstance p = resolve_problem(cfg);
  require_applicable(cfg.smoother, p);
  Vec x0;
  Vec y0;
  if (cfg.x0) {
    x0 = *cfg.x0;
    check_dim(x0, p.n, "x0");
  }
  if (cfg.y0) {
    y0 = *cfg.y0;
    check_dim(y0, p.m, "y0");
  }
  prepare_out(cfg);

  SolveOptions opts;
  opts.smoother = cfg.smoother;
  opts.eps = cfg.eps;
  opts.mu0 = cfg.mu0;
  opts.theta = cfg.theta;
  opts.K = cfg.K;
  opts.params = cfg.params();

  nlohmann::json j;
  j["config"] = cfg.echo();
  SolveResult result;
  try {
    result = solve_vfp(p, opts, x0, y0);
  } catch (const ThresholdError& e) {
    j["error"] = e.what();
    j["verdict"] = "fail";
    write_file(cfg.out_dir / "solve.json", dump(j));
    out << "solve: " << e.what() << "\n";
    return 1;
  } catch (const PenaltyDivergence& e) {
    j["error"] = e.what();
    j["verdict"] = "fail";
    write_file(cfg.out_dir / "trace.csv", to_csv(e.trace()));
    write_file(cfg.out_dir / "solve.json", dump(j));
    out << "solve: " << e.what() << "\n";
    return 1;
  }

  const StationarityReport limit =
      limit_stationarity_check(p, result.x, result.y, result.lambda, cfg.eps, cfg.limit_tolerance);
  const bool ok = limit.pass && !result.trace.lambda_cap_hit;
  j["summary"] = summary_json(result, limit);
  j["verdict"] = ok ? "pass" : "fail";
  write_file(cfg.out_dir / "trace.csv", to_csv(result.trace));
  write_file(cfg.out_dir / "solve.json", dump(j));

  out << "solve " << p.name << " (" << to_string(cfg.smoother) << ", eps " << detail::num(cfg.eps)
      << "): x = " << detail::vec(result.x) << ", y = " << detail::vec(result.y) << ", lambda = "
      << detail::num(result.lambda) << "\n  " << limit.message << "\n";
  if (result.trace.lambda_cap_hit) out << "  warning: possible ENNAMCQ failure at the limit\n";
  return ok ? 0 : 1;
}

}  // namespace vfsmooth
