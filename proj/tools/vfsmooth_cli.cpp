// vfsmooth command-line runner.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vfsmooth/bilevel_solver.hpp"
#include "vfsmooth/experiment.hpp"

using namespace vfsmooth;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<int> level;
  std::optional<double> mu0;
  std::optional<double> theta;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  std::optional<int> K;
  std::vector<double> mus;
  std::vector<double> xs;
  std::optional<double> anchor;
  std::string smoother;
  std::string problem;
  std::string smoother_pos;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--level", f.level, "quadrature level");
  app->add_option("--mu0", f.mu0, "initial smoothing parameter");
  app->add_option("--theta", f.theta, "schedule ratio");
  app->add_option("--eps", f.eps, "value-function tolerance");
  app->add_option("--seed", f.seed, "seed for randomized spot checks");
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (!f.problem.empty()) cfg.problem = f.problem;
  if (!f.smoother_pos.empty()) cfg.smoother = parse_smoother(f.smoother_pos);
  if (!f.smoother.empty()) cfg.smoother = parse_smoother(f.smoother);
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.level) cfg.level = *f.level;
  if (f.mu0) cfg.mu0 = *f.mu0;
  if (f.theta) cfg.theta = *f.theta;
  if (f.eps) cfg.eps = *f.eps;
  if (f.seed) cfg.seed = *f.seed;
  if (f.K) cfg.K = *f.K;
  if (!f.mus.empty()) cfg.mus = f.mus;
  if (!f.xs.empty()) {
    cfg.xs.clear();
    for (double x : f.xs) cfg.xs.push_back(Vec::Constant(1, x));
  }
  if (f.anchor) cfg.anchor = Vec::Constant(1, *f.anchor);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-function smoothing laboratory for simple bilevel problems"};
  app.require_subcommand(1);
  Flags f;
  bool json = false;

  auto* list = app.add_subcommand("list-problems", "list the built-in problem instances");
  list->add_flag("--json", json, "print JSON instead of a table");

  auto* scan = app.add_subcommand("smooth-scan", "smoothing error scan over x and mu");
  scan->add_option("smoother", f.smoother_pos, "quad or entropic");
  scan->add_option("problem", f.problem, "instance name");
  scan->add_option("--mu", f.mus, "smoothing parameters");
  scan->add_option("--x", f.xs, "x grid (n = 1)");
  add_common(scan, f);

  auto* cons = app.add_subcommand("consistency", "gradient consistency probe");
  cons->add_option("smoother", f.smoother_pos, "quad or entropic");
  cons->add_option("problem", f.problem, "instance name");
  cons->add_option("--anchor", f.anchor, "anchor point (n = 1)");
  add_common(cons, f);

  auto* solve = app.add_subcommand("solve", "solve the smoothed value-function program");
  solve->add_option("problem", f.problem, "instance name");
  solve->add_option("--smoother", f.smoother, "quad or entropic");
  solve->add_option("--K", f.K, "last schedule index");
  add_common(solve, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (list->parsed()) return cmd_list_problems(json, std::cout);
    const ExperimentConfig cfg = build_config(f);
    if (scan->parsed()) return cmd_smooth_scan(cfg, std::cout);
    if (cons->parsed()) return cmd_consistency(cfg, std::cout);
    return cmd_solve(cfg, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  }
}
