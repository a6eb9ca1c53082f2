// dietbo: run experiment phases, compare runs against the MFP solution and
// check instance files.
//
// Exit codes: 0 success, 1 run failures, 2 config or instance errors.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "dietbo/error.hpp"
#include "dietbo/harness.hpp"
#include "dietbo/problem.hpp"

using namespace dietbo;

namespace {

int cmd_run(const std::string& phase, const std::string& config_path, const std::string& out,
            int workers, const std::vector<std::uint64_t>& seeds) {
  harness::ExperimentConfig cfg;
  ProblemInstance inst;
  try {
    cfg = harness::ExperimentConfig::load(config_path, harness::parse_phase(phase));
    if (!out.empty()) cfg.output_dir = out;
    if (workers > 0) cfg.workers = workers;
    if (!seeds.empty()) cfg.seeds = seeds;
    if (cfg.output_dir.empty()) throw ValidationError("out", "no output directory given");
    cfg.validate();
    inst = load_instance(cfg.instance_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  const auto grid = harness::expand_grid(cfg);
  std::cerr << "phase " << harness::to_string(cfg.phase) << ": " << grid.size() << " grid points x "
            << cfg.seeds.size() << " seeds, " << cfg.workers << " worker(s)\n";
  harness::PhaseResult res;
  try {
    res = harness::run_phase(cfg, inst);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  for (const auto& f : res.failures)
    std::cerr << "run failed: " << f.engine << ' ' << f.group << " seed " << f.seed << ": " << f.message << '\n';
  std::cout << "wrote " << res.manifest.size() << " files to " << cfg.output_dir.string() << '\n';
  return res.failures.empty() ? 0 : 1;
}

int cmd_compare(const std::string& runs, const std::string& mfp_path, bool cumulative, std::string out) {
  try {
    const auto records = harness::load_records(runs);
    const auto mfp = harness::load_mfp(mfp_path);
    const auto rep = harness::compare_with_reference(records, mfp.y, harness::observed_ranges(records),
                                                     harness::comparison_checkpoints(records), cumulative);
    if (out.empty()) out = (std::filesystem::path(runs) / "comparison_mfp.csv").string();
    harness::write_comparison_csv(rep, out);
    std::printf("%-6s %-10s %4s %6s", "engine", "group", "k", "runs");
    for (const char* c : harness::kCategoryNames) std::printf(" %7s", c);
    std::printf(" %9s\n", "dominate");
    for (const auto& row : rep.rows) {
      std::printf("%-6s %-10s %4d %6d", row.engine.c_str(), row.group.c_str(), row.checkpoint, row.runs);
      for (const auto& c : row.categories) std::printf(" %7.2f", c.percent);
      std::printf(" %9d\n", row.dominating_runs);
    }
    std::cout << "wrote " << out << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_validate(const std::string& path) {
  ProblemInstance inst;
  try {
    inst = load_instance(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << path << ": " << inst.dim() << " ingredients, " << inst.n_nutrients() << " nutrient constraints\n";
  if (!inst.reference_solution) {
    std::cout << "no reference solution present\n";
    return 0;
  }
  bool ok = true;
  const Vector& x = *inst.reference_solution;
  const double sum = x.sum();
  std::printf("reference solution sum %.12f\n", sum);
  if (std::abs(sum - 1.0) > 1e-9) {
    std::cout << "  proportions do not sum to 1 within 1e-9\n";
    ok = false;
  }
  const auto rep = check_feasibility(inst, x, 1e-6);
  for (const auto& v : rep.violations)
    std::printf("  violated %s %s by %.3g\n", to_string(v.kind), v.name.c_str(), v.signed_violation);
  ok = ok && rep.feasible;
  const auto y = evaluate(inst, x);
  for (int j = 0; j < kObjectives; ++j) {
    const auto it = inst.reference_profile.find(kObjectiveNames[j]);
    if (it == inst.reference_profile.end()) continue;
    const double rel = std::abs(y.y[j] - it->second) / std::abs(it->second);
    std::printf("  %-8s computed %10.4f reported %10.4f rel %.4f%s\n", kObjectiveNames[j], y.y[j], it->second, rel,
                rel <= 0.005 ? "" : "  MISMATCH");
    ok = ok && rel <= 0.005;
  }
  const Vector prof = nutrient_profile(inst, x);
  for (Eigen::Index i = 0; i < inst.n_nutrients(); ++i) {
    const auto it = inst.reference_profile.find(inst.nutrient_names[i]);
    if (it == inst.reference_profile.end()) continue;
    std::printf("  %-20s computed %10.4f reported %10.4f\n", inst.nutrient_names[i].c_str(), prof[i], it->second);
  }
  std::cout << (ok ? "consistent\n" : "inconsistent\n");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained multi-objective Bayesian optimization for diet formulation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment phase");
  std::string phase, config, out;
  int workers = 0;
  std::vector<std::uint64_t> seeds;
  run->add_option("--phase", phase, "convergence, hparam-grid, mfp-compare or batch")->required();
  run->add_option("--config", config, "experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_option("--workers", workers, "concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--seeds", seeds, "comma-separated seeds (overrides the config)")->delimiter(',');

  auto* cmp = app.add_subcommand("compare", "Compare final Pareto sets with the MFP solution");
  std::string runs, mfp, cmp_out;
  bool cumulative = false;
  cmp->add_option("--runs", runs, "output directory of a run")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--mfp", mfp, "MFP reference file")->required()->check(CLI::ExistingFile);
  cmp->add_option("--out", cmp_out, "comparison CSV path");
  cmp->add_flag("--cumulative", cumulative, "count a solution in every category it satisfies");

  auto* val = app.add_subcommand("validate-instance", "Check an instance file");
  std::string file;
  val->add_option("--file", file, "instance file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*run) return cmd_run(phase, config, out, workers, seeds);
  if (*cmp) return cmd_compare(runs, mfp, cumulative, cmp_out);
  return cmd_validate(file);
}
