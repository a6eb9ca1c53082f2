#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dietbo/mobo.hpp"
#include "dietbo/morbo.hpp"
#include "dietbo/problem.hpp"
#include "dietbo/record.hpp"

namespace dietbo::harness {

enum class Phase { Convergence, HparamGrid, MfpCompare, Batch };
enum class EngineChoice { Morbo, Mobo, Both };

std::string to_string(Phase p);
Phase parse_phase(std::string_view text);
std::string to_string(EngineChoice e);
EngineChoice parse_engine(std::string_view text);

/// Published reference solution: raw objectives and, optionally, proportions.
struct MfpReference {
  ObjectiveVector y;
  std::optional<Vector> x;
};

/// [objectives] cost/lysine/energy keys plus an optional [solution] table
/// (name, proportion) matched against the instance ingredient names; the
/// solution is skipped when no instance is given.
MfpReference parse_mfp(std::string_view text, const std::string& source, const ProblemInstance* inst = nullptr);
MfpReference load_mfp(const std::filesystem::path& path, const ProblemInstance* inst = nullptr);
/// Taken from the instance's reference_profile / reference_solution sections.
std::optional<MfpReference> mfp_from_instance(const ProblemInstance& inst);

struct ExperimentConfig {
  Phase phase = Phase::Convergence;
  EngineChoice engine = EngineChoice::Morbo;
  std::filesystem::path instance_path;
  std::vector<std::uint64_t> seeds;  // 1..30 when left empty by the file
  morbo::Config morbo;
  mobo::Config mobo;
  std::vector<int> n_ts_grid{512, 1024, 2048, 4096};
  std::vector<int> n_tr_grid{2, 5, 8};
  std::vector<double> l_init_grid{0.1, 0.2, 0.4};
  std::vector<int> q_grid{1, 2, 3};
  int k = 0;  // 0 selects the phase default (150 for convergence, 50 otherwise)
  std::optional<MfpReference> mfp;
  std::filesystem::path output_dir;
  int workers = 1;
  bool record_timing = false;
  bool cumulative_categories = false;

  int phase_k() const;
  void validate() const;

  /// Relative instance, MFP and output paths resolve against `base_dir`. A
  /// phase override fills a missing phase key and must match a present one.
  static ExperimentConfig parse(std::string_view text, const std::string& source,
                                const std::filesystem::path& base_dir,
                                std::optional<Phase> phase_override = std::nullopt);
  static ExperimentConfig load(const std::filesystem::path& path,
                               std::optional<Phase> phase_override = std::nullopt);
};

struct GridPoint {
  std::string engine;  // "morbo" or "mobo"
  std::string label;   // also the output subdirectory
  morbo::Config morbo;
  mobo::Config mobo;
};

/// Grid points of the configured phase, in output order.
std::vector<GridPoint> expand_grid(const ExperimentConfig& config);

struct RunFailure {
  std::string engine;
  std::string group;
  std::uint64_t seed = 0;
  std::string message;
};

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::uint64_t hash = 0;
};

struct PhaseResult {
  std::vector<RunRecord> records;
  std::vector<RunFailure> failures;
  std::vector<ManifestEntry> manifest;
};

/// Runs every grid point x seed (up to `workers` at once) and, when
/// output_dir is set, writes the reports.
PhaseResult run_phase(const ExperimentConfig& config, const ProblemInstance& instance);

/// Category order: none, C, L, E, CL, CE, LE, CLE.
inline constexpr std::array<const char*, 8> kCategoryNames = {"none", "C", "L", "E", "CL", "CE", "LE", "CLE"};

/// Exclusive category of a solution from the objectives it strictly improves.
int category_of(const ObjectiveVector& y, const ObjectiveVector& mfp);
/// Cumulative membership: every non-empty category whose objectives are all improved.
std::array<bool, 8> categories_containing(const ObjectiveVector& y, const ObjectiveVector& mfp);

struct CategoryStats {
  double percent = 0.0;  // mean over runs of the per-run share of the front
  int solutions = 0;     // pooled over runs
  Point3 improvement{0.0, 0.0, 0.0};  // mean distance to the MFP, in percent of the range
};

struct ComparisonRow {
  std::string engine;
  std::string group;
  int checkpoint = 0;
  int runs = 0;
  int dominating_runs = 0;
  std::array<CategoryStats, 8> categories;
};

struct ComparisonReport {
  bool cumulative = false;
  ObjectiveRanges ranges{};
  std::vector<ComparisonRow> rows;
};

/// Per-objective min/max of raw values over every observation in `records`.
ObjectiveRanges observed_ranges(const std::vector<RunRecord>& records);

/// 10, 20, 30, 40, 50 plus the last iteration of every (engine, group).
std::vector<int> comparison_checkpoints(const std::vector<RunRecord>& records);

/// Compares final non-dominated sets at each checkpoint against the MFP,
/// grouped by (engine, group) in first-seen order.
ComparisonReport compare_with_reference(const std::vector<RunRecord>& records, const ObjectiveVector& mfp,
                                        const ObjectiveRanges& ranges,
                                        const std::vector<int>& checkpoints = {10, 20, 30, 40, 50},
                                        bool cumulative = false);

void write_comparison_csv(const ComparisonReport& report, const std::filesystem::path& path);

/// Writes runs.csv, summary.csv, per-run history/archive files, comparison.csv
/// (when an MFP is given), SVG plots and manifest.txt. Returns the manifest.
std::vector<ManifestEntry> emit_reports(const std::vector<RunRecord>& records,
                                        const std::vector<RunFailure>& failures, const ExperimentConfig& config,
                                        const ProblemInstance& instance, const std::filesystem::path& out_dir);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// Rebuilds records from the records.csv index written by emit_reports.
std::vector<RunRecord> load_records(const std::filesystem::path& run_dir);

struct Series {
  std::string label;
  std::vector<double> x, mean, sd;
};

/// Mean line with a shaded +-1 sd band per series.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series, const std::string& data_note);

}  // namespace dietbo::harness
