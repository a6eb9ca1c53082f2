#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dietbo/pareto.hpp"
#include "dietbo/polytope.hpp"
#include "dietbo/problem.hpp"
#include "dietbo/random.hpp"
#include "dietbo/types.hpp"

namespace dietbo {

struct Observation {
  Vector x;
  ObjectiveVector y;
  int iteration = 0;  // 0 for the initial design
  int region = -1;    // originating trust region, -1 when not applicable
};

struct RegionTelemetry {
  int id = 0;
  double length = 0.0;
  int success = 0;
  int failure = 0;
  int local_points = 0;
  bool restarted = false;  // replaced this round after falling below L_min
};

struct IterationMetrics {
  int iteration = 0;
  int evaluations = 0;  // cumulative, initial design included
  double hypervolume = 0.0;
  int cardinality = 0;
  double dir = 0.0;  // NaN while the front has fewer than two members
  double proposal_seconds = 0.0;
  bool no_improvement = false;
  int candidates = 0;             // candidate locations generated this round
  int infeasible_candidates = 0;  // must stay zero
  std::vector<RegionTelemetry> regions;
};

struct RunRecord {
  std::string engine;
  std::string group;  // grid-point label
  std::uint64_t seed = 0;
  Point3 ref{0.0, 0.0, 0.0};
  std::vector<Observation> history;
  std::vector<IterationMetrics> iterations;
  std::map<std::string, std::string> metadata;

  /// Archive built from the observations up to and including `iteration`.
  ParetoArchive archive_at(int iteration) const;
  ParetoArchive final_archive() const;
  /// Evaluations made by the end of `iteration`.
  int evaluations_at(int iteration) const;
};

/// Stream tags shared by both engines so a seed yields the same design and noise.
inline constexpr std::uint64_t kDesignStream = 1;
inline constexpr std::uint64_t kNoiseStream = 5;

/// Uniform initial design of n evaluated points over the feasible polytope.
std::vector<Observation> initial_design(const ProblemInstance& problem, const PolytopeSpec& spec, int n,
                                        int thinning, Rng& rng, Rng& noise);

/// Hypervolume, cardinality and DIR of `archive`.
IterationMetrics snapshot(const ParetoArchive& archive, const ReferenceVectorSet& V, int iteration,
                          int evaluations);

/// Shortest round-trip text for a double ("nan", "inf" and "-inf" included).
std::string format_double(double v);

/// history_<seed>.csv: iteration, region, x..., cost, lysine, energy.
void write_history_csv(const RunRecord& rec, const ProblemInstance& inst,
                       const std::filesystem::path& path);
/// Rebuilds the history part of a record; `ref` must be restored separately.
std::vector<Observation> read_history_csv(const std::filesystem::path& path, Eigen::Index dim);

/// archive_<seed>.csv: final non-dominated set, x vector and raw objectives.
void write_archive_csv(const RunRecord& rec, const ProblemInstance& inst,
                       const std::filesystem::path& path);

/// Per-round trust-region telemetry in long format.
void write_regions_csv(const RunRecord& rec, const std::filesystem::path& path);

}  // namespace dietbo
