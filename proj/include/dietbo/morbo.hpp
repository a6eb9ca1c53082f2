#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "dietbo/gp.hpp"
#include "dietbo/pareto.hpp"
#include "dietbo/polytope.hpp"
#include "dietbo/problem.hpp"
#include "dietbo/random.hpp"
#include "dietbo/record.hpp"

namespace dietbo::morbo {

struct Config {
  int n_tr = 5;
  int n_ts = 4096;
  double l_init = 0.4;
  double l_max = 1.0;
  double l_min = 0.01;
  int tau_succ = 3;
  int tau_fail = 0;  // 0 selects ceil(d / q)
  int q = 1;
  int k = 150;
  int n_init = 50;
  std::uint64_t seed = 0;

  int thompson_features = 256;
  int exact_limit = 256;  // joint sets up to this size are drawn exactly
  int thinning = 0;       // hit-and-run thinning, 0 selects 5 d
  double ref_margin = 0.1;
  Smoothness smoothness = Smoothness::Matern52;
  /// Hyperparameters are re-optimized when the local data count moves by this
  /// fraction since the last search; otherwise the model is re-conditioned.
  double refit_growth = 0.1;
  int dir_vectors = 78;
  bool record_timing = false;

  int effective_tau_fail(Eigen::Index d) const;
  void validate() const;
};

struct TrustRegion {
  int id = 0;
  Vector center;              // raw proportions
  std::int64_t center_obs = -1;  // history index of the center
  double length = 0.4;
  int success = 0;
  int failure = 0;
  bool terminated = false;
  std::array<GaussianProcess, kObjectives> models;
  std::vector<std::size_t> local;  // history indices inside the 2L window
  std::size_t searched_at = 0;     // local size at the last hyperparameter search
};

struct State {
  const ProblemInstance* problem = nullptr;
  PolytopeSpec spec;
  Config config;
  std::vector<Observation> history;
  ParetoArchive archive;
  std::vector<TrustRegion> regions;
  int next_region_id = 0;
  int iteration = 0;
};

/// One proposed point and the region it came from.
struct Proposal {
  Vector x;
  int region = -1;
  double hvi = 0.0;  // under the Thompson draw
};

struct Batch {
  std::vector<Proposal> points;
  bool no_improvement = false;
  int candidates = 0;
  int infeasible_candidates = 0;
};

/// Applies the length rule to a region whose counters were just updated.
void update_length(TrustRegion& tr, const Config& config, Eigen::Index d);

/// Scalarized restart score (min_j max(0, y_j - r_j) / lambda_j)^m, where
/// components with lambda_j = 0 are ignored.
double scalarization(const Point3& y, const Point3& ref, const Point3& lambda);

/// Index into `points` with the highest scalarization (ties go to the last).
std::size_t scalarized_argmax(const std::vector<Point3>& points, const Point3& ref, const Point3& lambda);

/// Weight drawn uniformly from the positive part of the unit sphere.
Point3 random_weight(Rng& rng);

/// Builds the regions from a history that already holds the initial design.
State initialize(const ProblemInstance& problem, std::vector<Observation> history, const Config& config,
                 Rng& rng);

/// Picks up to q columns of Y (3 x n, standardized) by greedy HVI; each pick
/// joins the front before the next. Stops early when nothing improves.
std::vector<std::pair<Eigen::Index, double>> greedy_hvi(std::vector<Point3> front, const Matrix& Y,
                                                       const Point3& ref, int q);

Batch propose_batch(const State& state, int q, Rng& rng);

/// Records observations, updates counters, lengths, centers and local models,
/// then restarts terminated regions. Returns ids of restarted regions.
std::vector<int> observe_and_update(State& state, const std::vector<Observation>& observations,
                                    Rng& rng);

/// Replaces `tr` with a fresh region centered by scalarized selection.
void restart_trust_region(State& state, TrustRegion& tr, Rng& rng);

/// Local window of `tr` (edge 2L), padded to two points.
std::vector<std::size_t> local_window(const State& state, const Vector& center, double length);

/// Refits the local models of `tr` on its window.
void refit(const State& state, TrustRegion& tr, bool force_search);

RunRecord run(const ProblemInstance& problem, const Config& config);

}  // namespace dietbo::morbo
