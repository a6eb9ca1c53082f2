#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dietbo/gp.hpp"
#include "dietbo/polytope.hpp"
#include "dietbo/problem.hpp"
#include "dietbo/random.hpp"
#include "dietbo/record.hpp"

namespace dietbo::mobo {

using Models = std::array<GaussianProcess, kObjectives>;

struct Config {
  int n_init = 50;
  int k = 50;
  int n_mc = 128;
  int q = 1;
  int candidate_pool = 2048;
  std::uint64_t seed = 0;

  /// Extra candidates drawn in boxes of edge refine_edge around the observed
  /// non-dominated points, on their own stream; 0 disables.
  int refine_pool = 512;
  double refine_edge = 0.1;

  int n_features = 256;   // random features per pathwise draw
  int exact_limit = 256;  // observed + candidates up to this size are drawn exactly
  int thinning = 0;
  double ref_margin = 0.1;
  Smoothness smoothness = Smoothness::Matern52;
  int dir_vectors = 78;
  bool record_timing = false;

  void validate() const;
};

/// Per-replicate posterior samples shared by every candidate. Columns of
/// `candidates[r]` are the sampled standardized objectives of each candidate.
struct NehviSamples {
  Point3 ref{0.0, 0.0, 0.0};
  std::vector<Matrix> fronts;      // 3 x t_r, sampled non-dominated observed values
  std::vector<Matrix> candidates;  // 3 x c
};

struct AcquisitionOptions {
  int n_features = 256;
  int exact_limit = 256;
};

/// Draws n_mc joint samples at observed and candidate inputs (columns of
/// normalized inputs) and rebuilds each replicate's sampled front.
NehviSamples draw_nehvi_samples(const Models& models, const Matrix& observed_u, const Matrix& candidates_u,
                                const Point3& ref, int n_mc, Rng& rng, const AcquisitionOptions& opt = {});

/// Mean HVI over replicates for every candidate.
Vector score(const NehviSamples& s);

/// Adds candidate `c`'s sampled values to every replicate's front.
void condition_on(NehviSamples& s, Eigen::Index c);

/// Monte-Carlo NEHVI scores of raw candidate columns given the history.
Vector qnehvi(const Models& models, const Matrix& candidates, const std::vector<Observation>& history,
              const Vector& scale, const Point3& ref, int n_mc, Rng& rng, const AcquisitionOptions& opt = {});

struct Selection {
  std::vector<Vector> points;
  std::vector<double> scores;  // score at the time each point was chosen
  std::vector<Eigen::Index> pool_index;
  int pool_size = 0;
};

/// Scores a hit-and-run pool (uniform part first, then the refinement part)
/// and returns q points by greedy conditioning. Pool parts and acquisition
/// draws use separate streams of `rng`.
Selection optimize_acquisition(const Models& models, const std::vector<Observation>& history,
                               const PolytopeSpec& spec, const Point3& ref, const Config& config, Rng& rng);

/// Fits the three models on all of `history` in normalized inputs.
Models fit_models(const std::vector<Observation>& history, const Vector& scale, const Config& config,
                  const Models* previous, std::uint64_t seed);

RunRecord run(const ProblemInstance& problem, const Config& config);

}  // namespace dietbo::mobo
