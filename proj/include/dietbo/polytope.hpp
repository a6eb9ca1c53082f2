#pragma once

#include <string>
#include <vector>

#include "dietbo/problem.hpp"
#include "dietbo/random.hpp"
#include "dietbo/types.hpp"

namespace dietbo {

/// {x : 1'x = 1, row_lower <= R x <= row_upper, lower <= x <= upper}.
///
/// Trust-region boxes live in normalized coordinates u = x / scale; a box of
/// edge L around u_c is clipped to [0,1]^d and folded into lower/upper.
struct PolytopeSpec {
  Matrix rows;  // a x d
  Vector row_lower;
  Vector row_upper;
  Vector lower;
  Vector upper;
  Vector scale;
  std::vector<std::string> row_names;
  std::vector<std::string> var_names;
  bool has_box = false;
  Vector box_center;  // normalized
  double box_half_edge = 0.0;

  static PolytopeSpec from_instance(const ProblemInstance& inst);

  Eigen::Index dim() const { return lower.size(); }
  /// Same polytope intersected with the box of edge `edge` around `center`.
  PolytopeSpec with_box(const Vector& center, double edge) const;
  bool contains(const Vector& x, double tol = kFeasibilityTol) const;
  void validate() const;
};

struct SampleResult {
  Matrix points;  // d x n, one sample per column
  Eigen::Index requested = 0;
  Eigen::Index shortfall = 0;  // requested - produced when the chain stalled
  bool stalled = false;
  bool fallback = false;  // box was degenerate; points are copies of the start
};

inline Eigen::Index default_thinning(Eigen::Index d) { return 5 * d; }

/// Max-min relative slack search started from the bound-proportional point.
/// Throws InfeasibleError with the most violated constraint when it fails.
Vector find_interior_point(const PolytopeSpec& spec, Rng& rng);

/// Pair-direction hit-and-run: moves along e_i - e_j so 1'x is preserved and
/// the stationary law is uniform on the polytope. thinning <= 0 selects the
/// default.
SampleResult hit_and_run(const PolytopeSpec& spec, const Vector& x0, Eigen::Index n,
                         Eigen::Index thinning, Rng& rng);

/// hit_and_run on spec intersected with the box of edge L around `center`.
SampleResult sample_in_trust_region(const PolytopeSpec& spec, const Vector& center, double L,
                                    Eigen::Index n, Rng& rng, Eigen::Index thinning = 0);

/// Infinity-norm distance in normalized coordinates.
double normalized_distance(const PolytopeSpec& spec, const Vector& a, const Vector& b);

}  // namespace dietbo
