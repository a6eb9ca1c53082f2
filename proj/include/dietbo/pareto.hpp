#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "dietbo/problem.hpp"
#include "dietbo/random.hpp"
#include "dietbo/types.hpp"

namespace dietbo {

// Everything here works in the all-maximize (standardized) orientation.

/// a >= b everywhere and a > b somewhere.
bool dominates(const Point3& a, const Point3& b);
/// a >= b everywhere.
bool weakly_dominates(const Point3& a, const Point3& b);

/// Exact dominated volume above `ref`. Throws PreconditionError when a point
/// lies below `ref` in some coordinate.
double hypervolume_exact(const std::vector<Point3>& front, const Point3& ref);
/// Two-objective variant.
double hypervolume_exact(const std::vector<std::array<double, 2>>& front,
                         const std::array<double, 2>& ref);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Uniform sampling in the box [ref, ideal].
McEstimate hypervolume_mc(const std::vector<Point3>& front, const Point3& ref, std::size_t n,
                          Rng& rng);

/// HV(front + y) - HV(front).
double hvi(const std::vector<Point3>& front, const Point3& y, const Point3& ref);
/// HV(front) - HV(front without i), for each i.
std::vector<double> hvc(const std::vector<Point3>& front, const Point3& ref);

/// ref_j = min_j - margin * (range_j + 1e-6).
Point3 reference_point(const std::vector<Point3>& observations, double margin = 0.1);

/// Indices of the non-dominated members (duplicates keep their first copy).
std::vector<std::size_t> nondominated_indices(const std::vector<Point3>& points);

/// Non-dominated set with a fixed reference point. Points that are weakly
/// dominated by a member, or that do not strictly exceed the reference point
/// in every coordinate, are rejected.
class ParetoArchive {
 public:
  struct Entry {
    Vector x;
    ObjectiveVector y;
    Point3 s;  // standardized y
    std::int64_t id = -1;
  };

  enum class Insert { Accepted, Dominated, Duplicate, BelowReference };

  ParetoArchive() = default;
  explicit ParetoArchive(const Point3& ref) : ref_(ref) {}

  Insert insert(const Vector& x, const ObjectiveVector& y, std::int64_t id = -1);

  const Point3& ref() const { return ref_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<Point3> front() const;
  double hypervolume() const { return hypervolume_exact(front(), ref_); }

 private:
  Point3 ref_{0.0, 0.0, 0.0};
  std::vector<Entry> entries_;
};

/// Value-returning form of ParetoArchive::insert.
std::pair<ParetoArchive, ParetoArchive::Insert> update_archive(ParetoArchive archive,
                                                               const Vector& x,
                                                               const ObjectiveVector& y);

const char* to_string(ParetoArchive::Insert flag);

struct ReferenceVectorSet {
  std::vector<Point3> vectors;
  int lattice = 0;  // simplex-lattice parameter H
  std::size_t size() const { return vectors.size(); }
};

/// Das-Dennis directions. When u is not (H+1)(H+2)/2 the nearest lattice is used.
ReferenceVectorSet generate_reference_vectors(int u);

/// Number of reference vectors whose angularly nearest front member is i,
/// after min-max normalizing the front.
std::vector<int> dir_coverage(const std::vector<Point3>& front, const ReferenceVectorSet& V);
/// popstd(coverage) / ((u / t) * sqrt(t - 1)).
double dir_from_coverage(const std::vector<int>& coverage);
double dir(const std::vector<Point3>& front, const ReferenceVectorSet& V);

/// Per-objective (min, max) in raw units.
using ObjectiveRanges = std::array<std::pair<double, double>, kObjectives>;

/// (y_j - mfp_j) / (max_j - min_j), sign-flipped for minimized objectives.
Point3 improvement_distance(const ObjectiveVector& y, const ObjectiveVector& mfp,
                            const ObjectiveRanges& ranges);

}  // namespace dietbo
