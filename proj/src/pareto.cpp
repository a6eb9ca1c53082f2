#include "dietbo/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dietbo/error.hpp"
#include "dietbo/kernels.hpp"

namespace dietbo {

namespace {

std::string describe(const Point3& p) {
  return "(" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ", " + std::to_string(p[2]) + ")";
}

// 2-D staircase: x ascending, y strictly descending; area above (rx, ry).
class Staircase {
 public:
  Staircase(double rx, double ry) : rx_(rx), ry_(ry) {}

  // Inserts (x, y) and returns the area gained.
  double insert(double x, double y) {
    // First step with x' >= x.
    auto it = std::lower_bound(steps_.begin(), steps_.end(), x,
                               [](const std::array<double, 2>& s, double v) { return s[0] < v; });
    const double h_right = it == steps_.end() ? ry_ : (*it)[1];
    if (h_right >= y) return 0.0;
    // Steps left of x with y' <= y are covered by the new point.
    auto first = it;
    while (first != steps_.begin() && (*(first - 1))[1] <= y) --first;
    double prev_x = first == steps_.begin() ? rx_ : (*(first - 1))[0];
    double gain = 0.0;
    for (auto k = first; k != it; ++k) {
      gain += ((*k)[0] - prev_x) * (y - (*k)[1]);
      prev_x = (*k)[0];
    }
    gain += (x - prev_x) * (y - h_right);
    // An equal-x step with lower height is also covered.
    auto last = it;
    if (last != steps_.end() && (*last)[0] == x) ++last;
    it = steps_.erase(first, last);
    steps_.insert(it, {x, y});
    return gain;
  }

 private:
  double rx_, ry_;
  std::vector<std::array<double, 2>> steps_;
};

}  // namespace

bool weakly_dominates(const Point3& a, const Point3& b) {
  return a[0] >= b[0] && a[1] >= b[1] && a[2] >= b[2];
}

bool dominates(const Point3& a, const Point3& b) {
  return weakly_dominates(a, b) && (a[0] > b[0] || a[1] > b[1] || a[2] > b[2]);
}

double hypervolume_exact(const std::vector<Point3>& front, const Point3& ref) {
  for (const auto& p : front)
    if (!(p[0] >= ref[0] && p[1] >= ref[1] && p[2] >= ref[2]))
      throw PreconditionError("point " + describe(p) + " does not dominate the reference point");
  if (front.empty()) return 0.0;
  std::vector<Point3> pts = front;
  std::sort(pts.begin(), pts.end(), [](const Point3& a, const Point3& b) { return a[2] > b[2]; });
  Staircase stair(ref[0], ref[1]);
  double area = 0.0, volume = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    area += stair.insert(pts[i][0], pts[i][1]);
    const double z_next = i + 1 < pts.size() ? pts[i + 1][2] : ref[2];
    volume += area * (pts[i][2] - z_next);
  }
  return volume;
}

double hypervolume_exact(const std::vector<std::array<double, 2>>& front,
                         const std::array<double, 2>& ref) {
  std::vector<Point3> lifted;
  lifted.reserve(front.size());
  for (const auto& p : front) lifted.push_back({p[0], p[1], 1.0});
  return hypervolume_exact(lifted, {ref[0], ref[1], 0.0});
}

McEstimate hypervolume_mc(const std::vector<Point3>& front, const Point3& ref, std::size_t n,
                          Rng& rng) {
  if (n == 0) throw PreconditionError("hypervolume_mc needs at least one sample");
  for (const auto& p : front)
    if (!(p[0] >= ref[0] && p[1] >= ref[1] && p[2] >= ref[2]))
      throw PreconditionError("point " + describe(p) + " does not dominate the reference point");
  if (front.empty()) return {0.0, 0.0};
  Point3 ideal = ref;
  for (const auto& p : front)
    for (int j = 0; j < kObjectives; ++j) ideal[j] = std::max(ideal[j], p[j]);
  const double box = (ideal[0] - ref[0]) * (ideal[1] - ref[1]) * (ideal[2] - ref[2]);
  if (box == 0.0) return {0.0, 0.0};
  Matrix F(3, front.size());
  for (std::size_t i = 0; i < front.size(); ++i)
    for (int j = 0; j < kObjectives; ++j) F(j, i) = front[i][j];
  Matrix S(3, n);
  for (std::size_t c = 0; c < n; ++c)
    for (int j = 0; j < kObjectives; ++j) S(j, c) = ref[j] + uniform01(rng) * (ideal[j] - ref[j]);
  const auto mask = kernels::parallel::dominated_mask(F, S);
  const double hits = std::accumulate(mask.begin(), mask.end(), 0.0);
  const double p = hits / static_cast<double>(n);
  return {p * box, box * std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

double hvi(const std::vector<Point3>& front, const Point3& y, const Point3& ref) {
  if (!(y[0] >= ref[0] && y[1] >= ref[1] && y[2] >= ref[2]))
    throw PreconditionError("point " + describe(y) + " does not dominate the reference point");
  for (const auto& p : front)
    if (weakly_dominates(p, y)) return 0.0;
  // The gain is y's box minus the part of it the front already covers.
  std::vector<Point3> clipped;
  clipped.reserve(front.size());
  for (const auto& p : front)
    clipped.push_back({std::min(p[0], y[0]), std::min(p[1], y[1]), std::min(p[2], y[2])});
  const double box = (y[0] - ref[0]) * (y[1] - ref[1]) * (y[2] - ref[2]);
  return std::max(0.0, box - hypervolume_exact(clipped, ref));
}

std::vector<double> hvc(const std::vector<Point3>& front, const Point3& ref) {
  const double total = hypervolume_exact(front, ref);
  std::vector<double> out(front.size());
  std::vector<Point3> rest;
  for (std::size_t i = 0; i < front.size(); ++i) {
    rest.clear();
    for (std::size_t j = 0; j < front.size(); ++j)
      if (j != i) rest.push_back(front[j]);
    out[i] = std::max(0.0, total - hypervolume_exact(rest, ref));
  }
  return out;
}

Point3 reference_point(const std::vector<Point3>& observations, double margin) {
  if (observations.empty()) throw PreconditionError("reference_point needs observations");
  Point3 lo = observations.front(), hi = observations.front();
  for (const auto& p : observations)
    for (int j = 0; j < kObjectives; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  Point3 r;
  for (int j = 0; j < kObjectives; ++j) r[j] = lo[j] - margin * ((hi[j] - lo[j]) + 1e-6);
  return r;
}

std::vector<std::size_t> nondominated_indices(const std::vector<Point3>& points) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i])) keep = false;
      if (j < i && points[j] == points[i]) keep = false;
    }
    if (keep) out.push_back(i);
  }
  return out;
}

ParetoArchive::Insert ParetoArchive::insert(const Vector& x, const ObjectiveVector& y,
                                            std::int64_t id) {
  const Point3 s = y.standardized();
  if (!(s[0] > ref_[0] && s[1] > ref_[1] && s[2] > ref_[2])) return Insert::BelowReference;
  for (const auto& e : entries_) {
    if (e.s == s) return Insert::Duplicate;
    if (weakly_dominates(e.s, s)) return Insert::Dominated;
  }
  std::erase_if(entries_, [&](const Entry& e) { return dominates(s, e.s); });
  entries_.push_back({x, y, s, id});
  return Insert::Accepted;
}

std::vector<Point3> ParetoArchive::front() const {
  std::vector<Point3> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.s);
  return out;
}

std::pair<ParetoArchive, ParetoArchive::Insert> update_archive(ParetoArchive archive,
                                                               const Vector& x,
                                                               const ObjectiveVector& y) {
  const auto flag = archive.insert(x, y);
  return {std::move(archive), flag};
}

const char* to_string(ParetoArchive::Insert flag) {
  switch (flag) {
    case ParetoArchive::Insert::Accepted: return "accepted";
    case ParetoArchive::Insert::Dominated: return "dominated";
    case ParetoArchive::Insert::Duplicate: return "duplicate";
    case ParetoArchive::Insert::BelowReference: return "below-reference";
  }
  return "?";
}

ReferenceVectorSet generate_reference_vectors(int u) {
  if (u < kObjectives) throw PreconditionError("need at least 3 reference vectors");
  auto lattice_size = [](int h) { return (h + 1) * (h + 2) / 2; };
  int H = 1;
  while (lattice_size(H + 1) <= u) ++H;
  // Pick whichever neighbouring lattice is closer; ties go to the smaller one.
  if (lattice_size(H) != u && lattice_size(H + 1) - u < u - lattice_size(H)) ++H;
  ReferenceVectorSet set;
  set.lattice = H;
  for (int i = H; i >= 0; --i)
    for (int j = H - i; j >= 0; --j) {
      const int k = H - i - j;
      const double n = std::sqrt(double(i * i + j * j + k * k));
      set.vectors.push_back({i / n, j / n, k / n});
    }
  return set;
}

std::vector<int> dir_coverage(const std::vector<Point3>& front, const ReferenceVectorSet& V) {
  if (front.size() < 2) throw PreconditionError("DIR needs at least two front members");
  Point3 lo = front.front(), hi = front.front();
  for (const auto& p : front)
    for (int j = 0; j < kObjectives; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  std::vector<Point3> unit(front.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    double norm = 0.0;
    for (int j = 0; j < kObjectives; ++j) {
      const double range = hi[j] - lo[j];
      // Directions are taken from the ideal point, as in the minimization form.
      unit[i][j] = range > 0 ? (hi[j] - front[i][j]) / range : 0.0;
      norm += unit[i][j] * unit[i][j];
    }
    norm = std::sqrt(norm);
    for (int j = 0; j < kObjectives; ++j) unit[i][j] = norm > 0 ? unit[i][j] / norm : 0.0;
  }
  std::vector<int> coverage(front.size(), 0);
  for (const auto& v : V.vectors) {
    std::size_t best = 0;
    double best_cos = -2.0;
    for (std::size_t i = 0; i < unit.size(); ++i) {
      const double c = v[0] * unit[i][0] + v[1] * unit[i][1] + v[2] * unit[i][2];
      if (c > best_cos) {
        best_cos = c;
        best = i;
      }
    }
    ++coverage[best];
  }
  return coverage;
}

double dir_from_coverage(const std::vector<int>& coverage) {
  const auto t = static_cast<double>(coverage.size());
  if (coverage.size() < 2) throw PreconditionError("DIR needs at least two front members");
  const double u = std::accumulate(coverage.begin(), coverage.end(), 0.0);
  const double mean = u / t;
  double ss = 0.0;
  for (int c : coverage) ss += (c - mean) * (c - mean);
  const double sd = std::sqrt(ss / t);
  return sd / ((u / t) * std::sqrt(t - 1.0));
}

double dir(const std::vector<Point3>& front, const ReferenceVectorSet& V) {
  return dir_from_coverage(dir_coverage(front, V));
}

Point3 improvement_distance(const ObjectiveVector& y, const ObjectiveVector& mfp,
                            const ObjectiveRanges& ranges) {
  Point3 out;
  for (int j = 0; j < kObjectives; ++j) {
    const double range = ranges[j].second - ranges[j].first;
    if (!(range > 0)) throw PreconditionError(std::string("zero observed range for ") + kObjectiveNames[j]);
    out[j] = kObjectiveSense[j] * (y.y[j] - mfp.y[j]) / range;
  }
  return out;
}

}  // namespace dietbo
