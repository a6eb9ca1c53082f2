#include "dietbo/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "dietbo/error.hpp"

namespace dietbo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Width used to turn absolute slack into relative slack.
double row_width(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi) && hi > lo) return hi - lo;
  double w = 1.0;
  if (std::isfinite(lo)) w = std::max(w, std::abs(lo));
  if (std::isfinite(hi)) w = std::max(w, std::abs(hi));
  return w;
}

struct SlackModel {
  const PolytopeSpec& spec;
  Vector row_w;
  Vector var_w;

  explicit SlackModel(const PolytopeSpec& s) : spec(s) {
    row_w.resize(s.rows.rows());
    for (Eigen::Index k = 0; k < row_w.size(); ++k) row_w[k] = row_width(s.row_lower[k], s.row_upper[k]);
    var_w.resize(s.dim());
    for (Eigen::Index i = 0; i < var_w.size(); ++i) var_w[i] = row_width(s.lower[i], s.upper[i]);
  }

  // Minimum relative slack over rows and variable bounds at x + t v, where
  // g = R x and gv = R v.
  double at(const Vector& x, const Vector& g, const Vector& v, const Vector& gv, double t) const {
    double m = kInf;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      const double gk = g[k] + t * gv[k];
      m = std::min(m, (gk - spec.row_lower[k]) / row_w[k]);
      m = std::min(m, (spec.row_upper[k] - gk) / row_w[k]);
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double xi = x[i] + t * v[i];
      m = std::min(m, (xi - spec.lower[i]) / var_w[i]);
      m = std::min(m, (spec.upper[i] - xi) / var_w[i]);
    }
    return m;
  }
};

// Range of t keeping lower <= x + t v <= upper.
std::pair<double, double> var_chord(const PolytopeSpec& spec, const Vector& x, const Vector& v) {
  double lo = -kInf, hi = kInf;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (v[i] > 0) {
      lo = std::max(lo, (spec.lower[i] - x[i]) / v[i]);
      hi = std::min(hi, (spec.upper[i] - x[i]) / v[i]);
    } else if (v[i] < 0) {
      lo = std::max(lo, (spec.upper[i] - x[i]) / v[i]);
      hi = std::min(hi, (spec.lower[i] - x[i]) / v[i]);
    }
  }
  return {std::min(lo, 0.0), std::max(hi, 0.0)};
}

}  // namespace

PolytopeSpec PolytopeSpec::from_instance(const ProblemInstance& inst) {
  PolytopeSpec s;
  s.rows = inst.composition.transpose();
  s.row_lower = inst.nutrient_lower;
  s.row_upper = inst.nutrient_upper;
  s.lower = Vector::Zero(inst.dim());
  s.upper = inst.ingredient_upper;
  s.scale = inst.ingredient_upper;
  s.row_names = inst.nutrient_names;
  s.var_names = inst.ingredient_names;
  return s;
}

void PolytopeSpec::validate() const {
  const auto d = dim();
  if (d < 2) throw PreconditionError("polytope needs at least two variables");
  if (upper.size() != d || scale.size() != d || rows.cols() != d ||
      row_lower.size() != rows.rows() || row_upper.size() != rows.rows())
    throw DimensionError("inconsistent polytope dimensions");
  if (!rows.allFinite()) throw PreconditionError("constraint rows must be finite");
  if (has_box && !(box_half_edge > 0.0)) throw PreconditionError("box half-edge must be positive");
}

PolytopeSpec PolytopeSpec::with_box(const Vector& center, double edge) const {
  if (center.size() != dim()) throw DimensionError("box center has wrong length");
  if (!(edge > 0.0)) throw PreconditionError("box edge must be positive");
  PolytopeSpec s = *this;
  s.has_box = true;
  s.box_half_edge = edge / 2;
  s.box_center = center.cwiseQuotient(scale);
  for (Eigen::Index i = 0; i < dim(); ++i) {
    const double lo = std::max(0.0, s.box_center[i] - s.box_half_edge) * scale[i];
    const double hi = std::min(1.0, s.box_center[i] + s.box_half_edge) * scale[i];
    s.lower[i] = std::max(lower[i], lo);
    s.upper[i] = std::min(upper[i], hi);
  }
  return s;
}

bool PolytopeSpec::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  if (!(std::abs(x.sum() - 1.0) <= tol)) return false;
  for (Eigen::Index i = 0; i < dim(); ++i)
    if (!(x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)) return false;
  const Vector g = rows * x;
  for (Eigen::Index k = 0; k < g.size(); ++k)
    if (!(g[k] >= row_lower[k] - tol && g[k] <= row_upper[k] + tol)) return false;
  return true;
}

double normalized_distance(const PolytopeSpec& spec, const Vector& a, const Vector& b) {
  return (a - b).cwiseQuotient(spec.scale).cwiseAbs().maxCoeff();
}

Vector find_interior_point(const PolytopeSpec& spec, Rng& rng) {
  spec.validate();
  const auto d = spec.dim();
  const double lo_sum = spec.lower.sum();
  const double width_sum = (spec.upper - spec.lower).sum();
  if ((spec.upper - spec.lower).minCoeff() < 0)
    throw InfeasibleError("variable bounds", -(spec.upper - spec.lower).minCoeff());
  if (lo_sum > 1.0 + kFeasibilityTol) throw InfeasibleError("simplex", lo_sum - 1.0);
  if (lo_sum + width_sum < 1.0 - kFeasibilityTol)
    throw InfeasibleError("simplex", 1.0 - (lo_sum + width_sum));

  Vector x = spec.lower;
  if (width_sum > 0) x += ((1.0 - lo_sum) / width_sum) * (spec.upper - spec.lower);
  Vector g = spec.rows * x;
  const SlackModel slack(spec);
  Vector v(d), gv;
  const Vector zero = Vector::Zero(d);
  double best = slack.at(x, g, zero, Vector::Zero(g.size()), 0.0);

  const Eigen::Index a = std::max<Eigen::Index>(1, spec.rows.rows());
  const Eigen::Index budget = 10 * d * a;
  std::uniform_int_distribution<Eigen::Index> pick(0, d - 1);
  constexpr double kGolden = 0.6180339887498949;
  for (Eigen::Index step = 0; step < budget; ++step) {
    if (step % 2 == 0) {
      const auto i = pick(rng);
      auto j = pick(rng);
      while (j == i) j = pick(rng);
      v.setZero();
      v[i] = 1.0;
      v[j] = -1.0;
    } else {
      v = standard_normal(rng, d);
      v.array() -= v.mean();
    }
    gv = spec.rows * v;
    auto [t0, t1] = var_chord(spec, x, v);
    if (!(t1 - t0 > 1e-15)) continue;
    // The max-min slack is concave in t, so golden-section search finds its peak.
    double a0 = t0, b0 = t1;
    double c = b0 - kGolden * (b0 - a0), e = a0 + kGolden * (b0 - a0);
    double fc = slack.at(x, g, v, gv, c), fe = slack.at(x, g, v, gv, e);
    for (int it = 0; it < 60; ++it) {
      if (fc < fe) {
        a0 = c;
        c = e;
        fc = fe;
        e = a0 + kGolden * (b0 - a0);
        fe = slack.at(x, g, v, gv, e);
      } else {
        b0 = e;
        e = c;
        fe = fc;
        c = b0 - kGolden * (b0 - a0);
        fc = slack.at(x, g, v, gv, c);
      }
    }
    const double t = fc > fe ? c : e;
    const double f = std::max(fc, fe);
    if (f > best) {
      x += t * v;
      x = x.cwiseMax(spec.lower).cwiseMin(spec.upper);
      g = spec.rows * x;
      best = slack.at(x, g, zero, Vector::Zero(g.size()), 0.0);
    }
  }
  // Remove the drift of the sum left by clamping.
  x += ((1.0 - x.sum()) / d) * Vector::Ones(d);
  if (spec.contains(x)) return x;

  g = spec.rows * x;
  std::string worst = "simplex";
  double worst_v = std::abs(x.sum() - 1.0);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double lo_v = spec.row_lower[k] - g[k], hi_v = g[k] - spec.row_upper[k];
    const std::string name = k < static_cast<Eigen::Index>(spec.row_names.size())
                                 ? spec.row_names[k]
                                 : "row " + std::to_string(k);
    if (lo_v > worst_v) worst_v = lo_v, worst = name + " (lower)";
    if (hi_v > worst_v) worst_v = hi_v, worst = name + " (upper)";
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    const std::string name = i < static_cast<Eigen::Index>(spec.var_names.size())
                                 ? spec.var_names[i]
                                 : "x" + std::to_string(i);
    if (spec.lower[i] - x[i] > worst_v) worst_v = spec.lower[i] - x[i], worst = name + " (lower)";
    if (x[i] - spec.upper[i] > worst_v) worst_v = x[i] - spec.upper[i], worst = name + " (upper)";
  }
  throw InfeasibleError(worst, worst_v);
}

SampleResult hit_and_run(const PolytopeSpec& spec, const Vector& x0, Eigen::Index n,
                         Eigen::Index thinning, Rng& rng) {
  spec.validate();
  const auto d = spec.dim();
  if (x0.size() != d) throw DimensionError("hit_and_run: start point has wrong length");
  if (!spec.contains(x0)) throw PreconditionError("hit_and_run: start point is infeasible");
  if (n < 0) throw PreconditionError("hit_and_run: negative sample count");
  if (thinning <= 0) thinning = default_thinning(d);

  SampleResult out;
  out.requested = n;
  out.points.resize(d, n);
  Vector x = x0;
  Vector g = spec.rows * x;
  const auto a = spec.rows.rows();
  const double* R = spec.rows.data();
  // Multiply-shift index draws; the bias is below 2^-50 for any practical d.
  auto index = [&rng](Eigen::Index m) {
    return static_cast<Eigen::Index>((static_cast<unsigned __int128>(rng()) * static_cast<std::uint64_t>(m)) >> 64);
  };
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  // The chain is declared stuck after this many consecutive zero-length chords.
  const Eigen::Index stall_limit = std::max<Eigen::Index>(200, 20 * d * d);
  Eigen::Index idle = 0;
  Eigen::Index produced = 0;
  bool ever_moved = false;
  Eigen::Index since_refresh = 0;

  while (produced < n) {
    for (Eigen::Index s = 0; s < thinning; ++s) {
      const Eigen::Index i = index(d);
      Eigen::Index j = index(d - 1);
      if (j >= i) ++j;
      // Direction e_i - e_j.
      double lo = std::max(spec.lower[i] - x[i], x[j] - spec.upper[j]);
      double hi = std::min(spec.upper[i] - x[i], x[j] - spec.lower[j]);
      lo = std::min(lo, 0.0);
      hi = std::max(hi, 0.0);
      const double* ci = R + i * a;
      const double* cj = R + j * a;
      for (Eigen::Index k = 0; k < a; ++k) {
        const double c = ci[k] - cj[k];
        if (c == 0.0) continue;
        const double up = std::max(0.0, spec.row_upper[k] - g[k]);
        const double dn = std::min(0.0, spec.row_lower[k] - g[k]);
        if (c > 0) {
          hi = std::min(hi, up / c);
          lo = std::max(lo, dn / c);
        } else {
          hi = std::min(hi, dn / c);
          lo = std::max(lo, up / c);
        }
      }
      const double len = hi - lo;
      const double t = lo + unit() * len;
      if (!(len > 1e-15) || t == 0.0) {
        if (++idle >= stall_limit) break;
        continue;
      }
      idle = 0;
      ever_moved = true;
      x[i] += t;
      x[j] -= t;
      for (Eigen::Index k = 0; k < a; ++k) g[k] += t * (ci[k] - cj[k]);
      if (++since_refresh >= 64) {
        g.noalias() = spec.rows * x;
        since_refresh = 0;
      }
    }
    if (idle >= stall_limit) break;
    out.points.col(produced++) = x;
  }

  if (produced < n) {
    if (!ever_moved) {
      out.fallback = true;
      for (Eigen::Index c = 0; c < n; ++c) out.points.col(c) = x0;
      return out;
    }
    out.stalled = true;
    out.shortfall = n - produced;
    out.points.conservativeResize(d, produced);
  }
  return out;
}

SampleResult sample_in_trust_region(const PolytopeSpec& spec, const Vector& center, double L,
                                    Eigen::Index n, Rng& rng, Eigen::Index thinning) {
  if (!(L > 0.0 && L <= 1.0)) throw PreconditionError("trust-region edge must lie in (0, 1]");
  if (!spec.contains(center)) throw PreconditionError("trust-region center is infeasible");
  return hit_and_run(spec.with_box(center, L), center, n, thinning, rng);
}

}  // namespace dietbo
