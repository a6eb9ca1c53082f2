#pragma once

// Per-element arithmetic shared by the serial and OpenMP kernels.

#include <algorithm>
#include <cmath>

#include "dietbo/kernels.hpp"
#include "dietbo/pareto.hpp"

namespace dietbo::kernels::detail {

inline double covariance_entry(const Matrix& X1, Eigen::Index i, const Matrix& X2, Eigen::Index j,
                               const KernelParams& p) {
  const double* a = X1.col(i).data();
  const double* b = X2.col(j).data();
  double ss = 0.0;
  for (Eigen::Index k = 0; k < X1.rows(); ++k) {
    const double t = a[k] - b[k];
    ss += t * t;
  }
  return matern(std::sqrt(ss), p);
}

// Points are processed in fixed blocks so the serial and threaded versions run
// identical products. Arguments are reduced to [-pi, pi] in double precision,
// then the cosine is taken in single precision with Eigen's packet math.
inline constexpr Eigen::Index kFeatureBlock = 128;

inline void feature_block(const Matrix& X, Eigen::Index block, const FeatureMap& map, Matrix& out) {
  constexpr double kTwoPi = 6.283185307179586;
  const Eigen::Index first = block * kFeatureBlock;
  const Eigen::Index n = std::min(kFeatureBlock, X.cols() - first);
  Matrix arg = map.omega * X.middleCols(first, n);
  arg.colwise() += map.phase;
  auto a = arg.array();
  a -= kTwoPi * (a * (1.0 / kTwoPi) + 0.5).floor();
  const Eigen::ArrayXXf reduced = a.cast<float>();
  const Eigen::ArrayXXf c = reduced.cos();
  out.middleCols(first, n) = map.amplitude * c.cast<double>().matrix();
}

inline Eigen::Index feature_blocks(const Matrix& X) {
  return (X.cols() + kFeatureBlock - 1) / kFeatureBlock;
}

inline double hvi_entry(const std::vector<Point3>& front, const Matrix& Y, Eigen::Index c,
                        const Point3& ref) {
  const Point3 y{Y(0, c), Y(1, c), Y(2, c)};
  if (!(y[0] > ref[0] && y[1] > ref[1] && y[2] > ref[2])) return 0.0;
  return hvi(front, y, ref);
}

inline double nehvi_entry(const std::vector<std::vector<Point3>>& fronts, const std::vector<Matrix>& samples,
                          Eigen::Index c, const Point3& ref) {
  double sum = 0.0;
  for (std::size_t r = 0; r < fronts.size(); ++r) sum += hvi_entry(fronts[r], samples[r], c, ref);
  return sum / static_cast<double>(fronts.size());
}

inline unsigned char dominated_entry(const Matrix& front, const Matrix& S, Eigen::Index c) {
  for (Eigen::Index i = 0; i < front.cols(); ++i)
    if (front(0, i) >= S(0, c) && front(1, i) >= S(1, c) && front(2, i) >= S(2, c)) return 1;
  return 0;
}

inline std::vector<Point3> to_points(const Matrix& F) {
  std::vector<Point3> out(F.cols());
  for (Eigen::Index i = 0; i < F.cols(); ++i) out[i] = {F(0, i), F(1, i), F(2, i)};
  return out;
}

}  // namespace dietbo::kernels::detail
