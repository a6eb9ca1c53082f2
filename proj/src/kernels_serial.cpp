#include "kernels_impl.hpp"

#include "dietbo/error.hpp"

namespace dietbo::kernels::serial {

Matrix cross_covariance(const Matrix& X1, const Matrix& X2, const KernelParams& p) {
  if (X1.rows() != X2.rows()) throw DimensionError("cross_covariance: input dimensions differ");
  Matrix K(X1.cols(), X2.cols());
  for (Eigen::Index j = 0; j < X2.cols(); ++j)
    for (Eigen::Index i = 0; i < X1.cols(); ++i) K(i, j) = detail::covariance_entry(X1, i, X2, j, p);
  return K;
}

Matrix feature_matrix(const Matrix& X, const FeatureMap& map) {
  if (X.rows() != map.omega.cols()) throw DimensionError("feature_matrix: input dimension mismatch");
  Matrix out(map.size(), X.cols());
  for (Eigen::Index b = 0; b < detail::feature_blocks(X); ++b) detail::feature_block(X, b, map, out);
  return out;
}

Vector batch_hvi(const Matrix& front, const Matrix& Y, const Point3& ref) {
  const auto pts = detail::to_points(front);
  Vector out(Y.cols());
  for (Eigen::Index c = 0; c < Y.cols(); ++c) out[c] = detail::hvi_entry(pts, Y, c, ref);
  return out;
}

std::vector<unsigned char> dominated_mask(const Matrix& front, const Matrix& samples) {
  std::vector<unsigned char> out(samples.cols());
  for (Eigen::Index c = 0; c < samples.cols(); ++c) out[c] = detail::dominated_entry(front, samples, c);
  return out;
}

Vector nehvi_scores(const std::vector<Matrix>& fronts, const std::vector<Matrix>& samples, const Point3& ref) {
  if (fronts.size() != samples.size() || fronts.empty())
    throw DimensionError("nehvi_scores: need one front per replicate");
  std::vector<std::vector<Point3>> pts;
  for (const auto& f : fronts) pts.push_back(detail::to_points(f));
  const Eigen::Index n = samples.front().cols();
  Vector out(n);
  for (Eigen::Index c = 0; c < n; ++c) out[c] = detail::nehvi_entry(pts, samples, c, ref);
  return out;
}

}  // namespace dietbo::kernels::serial
