#pragma once

// Hot loops with a plain serial reference and an OpenMP version. Both write
// each output element from the same arithmetic, so results match bitwise.

#include <vector>

#include "dietbo/kernel.hpp"
#include "dietbo/types.hpp"

namespace dietbo::kernels {

/// Random Fourier features phi(x) = amplitude * cos(omega x + phase).
struct FeatureMap {
  Matrix omega;  // D x dim
  Vector phase;  // D
  double amplitude = 0.0;
  Eigen::Index size() const { return omega.rows(); }
};

namespace serial {

/// K(X1, X2) with points as columns; n1 x n2.
Matrix cross_covariance(const Matrix& X1, const Matrix& X2, const KernelParams& p);
/// D x n feature matrix, one column per point.
Matrix feature_matrix(const Matrix& X, const FeatureMap& map);
/// HVI of each column of Y (3 x n) against `front` (3 x t).
Vector batch_hvi(const Matrix& front, const Matrix& Y, const Point3& ref);
/// 1 where a column of `samples` (3 x n) is weakly dominated by a column of `front`.
std::vector<unsigned char> dominated_mask(const Matrix& front, const Matrix& samples);
/// Mean over replicates r of HVI(samples[r].col(c), fronts[r]); one score per column.
Vector nehvi_scores(const std::vector<Matrix>& fronts, const std::vector<Matrix>& samples, const Point3& ref);

}  // namespace serial

namespace parallel {

Matrix cross_covariance(const Matrix& X1, const Matrix& X2, const KernelParams& p);
Matrix feature_matrix(const Matrix& X, const FeatureMap& map);
Vector batch_hvi(const Matrix& front, const Matrix& Y, const Point3& ref);
std::vector<unsigned char> dominated_mask(const Matrix& front, const Matrix& samples);
Vector nehvi_scores(const std::vector<Matrix>& fronts, const std::vector<Matrix>& samples, const Point3& ref);

}  // namespace parallel

}  // namespace dietbo::kernels
