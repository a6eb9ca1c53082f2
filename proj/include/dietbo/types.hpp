#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace dietbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Number of objectives of the diet problem (cost, lysine, energy).
inline constexpr int kObjectives = 3;

/// A point in standardized objective space: every coordinate is maximized.
using Point3 = std::array<double, kObjectives>;

}  // namespace dietbo
