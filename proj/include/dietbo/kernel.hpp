#pragma once

#include <cmath>

#include "dietbo/types.hpp"

namespace dietbo {

enum class Smoothness { Matern32, Matern52 };

inline double smoothness_nu(Smoothness s) { return s == Smoothness::Matern32 ? 1.5 : 2.5; }

struct KernelParams {
  double signal_variance = 1.0;
  double lengthscale = 1.0;
  double noise_variance = 1e-6;
  Smoothness smoothness = Smoothness::Matern52;

  bool operator==(const KernelParams&) const = default;
};

/// Isotropic Matern covariance at Euclidean distance r.
inline double matern(double r, const KernelParams& p) {
  const double s = r / p.lengthscale;
  if (p.smoothness == Smoothness::Matern32) {
    const double a = std::sqrt(3.0) * s;
    return p.signal_variance * (1.0 + a) * std::exp(-a);
  }
  const double a = std::sqrt(5.0) * s;
  return p.signal_variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

/// k(x1, x2); throws on length mismatch or non-finite input.
double kernel_eval(const Vector& x1, const Vector& x2, const KernelParams& p);

}  // namespace dietbo
