#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Cholesky>

#include "dietbo/kernel.hpp"
#include "dietbo/kernels.hpp"
#include "dietbo/random.hpp"
#include "dietbo/types.hpp"

namespace dietbo {

struct FitOptions {
  Smoothness smoothness = Smoothness::Matern52;
  int restarts = 8;
  int candidates = 32;  // quasi-random screening points
  double lengthscale_min = 1e-3, lengthscale_max = 10.0;
  double signal_min = 1e-4, signal_max = 1e2;
  double noise_min = 1e-8, noise_max = 1.0;
  double min_step = 1e-2;  // log-space resolution of the coordinate search
  std::uint64_t seed = 0;
  /// Extra start in original units, typically the previous fit.
  std::optional<KernelParams> warm_start;
};

/// GP regression with a constant mean and an isotropic Matern kernel.
/// Inputs are columns.
class GaussianProcess {
 public:
  struct Posterior {
    Vector mean;
    Matrix cov;
  };

  GaussianProcess() = default;
  /// Conditions on (X, y) with fixed hyperparameters (original units).
  GaussianProcess(Matrix X, Vector y, const KernelParams& params, double mean);

  /// Maximizes the log marginal likelihood on standardized targets; the
  /// returned model is expressed in original units.
  static GaussianProcess fit(const Matrix& X, const Vector& y, const FitOptions& options = {});

  double log_marginal_likelihood() const { return lml_; }
  Vector predict_mean(const Matrix& Xq) const;
  /// Latent-function variance (no observation noise).
  Vector predict_variance(const Matrix& Xq) const;
  Posterior posterior(const Matrix& Xq) const;
  /// Exact joint draws, one per column (n_q x n_draws).
  Matrix sample_posterior(const Matrix& Xq, Eigen::Index n_draws, Rng& rng) const;
  Vector sample_posterior(const Matrix& Xq, Rng& rng) const;

  const KernelParams& params() const { return params_; }
  double mean() const { return mean_; }
  const Matrix& inputs() const { return X_; }
  const Vector& targets() const { return y_; }
  const Vector& weights() const { return alpha_; }
  /// Diagonal jitter that made the factorization succeed.
  double jitter() const { return jitter_; }
  const Eigen::LLT<Matrix>& factor() const { return llt_; }
  Eigen::Index size() const { return X_.cols(); }
  Eigen::Index dim() const { return X_.rows(); }

 private:
  Matrix X_;
  Vector y_;
  KernelParams params_;
  double mean_ = 0.0;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  Eigen::LLT<Matrix> llt_;
  Vector alpha_;
};

/// Direct dense-formula log evidence (used for fitting and as a reference).
double log_marginal_likelihood(const Matrix& X, const Vector& y, const KernelParams& p, double mean);

/// Joint posterior draws evaluated through a random-feature prior plus an
/// exact data update. Features and draws are fixed at construction.
class PathwiseSampler {
 public:
  PathwiseSampler(const GaussianProcess& gp, Eigen::Index n_draws, Eigen::Index n_features, Rng& rng);

  /// n_q x n_draws.
  Matrix evaluate(const Matrix& Xq) const;
  Eigen::Index draws() const { return weights_.cols(); }
  const kernels::FeatureMap& features() const { return map_; }

 private:
  const GaussianProcess* gp_;
  kernels::FeatureMap map_;
  Matrix weights_;  // D x n_draws
  Matrix update_;   // n x n_draws
};

/// Exact draws when the query set is small, pathwise draws otherwise.
Matrix draw_joint(const GaussianProcess& gp, const Matrix& Xq, Eigen::Index n_draws, Rng& rng,
                  Eigen::Index n_features = 512, Eigen::Index exact_limit = 256);

/// Draws a random feature map for the given kernel.
kernels::FeatureMap make_feature_map(const KernelParams& p, Eigen::Index dim, Eigen::Index n_features,
                                     Rng& rng);

}  // namespace dietbo
