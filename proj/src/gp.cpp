#include "dietbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "dietbo/error.hpp"

namespace dietbo {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// Jitter ladder relative to the signal variance.
constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};

struct Factorization {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;
  bool ok = false;
};

Factorization factorize(const Matrix& K, double noise, double signal) {
  Factorization f;
  Matrix A = K;
  for (double rel : kJitterLadder) {
    const double jitter = rel * signal;
    A.diagonal() = K.diagonal().array() + noise + jitter;
    f.llt.compute(A);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      f.ok = true;
      return f;
    }
  }
  return f;
}

double lml_from(const Factorization& f, const Vector& r) {
  const Vector alpha = f.llt.solve(r);
  const double logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * r.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(r.size()) * kLog2Pi;
}

Matrix pairwise_distance(const Matrix& X) {
  const Eigen::Index n = X.cols();
  Matrix D(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    D(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) D(i, j) = D(j, i) = (X.col(i) - X.col(j)).norm();
  }
  return D;
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

// Symmetric draws from N(mean, cov) via a clipped eigendecomposition.
Matrix gaussian_draws(const Vector& mean, const Matrix& cov, Eigen::Index n_draws, double floor, Rng& rng) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  if (eig.info() != Eigen::Success) throw ConditioningError("posterior covariance eigendecomposition failed");
  Vector root = eig.eigenvalues();
  for (Eigen::Index i = 0; i < root.size(); ++i) root[i] = root[i] > floor ? std::sqrt(root[i]) : 0.0;
  const Matrix Z = standard_normal(rng, mean.size(), n_draws);
  Matrix out = eig.eigenvectors() * (root.asDiagonal() * Z);
  out.colwise() += mean;
  return out;
}

}  // namespace

double kernel_eval(const Vector& x1, const Vector& x2, const KernelParams& p) {
  if (x1.size() != x2.size()) throw DimensionError("kernel_eval: input lengths differ");
  if (!x1.allFinite() || !x2.allFinite()) throw PreconditionError("kernel_eval: non-finite input");
  return matern((x1 - x2).norm(), p);
}

GaussianProcess::GaussianProcess(Matrix X, Vector y, const KernelParams& params, double mean)
    : X_(std::move(X)), y_(std::move(y)), params_(params), mean_(mean) {
  if (X_.cols() != y_.size()) throw DimensionError("GP: inputs and targets disagree in count");
  if (X_.cols() < 1) throw PreconditionError("GP needs at least one observation");
  if (!(params_.signal_variance > 0 && params_.lengthscale > 0 && params_.noise_variance >= 0))
    throw PreconditionError("GP: invalid kernel parameters");
  const Matrix K = kernels::parallel::cross_covariance(X_, X_, params_);
  auto f = factorize(K, params_.noise_variance, params_.signal_variance);
  if (!f.ok) throw ConditioningError("covariance factorization failed at the largest jitter");
  llt_ = std::move(f.llt);
  jitter_ = f.jitter;
  const Vector r = y_.array() - mean_;
  alpha_ = llt_.solve(r);
  const double logdet = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  lml_ = -0.5 * r.dot(alpha_) - 0.5 * logdet - 0.5 * static_cast<double>(r.size()) * kLog2Pi;
}

double log_marginal_likelihood(const Matrix& X, const Vector& y, const KernelParams& p, double mean) {
  return GaussianProcess(X, y, p, mean).log_marginal_likelihood();
}

GaussianProcess GaussianProcess::fit(const Matrix& X, const Vector& y, const FitOptions& opt) {
  if (X.cols() != y.size()) throw DimensionError("GP fit: inputs and targets disagree in count");
  if (X.cols() < 2) throw PreconditionError("GP fit needs at least two observations");
  const double m = y.mean();
  const double sd = std::sqrt((y.array() - m).square().mean());
  KernelParams p;
  p.smoothness = opt.smoothness;
  if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
    p.signal_variance = opt.signal_min;
    p.noise_variance = opt.noise_min;
    p.lengthscale = std::clamp(1.0, opt.lengthscale_min, opt.lengthscale_max);
    return GaussianProcess(X, y, p, m);
  }
  const Vector z = (y.array() - m) / sd;
  const Matrix D = pairwise_distance(X);
  const Eigen::Index n = X.cols();

  const double lo[3] = {std::log(opt.lengthscale_min), std::log(opt.signal_min), std::log(opt.noise_min)};
  const double hi[3] = {std::log(opt.lengthscale_max), std::log(opt.signal_max), std::log(opt.noise_max)};
  using Theta = std::array<double, 3>;
  Matrix K(n, n);
  auto objective = [&](const Theta& t) {
    KernelParams q{std::exp(t[1]), std::exp(t[0]), std::exp(t[2]), opt.smoothness};
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) K(i, j) = matern(D(i, j), q);
    const auto f = factorize(K, q.noise_variance, q.signal_variance);
    if (!f.ok) return -std::numeric_limits<double>::infinity();
    return lml_from(f, z);
  };

  // Screening points: a Halton sequence with a seeded random shift.
  auto rng = make_rng(opt.seed, {0x67705f666974ULL});
  Theta shift{uniform01(rng), uniform01(rng), uniform01(rng)};
  std::vector<std::pair<double, Theta>> screened;
  const int bases[3] = {2, 3, 5};
  for (int c = 0; c < opt.candidates; ++c) {
    Theta t;
    for (int k = 0; k < 3; ++k) {
      const double u = std::fmod(halton(c + 1, bases[k]) + shift[k], 1.0);
      t[k] = lo[k] + u * (hi[k] - lo[k]);
    }
    screened.push_back({objective(t), t});
  }
  std::stable_sort(screened.begin(), screened.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Theta> starts;
  if (opt.warm_start) {
    const auto& w = *opt.warm_start;
    Theta t{std::log(w.lengthscale), std::log(w.signal_variance / (sd * sd)),
            std::log(std::max(w.noise_variance, 1e-300) / (sd * sd))};
    for (int k = 0; k < 3; ++k) t[k] = std::clamp(t[k], lo[k], hi[k]);
    starts.push_back(t);
  }
  for (std::size_t i = 0; i < screened.size() && static_cast<int>(starts.size()) < opt.restarts; ++i)
    starts.push_back(screened[i].second);
  if (starts.empty()) starts.push_back({0.0, 0.0, std::log(1e-2)});

  Theta best_t = starts.front();
  double best_f = -std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    Theta t = start;
    double f = objective(t);
    double step = 1.0;
    while (step >= opt.min_step) {
      bool moved = false;
      for (int k = 0; k < 3; ++k)
        for (double dir : {+1.0, -1.0}) {
          Theta c = t;
          c[k] = std::clamp(t[k] + dir * step, lo[k], hi[k]);
          if (c[k] == t[k]) continue;
          const double fc = objective(c);
          if (fc > f) {
            t = c;
            f = fc;
            moved = true;
            break;
          }
        }
      if (!moved) step *= 0.5;
    }
    if (f > best_f) {
      best_f = f;
      best_t = t;
    }
  }
  if (!std::isfinite(best_f)) throw ConditioningError("GP fit: no hyperparameters gave a stable factorization");
  p.lengthscale = std::exp(best_t[0]);
  p.signal_variance = std::exp(best_t[1]) * sd * sd;
  p.noise_variance = std::exp(best_t[2]) * sd * sd;
  return GaussianProcess(X, y, p, m);
}

Vector GaussianProcess::predict_mean(const Matrix& Xq) const {
  if (Xq.rows() != dim()) throw DimensionError("predict: query dimension mismatch");
  const Matrix Ks = kernels::parallel::cross_covariance(X_, Xq, params_);
  return (Ks.transpose() * alpha_).array() + mean_;
}

Vector GaussianProcess::predict_variance(const Matrix& Xq) const {
  if (Xq.rows() != dim()) throw DimensionError("predict: query dimension mismatch");
  const Matrix Ks = kernels::parallel::cross_covariance(X_, Xq, params_);
  const Matrix V = llt_.matrixL().solve(Ks);
  Vector var = params_.signal_variance - V.colwise().squaredNorm().transpose().array();
  return var.cwiseMax(0.0);
}

GaussianProcess::Posterior GaussianProcess::posterior(const Matrix& Xq) const {
  if (Xq.rows() != dim()) throw DimensionError("posterior: query dimension mismatch");
  const Matrix Ks = kernels::parallel::cross_covariance(X_, Xq, params_);
  Posterior post;
  post.mean = (Ks.transpose() * alpha_).array() + mean_;
  const Matrix V = llt_.matrixL().solve(Ks);
  post.cov = kernels::parallel::cross_covariance(Xq, Xq, params_);
  post.cov.noalias() -= V.transpose() * V;
  post.cov = (0.5 * (post.cov + post.cov.transpose())).eval();
  return post;
}

Matrix GaussianProcess::sample_posterior(const Matrix& Xq, Eigen::Index n_draws, Rng& rng) const {
  const auto post = posterior(Xq);
  return gaussian_draws(post.mean, post.cov, n_draws, 1e-12 * params_.signal_variance, rng);
}

Vector GaussianProcess::sample_posterior(const Matrix& Xq, Rng& rng) const {
  return sample_posterior(Xq, 1, rng).col(0);
}

kernels::FeatureMap make_feature_map(const KernelParams& p, Eigen::Index dim, Eigen::Index n_features,
                                     Rng& rng) {
  if (n_features < 1) throw PreconditionError("need at least one random feature");
  const double nu = smoothness_nu(p.smoothness);
  kernels::FeatureMap map;
  map.omega = standard_normal(rng, n_features, dim);
  std::chi_squared_distribution<double> chi2(2.0 * nu);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  map.phase.resize(n_features);
  // Matern spectral density: multivariate t with 2 nu degrees of freedom.
  for (Eigen::Index f = 0; f < n_features; ++f) {
    map.omega.row(f) *= std::sqrt(2.0 * nu / chi2(rng)) / p.lengthscale;
    map.phase[f] = phase(rng);
  }
  map.amplitude = std::sqrt(2.0 * p.signal_variance / static_cast<double>(n_features));
  return map;
}

PathwiseSampler::PathwiseSampler(const GaussianProcess& gp, Eigen::Index n_draws, Eigen::Index n_features,
                                 Rng& rng)
    : gp_(&gp) {
  if (n_draws < 1) throw PreconditionError("need at least one draw");
  map_ = make_feature_map(gp.params(), gp.dim(), n_features, rng);
  weights_ = standard_normal(rng, n_features, n_draws);
  const Matrix Phi = kernels::parallel::feature_matrix(gp.inputs(), map_);
  const double noise_sd = std::sqrt(gp.params().noise_variance + gp.jitter());
  Matrix resid = -(Phi.transpose() * weights_) - noise_sd * standard_normal(rng, gp.size(), n_draws);
  resid.colwise() += (gp.targets().array() - gp.mean()).matrix();
  update_ = gp.factor().solve(resid);
}

Matrix PathwiseSampler::evaluate(const Matrix& Xq) const {
  if (Xq.rows() != gp_->dim()) throw DimensionError("pathwise: query dimension mismatch");
  Matrix out = kernels::parallel::feature_matrix(Xq, map_).transpose() * weights_;
  out.noalias() += kernels::parallel::cross_covariance(Xq, gp_->inputs(), gp_->params()) * update_;
  out.array() += gp_->mean();
  return out;
}

Matrix draw_joint(const GaussianProcess& gp, const Matrix& Xq, Eigen::Index n_draws, Rng& rng,
                  Eigen::Index n_features, Eigen::Index exact_limit) {
  if (Xq.cols() + gp.size() <= exact_limit) return gp.sample_posterior(Xq, n_draws, rng);
  return PathwiseSampler(gp, n_draws, n_features, rng).evaluate(Xq);
}

}  // namespace dietbo
