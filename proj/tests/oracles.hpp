#pragma once

// Independent reference implementations used only by the tests. Nothing here
// calls into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---- kernels and GP -------------------------------------------------------

inline double matern52(double r, double ell, double sf2) {
  const double a = std::sqrt(5.0) * r / ell;
  return sf2 * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

inline double matern32(double r, double ell, double sf2) {
  const double a = std::sqrt(3.0) * r / ell;
  return sf2 * (1.0 + a) * std::exp(-a);
}

inline Mat gram(const Mat& A, const Mat& B, double ell, double sf2) {
  Mat K(A.cols(), B.cols());
  for (Eigen::Index i = 0; i < A.cols(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) K(i, j) = matern52((A.col(i) - B.col(j)).norm(), ell, sf2);
  return K;
}

struct DensePosterior {
  Vec mean;
  Mat cov;
};

/// Textbook conditioning with an explicit inverse.
inline DensePosterior dense_posterior(const Mat& X, const Vec& y, double ell, double sf2, double noise, double mu,
                                      const Mat& Xq) {
  const Mat K = gram(X, X, ell, sf2) + noise * Mat::Identity(X.cols(), X.cols());
  const Mat Kinv = K.fullPivLu().inverse();
  const Mat Ks = gram(Xq, X, ell, sf2);
  DensePosterior p;
  p.mean = Vec::Constant(Xq.cols(), mu) + Ks * Kinv * (y - Vec::Constant(y.size(), mu));
  p.cov = gram(Xq, Xq, ell, sf2) - Ks * Kinv * Ks.transpose();
  return p;
}

/// log N(y | mu 1, K + noise I) through an eigendecomposition.
inline double dense_lml(const Mat& X, const Vec& y, double ell, double sf2, double noise, double mu) {
  const Mat K = gram(X, X, ell, sf2) + noise * Mat::Identity(X.cols(), X.cols());
  Eigen::SelfAdjointEigenSolver<Mat> es(K);
  const Vec r = y - Vec::Constant(y.size(), mu);
  const Vec proj = es.eigenvectors().transpose() * r;
  double quad = 0.0, logdet = 0.0;
  for (Eigen::Index i = 0; i < proj.size(); ++i) {
    quad += proj[i] * proj[i] / es.eigenvalues()[i];
    logdet += std::log(es.eigenvalues()[i]);
  }
  return -0.5 * quad - 0.5 * logdet - 0.5 * double(y.size()) * std::log(2.0 * M_PI);
}

// ---- hypervolume ----------------------------------------------------------

using Pt = std::vector<double>;

/// Volume of the union of boxes [ref, p] by summing the cells of the grid
/// spanned by every coordinate. O(n^(m+1)), fine for small fronts.
inline double hv_cells(const std::vector<Pt>& front, const Pt& ref) {
  const std::size_t m = ref.size();
  std::vector<std::vector<double>> axes(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::set<double> s{ref[j]};
    for (const auto& p : front)
      if (p[j] > ref[j]) s.insert(p[j]);
    axes[j].assign(s.begin(), s.end());
  }
  double total = 0.0;
  std::vector<std::size_t> idx(m, 0);
  for (;;) {
    bool valid = true;
    for (std::size_t j = 0; j < m; ++j) valid = valid && idx[j] + 1 < axes[j].size();
    if (valid) {
      double vol = 1.0;
      Pt hi(m);
      for (std::size_t j = 0; j < m; ++j) {
        vol *= axes[j][idx[j] + 1] - axes[j][idx[j]];
        hi[j] = axes[j][idx[j] + 1];
      }
      const bool covered = std::any_of(front.begin(), front.end(), [&](const Pt& p) {
        for (std::size_t j = 0; j < m; ++j)
          if (p[j] < hi[j]) return false;
        return true;
      });
      if (covered) total += vol;
    }
    std::size_t j = 0;
    while (j < m && ++idx[j] + 1 >= axes[j].size()) idx[j++] = 0;
    if (j == m) break;
  }
  return total;
}

inline bool dominates(const Pt& a, const Pt& b) {
  bool strict = false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] < b[j]) return false;
    strict = strict || a[j] > b[j];
  }
  return strict;
}

/// Distinct points strictly above ref that no other point dominates, sorted.
inline std::vector<Pt> nondominated(const std::vector<Pt>& pts, const Pt& ref) {
  std::vector<Pt> out;
  for (const auto& p : pts) {
    bool above = true;
    for (std::size_t j = 0; j < p.size(); ++j) above = above && p[j] > ref[j];
    if (!above) continue;
    bool dom = false;
    for (const auto& q : pts) dom = dom || dominates(q, p);
    if (!dom) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Best joint improvement over all unordered pairs of candidate columns.
inline double best_pair_gain(const std::vector<Pt>& front, const Mat& Y, const Pt& ref) {
  const double base = hv_cells(front, ref);
  double best = 0.0;
  for (Eigen::Index a = 0; a < Y.cols(); ++a)
    for (Eigen::Index b = a + 1; b < Y.cols(); ++b) {
      auto f = front;
      f.push_back({Y(0, a), Y(1, a), Y(2, a)});
      f.push_back({Y(0, b), Y(1, b), Y(2, b)});
      best = std::max(best, hv_cells(f, ref) - base);
    }
  return best;
}

// ---- diversity ------------------------------------------------------------

inline double dir_formula(const std::vector<int>& coverage) {
  const double t = double(coverage.size());
  double u = 0.0;
  for (int c : coverage) u += c;
  const double mean = u / t;
  double ss = 0.0;
  for (int c : coverage) ss += (c - mean) * (c - mean);
  return std::sqrt(ss / t) / ((u / t) * std::sqrt(t - 1.0));
}

// ---- trust-region length rules -------------------------------------------

struct TrState {
  double length;
  int success = 0;
  int failure = 0;
  bool terminated = false;
};

/// Replays an outcome sequence run by run: a run of n successes doubles the
/// length floor(n / (tau_succ + 1)) times (capped), a run of n failures halves
/// it floor(n / tau_fail) times. Stops at the first termination.
inline TrState replay_runs(const std::vector<bool>& outcomes, double l_init, double l_max, double l_min, int tau_succ,
                           int tau_fail) {
  TrState st{l_init};
  std::size_t i = 0;
  while (i < outcomes.size()) {
    std::size_t j = i;
    while (j < outcomes.size() && outcomes[j] == outcomes[i]) ++j;
    const int n = static_cast<int>(j - i);
    if (outcomes[i]) {
      const int doublings = n / (tau_succ + 1);
      st.length = std::min(st.length * std::pow(2.0, doublings), l_max);
      st.success = n % (tau_succ + 1);
      st.failure = 0;
      i = j;
      continue;
    }
    // Halvings happen at failures tau_fail, 2 tau_fail, ...; the first one
    // that drops below l_min ends the replay there.
    st.success = 0;
    for (int h = 1; h <= n / tau_fail; ++h) {
      st.length /= 2.0;
      if (st.length < l_min) {
        st.failure = 0;
        st.terminated = true;
        return st;
      }
    }
    st.failure = n % tau_fail;
    i = j;
  }
  return st;
}

// ---- sampling -------------------------------------------------------------

/// Mean of n direct Dirichlet(1, ..., 1) draws via normalized exponentials.
inline Vec dirichlet_mean(int d, int n, unsigned seed) {
  std::mt19937 g(seed);
  std::exponential_distribution<double> e(1.0);
  Vec acc = Vec::Zero(d);
  for (int k = 0; k < n; ++k) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = e(g);
    acc += x / x.sum();
  }
  return acc / double(n);
}

}  // namespace oracle
