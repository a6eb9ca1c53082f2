// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "dietbo/gp.hpp"
#include "dietbo/kernels.hpp"
#include "dietbo/random.hpp"

using namespace dietbo;

namespace {

constexpr Eigen::Index kDim = 17;

Matrix uniform_points(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  auto rng = make_rng(seed, {});
  Matrix X(d, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < d; ++i) X(i, j) = uniform01(rng);
  return X;
}

/// Staircase front on the simplex-like surface plus scattered candidates.
void hv_inputs(Eigen::Index t, Eigen::Index n, Matrix& front, Matrix& Y) {
  auto rng = make_rng(7, {});
  front.resize(3, t);
  for (Eigen::Index j = 0; j < t; ++j) {
    Eigen::Vector3d v(uniform01(rng), uniform01(rng), uniform01(rng));
    front.col(j) = v / v.sum();
  }
  Y = uniform_points(3, n, 8) * 0.6;
}

KernelParams params() { return {1.0, 0.3, 1e-4, Smoothness::Matern52}; }

template <bool Parallel>
void BM_CrossCovariance(benchmark::State& st) {
  const Matrix A = uniform_points(kDim, st.range(0), 1), B = uniform_points(kDim, 512, 2);
  for (auto _ : st) {
    Matrix K = Parallel ? kernels::parallel::cross_covariance(A, B, params())
                        : kernels::serial::cross_covariance(A, B, params());
    benchmark::DoNotOptimize(K.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * 512);
}

template <bool Parallel>
void BM_FeatureMatrix(benchmark::State& st) {
  auto rng = make_rng(3, {});
  const auto map = make_feature_map(params(), kDim, 256, rng);
  const Matrix X = uniform_points(kDim, st.range(0), 4);
  for (auto _ : st) {
    Matrix F = Parallel ? kernels::parallel::feature_matrix(X, map) : kernels::serial::feature_matrix(X, map);
    benchmark::DoNotOptimize(F.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_BatchHvi(benchmark::State& st) {
  Matrix front, Y;
  hv_inputs(40, st.range(0), front, Y);
  const Point3 ref{0.0, 0.0, 0.0};
  for (auto _ : st) {
    Vector h = Parallel ? kernels::parallel::batch_hvi(front, Y, ref) : kernels::serial::batch_hvi(front, Y, ref);
    benchmark::DoNotOptimize(h.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_NehviScores(benchmark::State& st) {
  std::vector<Matrix> fronts, samples;
  for (int r = 0; r < 64; ++r) {
    Matrix f, y;
    hv_inputs(20, st.range(0), f, y);
    fronts.push_back(f);
    samples.push_back(y);
  }
  const Point3 ref{0.0, 0.0, 0.0};
  for (auto _ : st) {
    Vector s = Parallel ? kernels::parallel::nehvi_scores(fronts, samples, ref)
                        : kernels::serial::nehvi_scores(fronts, samples, ref);
    benchmark::DoNotOptimize(s.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0) * 64);
}

}  // namespace

BENCHMARK(BM_CrossCovariance<false>)->Name("cross_covariance/serial")->Arg(512)->Arg(2048);
BENCHMARK(BM_CrossCovariance<true>)->Name("cross_covariance/parallel")->Arg(512)->Arg(2048);
BENCHMARK(BM_FeatureMatrix<false>)->Name("feature_matrix/serial")->Arg(1024)->Arg(4096);
BENCHMARK(BM_FeatureMatrix<true>)->Name("feature_matrix/parallel")->Arg(1024)->Arg(4096);
BENCHMARK(BM_BatchHvi<false>)->Name("batch_hvi/serial")->Arg(4096);
BENCHMARK(BM_BatchHvi<true>)->Name("batch_hvi/parallel")->Arg(4096);
BENCHMARK(BM_NehviScores<false>)->Name("nehvi_scores/serial")->Arg(1024);
BENCHMARK(BM_NehviScores<true>)->Name("nehvi_scores/parallel")->Arg(1024);

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("omp_threads", std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
