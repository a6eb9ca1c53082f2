#include "dietbo/mobo.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <limits>

#include "dietbo/error.hpp"
#include "dietbo/kernels.hpp"
#include "dietbo/pareto.hpp"

namespace dietbo::mobo {

namespace {

enum StreamTag : std::uint64_t {
  kRoundStream = 2,
  kFitStream = 4,
};

Matrix normalized(const std::vector<Observation>& history, const Vector& scale) {
  Matrix U(scale.size(), static_cast<Eigen::Index>(history.size()));
  for (std::size_t i = 0; i < history.size(); ++i)
    U.col(static_cast<Eigen::Index>(i)) = history[i].x.cwiseQuotient(scale);
  return U;
}

Matrix front_of(const Matrix& Y, const Point3& ref) {
  std::vector<Point3> above;
  for (Eigen::Index i = 0; i < Y.cols(); ++i)
    if (Y(0, i) > ref[0] && Y(1, i) > ref[1] && Y(2, i) > ref[2]) above.push_back({Y(0, i), Y(1, i), Y(2, i)});
  const auto nd = nondominated_indices(above);
  Matrix F(3, static_cast<Eigen::Index>(nd.size()));
  for (std::size_t c = 0; c < nd.size(); ++c)
    for (int o = 0; o < 3; ++o) F(o, static_cast<Eigen::Index>(c)) = above[nd[c]][o];
  return F;
}

}  // namespace

void Config::validate() const {
  if (n_init < 1) throw ValidationError("n_init", "must be >= 1");
  if (k < 0) throw ValidationError("k", "must be >= 0");
  if (n_mc < 1) throw ValidationError("n_mc", "must be >= 1");
  if (q < 1) throw ValidationError("q", "must be >= 1");
  if (candidate_pool < 1) throw ValidationError("candidate_pool", "must be >= 1");
  if (n_features < 1) throw ValidationError("n_features", "must be >= 1");
  if (refine_pool < 0) throw ValidationError("refine_pool", "must be >= 0");
  if (!(refine_edge > 0.0 && refine_edge <= 1.0)) throw ValidationError("refine_edge", "must be in (0, 1]");
}

NehviSamples draw_nehvi_samples(const Models& models, const Matrix& observed_u, const Matrix& candidates_u,
                                const Point3& ref, int n_mc, Rng& rng, const AcquisitionOptions& opt) {
  if (n_mc < 1) throw ValidationError("n_mc", "must be >= 1");
  if (observed_u.rows() != candidates_u.rows()) throw DimensionError("qnehvi: input dimensions differ");
  const Eigen::Index n_obs = observed_u.cols(), n_c = candidates_u.cols();
  Matrix joint(observed_u.rows(), n_obs + n_c);
  joint << observed_u, candidates_u;

  std::array<Matrix, kObjectives> draws;  // (n_obs + n_c) x n_mc
  for (int o = 0; o < kObjectives; ++o) {
    auto orng = make_rng(rng(), {static_cast<std::uint64_t>(o)});
    const auto& gp = models[o];
    // The exact path covers small joint sets; otherwise pathwise draws keep
    // each candidate's value independent of the rest of the pool.
    if (joint.cols() + gp.size() <= opt.exact_limit)
      draws[o] = gp.sample_posterior(joint, n_mc, orng);
    else
      draws[o] = PathwiseSampler(gp, n_mc, opt.n_features, orng).evaluate(joint);
  }

  NehviSamples s;
  s.ref = ref;
  s.fronts.resize(n_mc);
  s.candidates.resize(n_mc);
  for (int r = 0; r < n_mc; ++r) {
    Matrix Yo(3, n_obs), Yc(3, n_c);
    for (int o = 0; o < kObjectives; ++o) {
      Yo.row(o) = draws[o].col(r).head(n_obs).transpose();
      Yc.row(o) = draws[o].col(r).tail(n_c).transpose();
    }
    s.fronts[r] = front_of(Yo, ref);
    s.candidates[r] = std::move(Yc);
  }
  return s;
}

Vector score(const NehviSamples& s) {
  return kernels::parallel::nehvi_scores(s.fronts, s.candidates, s.ref);
}

void condition_on(NehviSamples& s, Eigen::Index c) {
  for (std::size_t r = 0; r < s.fronts.size(); ++r) {
    Matrix F(3, s.fronts[r].cols() + 1);
    F << s.fronts[r], s.candidates[r].col(c);
    s.fronts[r] = front_of(F, s.ref);
  }
}

Vector qnehvi(const Models& models, const Matrix& candidates, const std::vector<Observation>& history,
              const Vector& scale, const Point3& ref, int n_mc, Rng& rng, const AcquisitionOptions& opt) {
  if (candidates.rows() != scale.size()) throw DimensionError("qnehvi: candidate dimension mismatch");
  const Matrix Uc = candidates.array().colwise() / scale.array();
  return score(draw_nehvi_samples(models, normalized(history, scale), Uc, ref, n_mc, rng, opt));
}

Selection optimize_acquisition(const Models& models, const std::vector<Observation>& history,
                               const PolytopeSpec& spec, const Point3& ref, const Config& config, Rng& rng) {
  config.validate();
  const std::uint64_t base = rng();
  auto pool_rng = make_rng(base, {1});
  auto acq_rng = make_rng(base, {2});
  auto refine_rng = make_rng(base, {3});

  const Vector x0 = find_interior_point(spec, pool_rng);
  constexpr int kBurnIn = 20;
  const auto draws = hit_and_run(spec, x0, config.candidate_pool + kBurnIn, config.thinning, pool_rng);
  const Eigen::Index n_uniform = draws.points.cols() - kBurnIn;
  if (draws.fallback || n_uniform < 1) throw Error("optimize_acquisition: empty candidate pool");

  std::vector<Matrix> parts{draws.points.rightCols(n_uniform)};
  Eigen::Index n_pool = n_uniform;
  if (config.refine_pool > 0) {
    std::vector<Point3> ys;
    for (const auto& o : history) ys.push_back(o.y.standardized());
    std::vector<std::size_t> centers;
    for (auto i : nondominated_indices(ys))
      if (ys[i][0] > ref[0] && ys[i][1] > ref[1] && ys[i][2] > ref[2]) centers.push_back(i);
    const auto nc = static_cast<int>(centers.size());
    for (int c = 0; c < nc; ++c) {
      const int n = config.refine_pool / nc + (c < config.refine_pool % nc);
      if (n == 0) continue;
      auto local = sample_in_trust_region(spec, history[centers[c]].x, config.refine_edge, n, refine_rng,
                                          config.thinning);
      if (local.points.cols() == 0) continue;
      n_pool += local.points.cols();
      parts.push_back(std::move(local.points));
    }
  }
  Matrix pool(spec.dim(), n_pool);
  for (Eigen::Index off = 0; const auto& part : parts) {
    pool.middleCols(off, part.cols()) = part;
    off += part.cols();
  }

  const Matrix Uc = pool.array().colwise() / spec.scale.array();
  auto samples = draw_nehvi_samples(models, normalized(history, spec.scale), Uc, ref, config.n_mc, acq_rng,
                                    {config.n_features, config.exact_limit});
  Selection sel;
  sel.pool_size = static_cast<int>(n_pool);
  std::vector<unsigned char> taken(static_cast<std::size_t>(n_pool), 0);
  const int q = std::min<int>(config.q, static_cast<int>(n_pool));
  for (int j = 0; j < q; ++j) {
    const Vector sc = score(samples);
    Eigen::Index best = -1;
    for (Eigen::Index c = 0; c < n_pool; ++c)
      if (!taken[c] && (best < 0 || sc[c] > sc[best])) best = c;
    taken[best] = 1;
    sel.points.push_back(pool.col(best));
    sel.scores.push_back(sc[best]);
    sel.pool_index.push_back(best);
    if (j + 1 < q) condition_on(samples, best);
  }
  return sel;
}

Models fit_models(const std::vector<Observation>& history, const Vector& scale, const Config& config,
                  const Models* previous, std::uint64_t seed) {
  if (history.empty()) throw PreconditionError("fit_models: empty history");
  const Matrix U = normalized(history, scale);
  Models out;
  std::array<std::exception_ptr, kObjectives> errors;
#pragma omp parallel for
  for (int o = 0; o < kObjectives; ++o) {
    try {
      Vector y(U.cols());
      for (Eigen::Index i = 0; i < U.cols(); ++i) y[i] = history[i].y.standardized()[o];
      FitOptions opt;
      opt.smoothness = config.smoothness;
      opt.seed = derive_seed(seed, {static_cast<std::uint64_t>(o)});
      if (previous && (*previous)[o].size() > 0) {
        opt.warm_start = (*previous)[o].params();
        opt.restarts = 2;
        opt.candidates = 8;
      }
      out[o] = GaussianProcess::fit(U, y, opt);
    } catch (...) {
      errors[o] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

RunRecord run(const ProblemInstance& problem, const Config& config) {
  config.validate();
  RunRecord rec;
  rec.engine = "mobo";
  rec.seed = config.seed;
  rec.metadata["initial_design"] = "uniform hit-and-run over the feasible polytope";
  rec.metadata["acquisition"] = "Monte-Carlo qNEHVI maximized over a feasible hit-and-run pool (stand-in)";
  rec.metadata["candidate_pool"] = std::to_string(config.candidate_pool);
  rec.metadata["n_mc"] = std::to_string(config.n_mc);

  const auto spec = PolytopeSpec::from_instance(problem);
  auto design_rng = make_rng(config.seed, {kDesignStream});
  auto noise_rng = make_rng(config.seed, {kNoiseStream});
  auto history = initial_design(problem, spec, config.n_init, config.thinning, design_rng, noise_rng);

  std::vector<Point3> pts;
  for (const auto& o : history) pts.push_back(o.y.standardized());
  ParetoArchive archive(reference_point(pts, config.ref_margin));
  for (std::size_t i = 0; i < history.size(); ++i)
    archive.insert(history[i].x, history[i].y, static_cast<std::int64_t>(i));
  rec.ref = archive.ref();
  const auto V = generate_reference_vectors(config.dir_vectors);
  rec.iterations.push_back(snapshot(archive, V, 0, static_cast<int>(history.size())));

  Models models;
  bool have = false;
  for (int it = 1; it <= config.k; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    models = fit_models(history, spec.scale, config, have ? &models : nullptr,
                        derive_seed(config.seed, {kFitStream, static_cast<std::uint64_t>(it)}));
    have = true;
    auto round_rng = make_rng(config.seed, {kRoundStream, static_cast<std::uint64_t>(it)});
    const auto sel = optimize_acquisition(models, history, spec, archive.ref(), config, round_rng);
    const auto t1 = std::chrono::steady_clock::now();
    for (const auto& x : sel.points) {
      if (!check_feasibility(problem, x).feasible)
        throw Error("MOBO proposed an infeasible candidate at iteration " + std::to_string(it));
      Observation o{x, evaluate(problem, x, noise_rng), it, -1};
      archive.insert(o.x, o.y, static_cast<std::int64_t>(history.size()));
      history.push_back(std::move(o));
    }
    auto m = snapshot(archive, V, it, static_cast<int>(history.size()));
    m.candidates = sel.pool_size;
    m.no_improvement = std::all_of(sel.scores.begin(), sel.scores.end(), [](double v) { return v <= 0.0; });
    if (config.record_timing) m.proposal_seconds = std::chrono::duration<double>(t1 - t0).count();
    rec.iterations.push_back(std::move(m));
  }
  rec.history = std::move(history);
  return rec;
}

}  // namespace dietbo::mobo
