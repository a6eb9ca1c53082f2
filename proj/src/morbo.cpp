#include "dietbo/morbo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "dietbo/error.hpp"
#include "dietbo/kernels.hpp"

namespace dietbo::morbo {

namespace {

enum StreamTag : std::uint64_t {
  kProposalStream = 2,
  kUpdateStream = 3,
  kFitStream = 4,
  kInitStream = 6,
};

Matrix normalized_inputs(const State& state, const std::vector<std::size_t>& idx) {
  Matrix U(state.spec.dim(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c)
    U.col(static_cast<Eigen::Index>(c)) = state.history[idx[c]].x.cwiseQuotient(state.spec.scale);
  return U;
}

bool strictly_above(const Point3& y, const Point3& ref) {
  return y[0] > ref[0] && y[1] > ref[1] && y[2] > ref[2];
}

std::vector<Point3> history_points(const State& state) {
  std::vector<Point3> pts;
  pts.reserve(state.history.size());
  for (const auto& o : state.history) pts.push_back(o.y.standardized());
  return pts;
}

TrustRegion* find_region(State& state, int id) {
  for (auto& r : state.regions)
    if (r.id == id) return &r;
  return nullptr;
}

void place(State& state, TrustRegion& tr, std::size_t obs) {
  tr.center = state.history[obs].x;
  tr.center_obs = static_cast<std::int64_t>(obs);
}

}  // namespace

int Config::effective_tau_fail(Eigen::Index d) const {
  if (tau_fail > 0) return tau_fail;
  return static_cast<int>((d + q - 1) / q);
}

void Config::validate() const {
  if (n_tr < 1) throw ValidationError("n_tr", "must be >= 1");
  if (n_ts < 1) throw ValidationError("n_ts", "must be >= 1");
  if (!(0 < l_min && l_min < l_init && l_init <= l_max && l_max <= 1.0))
    throw ValidationError("lengths", "need 0 < l_min < l_init <= l_max <= 1");
  if (q < 1) throw ValidationError("q", "must be >= 1");
  if (k < 0) throw ValidationError("k", "must be >= 0");
  if (n_init < 1) throw ValidationError("n_init", "must be >= 1");
  if (tau_succ < 0 || tau_fail < 0) throw ValidationError("tau", "thresholds must be >= 0");
  if (thompson_features < 1) throw ValidationError("thompson_features", "must be >= 1");
}

void update_length(TrustRegion& tr, const Config& config, Eigen::Index d) {
  if (tr.success > config.tau_succ) {
    tr.length = std::min(2.0 * tr.length, config.l_max);
    tr.success = 0;
  }
  if (tr.failure >= config.effective_tau_fail(d)) {
    tr.length /= 2.0;
    tr.failure = 0;
  }
  if (tr.length < config.l_min) tr.terminated = true;
}

double scalarization(const Point3& y, const Point3& ref, const Point3& lambda) {
  double m = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int j = 0; j < kObjectives; ++j) {
    if (!(lambda[j] > 0)) continue;
    any = true;
    m = std::min(m, std::max(0.0, y[j] - ref[j]) / lambda[j]);
  }
  if (!any) return 0.0;
  return std::pow(m, kObjectives);
}

std::size_t scalarized_argmax(const std::vector<Point3>& points, const Point3& ref, const Point3& lambda) {
  if (points.empty()) throw PreconditionError("scalarized selection needs at least one point");
  std::size_t best = 0;
  double best_v = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double v = scalarization(points[i], ref, lambda);
    if (v >= best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

Point3 random_weight(Rng& rng) {
  std::normal_distribution<double> normal;
  Point3 w;
  double n = 0.0;
  do {
    n = 0.0;
    for (auto& c : w) {
      c = std::abs(normal(rng));
      n += c * c;
    }
  } while (n == 0.0);
  n = std::sqrt(n);
  for (auto& c : w) c /= n;
  return w;
}

std::vector<std::size_t> local_window(const State& state, const Vector& center, double length) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < state.history.size(); ++i)
    if (normalized_distance(state.spec, state.history[i].x, center) <= length + 1e-12) idx.push_back(i);
  if (idx.size() >= 2 || state.history.size() < 2) return idx;
  // Pad with the nearest observations by normalized Euclidean distance.
  std::vector<std::pair<double, std::size_t>> by_dist;
  for (std::size_t i = 0; i < state.history.size(); ++i) {
    if (std::find(idx.begin(), idx.end(), i) != idx.end()) continue;
    by_dist.push_back({(state.history[i].x - center).cwiseQuotient(state.spec.scale).norm(), i});
  }
  std::stable_sort(by_dist.begin(), by_dist.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; idx.size() < 2 && i < by_dist.size(); ++i) idx.push_back(by_dist[i].second);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void refit(const State& state, TrustRegion& tr, bool force_search) {
  tr.local = local_window(state, tr.center, tr.length);
  const Matrix U = normalized_inputs(state, tr.local);
  const auto n = tr.local.size();
  const bool have = tr.models[0].size() > 0;
  const double moved =
      tr.searched_at == 0 ? 1.0 : std::abs(double(n) - double(tr.searched_at)) / double(tr.searched_at);
  const bool search = force_search || !have || moved >= state.config.refit_growth;
  for (int o = 0; o < kObjectives; ++o) {
    Vector y(static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c) y[c] = state.history[tr.local[c]].y.standardized()[o];
    if (search) {
      FitOptions opt;
      opt.smoothness = state.config.smoothness;
      opt.seed = derive_seed(state.config.seed,
                             {kFitStream, static_cast<std::uint64_t>(tr.id), static_cast<std::uint64_t>(o),
                              state.history.size()});
      if (have) {
        // Warm start from the previous hyperparameters with a small screen.
        opt.warm_start = tr.models[o].params();
        opt.restarts = 2;
        opt.candidates = 8;
      }
      tr.models[o] = GaussianProcess::fit(U, y, opt);
    } else {
      tr.models[o] = GaussianProcess(U, y, tr.models[o].params(), y.mean());
    }
  }
  if (search) tr.searched_at = n;
}

State initialize(const ProblemInstance& problem, std::vector<Observation> history, const Config& config,
                 Rng& rng) {
  config.validate();
  if (history.empty()) throw PreconditionError("MORBO needs at least one feasible observation");
  State state;
  state.problem = &problem;
  state.spec = PolytopeSpec::from_instance(problem);
  state.config = config;
  state.history = std::move(history);
  state.archive = ParetoArchive(reference_point(history_points(state), config.ref_margin));
  for (std::size_t i = 0; i < state.history.size(); ++i)
    state.archive.insert(state.history[i].x, state.history[i].y, static_cast<std::int64_t>(i));

  // Greedy by hypervolume contribution, then scalarized picks if the archive is short.
  const auto contrib = hvc(state.archive.front(), state.archive.ref());
  std::vector<std::size_t> order(contrib.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return contrib[a] > contrib[b]; });
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < order.size() && static_cast<int>(chosen.size()) < config.n_tr; ++i)
    chosen.push_back(static_cast<std::size_t>(state.archive.entries()[order[i]].id));
  const auto pts = history_points(state);
  while (static_cast<int>(chosen.size()) < config.n_tr) {
    const Point3 lambda = random_weight(rng);
    std::vector<Point3> pool;
    std::vector<std::size_t> map;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) {
        pool.push_back(pts[i]);
        map.push_back(i);
      }
    if (pool.empty()) {
      pool = pts;
      map.resize(pts.size());
      for (std::size_t i = 0; i < map.size(); ++i) map[i] = i;
    }
    chosen.push_back(map[scalarized_argmax(pool, state.archive.ref(), lambda)]);
  }
  for (auto obs : chosen) {
    TrustRegion tr;
    tr.id = state.next_region_id++;
    tr.length = config.l_init;
    place(state, tr, obs);
    refit(state, tr, true);
    state.regions.push_back(std::move(tr));
  }
  return state;
}

std::vector<std::pair<Eigen::Index, double>> greedy_hvi(std::vector<Point3> front, const Matrix& Y,
                                                       const Point3& ref, int q) {
  std::vector<std::pair<Eigen::Index, double>> out;
  std::vector<unsigned char> taken(static_cast<std::size_t>(Y.cols()), 0);
  while (static_cast<int>(out.size()) < q) {
    Matrix F(kObjectives, static_cast<Eigen::Index>(front.size()));
    for (std::size_t i = 0; i < front.size(); ++i)
      for (int j = 0; j < kObjectives; ++j) F(j, static_cast<Eigen::Index>(i)) = front[i][j];
    const Vector h = kernels::parallel::batch_hvi(F, Y, ref);
    Eigen::Index best = -1;
    double best_h = 0.0;
    for (Eigen::Index c = 0; c < Y.cols(); ++c)
      if (!taken[c] && h[c] > best_h) {
        best_h = h[c];
        best = c;
      }
    if (best < 0) break;
    taken[best] = 1;
    front.push_back({Y(0, best), Y(1, best), Y(2, best)});
    out.emplace_back(best, best_h);
  }
  return out;
}

Batch propose_batch(const State& state, int q, Rng& rng) {
  if (q < 1) throw PreconditionError("batch size must be >= 1");
  const auto& cfg = state.config;
  const auto n_regions = static_cast<Eigen::Index>(state.regions.size());
  const std::uint64_t base = rng();

  struct Pool {
    Matrix X;  // raw candidates
    Matrix Y;  // 3 x n Thompson draw, standardized
    int infeasible = 0;
  };
  std::vector<Pool> pools(state.regions.size());
  std::vector<std::exception_ptr> errors(state.regions.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index r = 0; r < n_regions; ++r) {
    try {
      const auto& tr = state.regions[r];
      auto local_rng = make_rng(base, {static_cast<std::uint64_t>(tr.id)});
      auto sample = sample_in_trust_region(state.spec, tr.center, tr.length, cfg.n_ts, local_rng, cfg.thinning);
      Pool& p = pools[r];
      p.X = std::move(sample.points);
      for (Eigen::Index c = 0; c < p.X.cols(); ++c)
        p.infeasible += !check_feasibility(*state.problem, p.X.col(c)).feasible;
      const Matrix U = p.X.array().colwise() / state.spec.scale.array();
      p.Y.resize(kObjectives, p.X.cols());
      for (int o = 0; o < kObjectives; ++o)
        p.Y.row(o) = draw_joint(tr.models[o], U, 1, local_rng, cfg.thompson_features, cfg.exact_limit)
                         .col(0)
                         .transpose();
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Batch batch;
  Eigen::Index total = 0;
  for (const auto& p : pools) {
    total += p.X.cols();
    batch.infeasible_candidates += p.infeasible;
  }
  batch.candidates = static_cast<int>(total);
  if (total == 0) throw Error("propose_batch: no candidates were generated");
  Matrix X(state.spec.dim(), total), Y(kObjectives, total);
  std::vector<int> owner(static_cast<std::size_t>(total));
  Eigen::Index off = 0;
  for (std::size_t r = 0; r < pools.size(); ++r) {
    const auto n = pools[r].X.cols();
    X.middleCols(off, n) = pools[r].X;
    Y.middleCols(off, n) = pools[r].Y;
    for (Eigen::Index c = 0; c < n; ++c) owner[off + c] = static_cast<int>(r);
    off += n;
  }

  const int picks = static_cast<int>(std::min<Eigen::Index>(q, total));
  const auto greedy = greedy_hvi(state.archive.front(), Y, state.archive.ref(), picks);
  std::vector<unsigned char> taken(static_cast<std::size_t>(total), 0);
  for (const auto& [c, h] : greedy) {
    taken[c] = 1;
    batch.points.push_back({X.col(c), state.regions[owner[c]].id, h});
  }
  int chosen = static_cast<int>(greedy.size());

  if (chosen < picks) {
    // No draw improves the front: fall back to range-normalized posterior means.
    batch.no_improvement = true;
    Matrix M(kObjectives, total);
    off = 0;
    for (std::size_t r = 0; r < pools.size(); ++r) {
      const auto n = pools[r].X.cols();
      if (n == 0) continue;
      const Matrix U = pools[r].X.array().colwise() / state.spec.scale.array();
      for (int o = 0; o < kObjectives; ++o)
        M.block(o, off, 1, n) = state.regions[r].models[o].predict_mean(U).transpose();
      off += n;
    }
    Vector score = Vector::Zero(total);
    for (int o = 0; o < kObjectives; ++o) {
      const double lo = M.row(o).minCoeff(), hi = M.row(o).maxCoeff();
      if (hi > lo) score += ((M.row(o).array() - lo) / (hi - lo)).matrix().transpose();
    }
    for (; chosen < picks; ++chosen) {
      Eigen::Index best = -1;
      for (Eigen::Index c = 0; c < total; ++c)
        if (!taken[c] && (best < 0 || score[c] > score[best])) best = c;
      taken[best] = 1;
      batch.points.push_back({X.col(best), state.regions[owner[best]].id, 0.0});
    }
  }
  return batch;
}

void restart_trust_region(State& state, TrustRegion& tr, Rng& rng) {
  if (state.history.empty()) throw PreconditionError("restart needs a non-empty history");
  const Point3 lambda = random_weight(rng);
  const auto obs = scalarized_argmax(history_points(state), state.archive.ref(), lambda);
  TrustRegion fresh;
  fresh.id = state.next_region_id++;
  fresh.length = state.config.l_init;
  place(state, fresh, obs);
  refit(state, fresh, true);
  tr = std::move(fresh);
}

std::vector<int> observe_and_update(State& state, const std::vector<Observation>& observations, Rng& rng) {
  const auto d = state.spec.dim();
  const std::vector<Point3> before = state.archive.front();
  const Point3 ref = state.archive.ref();
  std::vector<int> touched, improved;
  for (const auto& o : observations) {
    if (!find_region(state, o.region))
      throw PreconditionError("observation from unknown trust region " + std::to_string(o.region));
    const Point3 s = o.y.standardized();
    const bool gain = strictly_above(s, ref) && hvi(before, s, ref) > 0.0;
    if (std::find(touched.begin(), touched.end(), o.region) == touched.end()) touched.push_back(o.region);
    if (gain && std::find(improved.begin(), improved.end(), o.region) == improved.end())
      improved.push_back(o.region);
    const auto idx = static_cast<std::int64_t>(state.history.size());
    state.history.push_back(o);
    state.archive.insert(o.x, o.y, idx);
  }
  for (int id : touched) {
    auto& tr = *find_region(state, id);
    if (std::find(improved.begin(), improved.end(), id) != improved.end()) {
      ++tr.success;
      tr.failure = 0;
    } else {
      ++tr.failure;
      tr.success = 0;
    }
    update_length(tr, state.config, d);
  }

  // Move each live center to the best-contributing archive point in its window.
  const auto contrib = hvc(state.archive.front(), ref);
  std::vector<std::int64_t> claimed;
  for (auto& tr : state.regions) {
    if (tr.terminated) continue;
    std::int64_t best = -1;
    double best_c = -1.0;
    for (std::size_t i = 0; i < state.archive.size(); ++i) {
      const auto& e = state.archive.entries()[i];
      if (std::find(claimed.begin(), claimed.end(), e.id) != claimed.end()) continue;
      if (normalized_distance(state.spec, e.x, tr.center) > tr.length + 1e-12) continue;
      if (contrib[i] > best_c) {
        best_c = contrib[i];
        best = e.id;
      }
    }
    if (best >= 0) place(state, tr, static_cast<std::size_t>(best));
    claimed.push_back(tr.center_obs);
  }

  std::vector<int> restarted;
  for (auto& tr : state.regions) {
    if (tr.terminated) {
      auto local_rng = make_rng(rng(), {static_cast<std::uint64_t>(tr.id)});
      restart_trust_region(state, tr, local_rng);
      restarted.push_back(tr.id);
    } else {
      refit(state, tr, false);
    }
  }
  return restarted;
}

RunRecord run(const ProblemInstance& problem, const Config& config) {
  config.validate();
  RunRecord rec;
  rec.engine = "morbo";
  rec.seed = config.seed;
  rec.metadata["initial_design"] = "uniform hit-and-run over the feasible polytope";
  rec.metadata["thompson"] = "one joint posterior draw per objective over n_ts locations per region";
  rec.metadata["restart"] = "random-weight hypervolume scalarization over the history";
  rec.metadata["tau_fail"] = std::to_string(config.effective_tau_fail(problem.dim()));

  const auto spec = PolytopeSpec::from_instance(problem);
  auto design_rng = make_rng(config.seed, {kDesignStream});
  auto noise_rng = make_rng(config.seed, {kNoiseStream});
  auto history = initial_design(problem, spec, config.n_init, config.thinning, design_rng, noise_rng);
  auto init_rng = make_rng(config.seed, {kInitStream});
  State state = initialize(problem, std::move(history), config, init_rng);
  rec.ref = state.archive.ref();
  const auto V = generate_reference_vectors(config.dir_vectors);

  auto telemetry = [&](IterationMetrics& m, const std::vector<int>& restarted) {
    for (const auto& tr : state.regions)
      m.regions.push_back({tr.id, tr.length, tr.success, tr.failure, static_cast<int>(tr.local.size()),
                           std::find(restarted.begin(), restarted.end(), tr.id) != restarted.end()});
  };
  auto m0 = snapshot(state.archive, V, 0, static_cast<int>(state.history.size()));
  telemetry(m0, {});
  rec.iterations.push_back(std::move(m0));

  for (int it = 1; it <= config.k; ++it) {
    state.iteration = it;
    auto prop_rng = make_rng(config.seed, {kProposalStream, static_cast<std::uint64_t>(it)});
    const auto t0 = std::chrono::steady_clock::now();
    const Batch batch = propose_batch(state, config.q, prop_rng);
    const auto t1 = std::chrono::steady_clock::now();
    std::vector<Observation> obs;
    for (const auto& p : batch.points) {
      if (!check_feasibility(problem, p.x).feasible)
        throw Error("MORBO proposed an infeasible candidate at iteration " + std::to_string(it));
      obs.push_back({p.x, evaluate(problem, p.x, noise_rng), it, p.region});
    }
    auto upd_rng = make_rng(config.seed, {kUpdateStream, static_cast<std::uint64_t>(it)});
    const auto restarted = observe_and_update(state, obs, upd_rng);
    auto m = snapshot(state.archive, V, it, static_cast<int>(state.history.size()));
    m.no_improvement = batch.no_improvement;
    m.candidates = batch.candidates;
    m.infeasible_candidates = batch.infeasible_candidates;
    if (config.record_timing) m.proposal_seconds = std::chrono::duration<double>(t1 - t0).count();
    telemetry(m, restarted);
    rec.iterations.push_back(std::move(m));
  }
  rec.history = std::move(state.history);
  return rec;
}

}  // namespace dietbo::morbo
