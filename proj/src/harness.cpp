#include "dietbo/harness.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <optional>
#include <set>

#include "dietbo/error.hpp"
#include "dietbo/textfmt.hpp"

namespace dietbo::harness {

namespace {

using textfmt::KeyValues;

std::vector<int> int_list(const KeyValues& kv, std::string_view key, std::vector<int> fallback) {
  const auto* e = kv.find(key);
  if (!e) return fallback;
  std::vector<int> out;
  for (const auto& cell : textfmt::split_csv(e->value))
    out.push_back(static_cast<int>(textfmt::parse_integer(cell, kv.source(), e->line, key)));
  return out;
}

/// "1,2,5" or "1..30".
std::vector<std::uint64_t> parse_seeds(const textfmt::Entry& e, const std::string& source) {
  std::vector<std::uint64_t> out;
  for (const auto& cell : textfmt::split_csv(e.value)) {
    const auto dots = cell.find("..");
    if (dots == std::string::npos) {
      const long v = textfmt::parse_integer(cell, source, e.line, "seeds");
      if (v < 0) throw SchemaError(source, e.line, "seeds must be non-negative");
      out.push_back(static_cast<std::uint64_t>(v));
      continue;
    }
    const long a = textfmt::parse_integer(textfmt::trim(cell.substr(0, dots)), source, e.line, "seeds");
    const long b = textfmt::parse_integer(textfmt::trim(cell.substr(dots + 2)), source, e.line, "seeds");
    if (a < 0 || b < a) throw SchemaError(source, e.line, "bad seed range " + cell);
    for (long v = a; v <= b; ++v) out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

Smoothness parse_smoothness(const KeyValues& kv, Smoothness fallback) {
  const auto* e = kv.find("smoothness");
  if (!e) return fallback;
  if (e->value == "matern32") return Smoothness::Matern32;
  if (e->value == "matern52") return Smoothness::Matern52;
  throw SchemaError(kv.source(), e->line, "smoothness must be matern32 or matern52");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void read_morbo(const KeyValues& kv, morbo::Config& c) {
  kv.reject_unknown({"n_tr", "n_ts", "l_init", "l_max", "l_min", "tau_succ", "tau_fail", "q", "n_init",
                     "thompson_features", "exact_limit", "thinning", "ref_margin", "smoothness",
                     "refit_growth", "dir_vectors"});
  c.n_tr = static_cast<int>(kv.integer("n_tr", c.n_tr));
  c.n_ts = static_cast<int>(kv.integer("n_ts", c.n_ts));
  c.l_init = kv.number("l_init", c.l_init);
  c.l_max = kv.number("l_max", c.l_max);
  c.l_min = kv.number("l_min", c.l_min);
  c.tau_succ = static_cast<int>(kv.integer("tau_succ", c.tau_succ));
  c.tau_fail = static_cast<int>(kv.integer("tau_fail", c.tau_fail));
  c.q = static_cast<int>(kv.integer("q", c.q));
  c.n_init = static_cast<int>(kv.integer("n_init", c.n_init));
  c.thompson_features = static_cast<int>(kv.integer("thompson_features", c.thompson_features));
  c.exact_limit = static_cast<int>(kv.integer("exact_limit", c.exact_limit));
  c.thinning = static_cast<int>(kv.integer("thinning", c.thinning));
  c.ref_margin = kv.number("ref_margin", c.ref_margin);
  c.smoothness = parse_smoothness(kv, c.smoothness);
  c.refit_growth = kv.number("refit_growth", c.refit_growth);
  c.dir_vectors = static_cast<int>(kv.integer("dir_vectors", c.dir_vectors));
}

void read_mobo(const KeyValues& kv, mobo::Config& c) {
  kv.reject_unknown({"n_init", "n_mc", "q", "candidate_pool", "refine_pool", "refine_edge", "n_features",
                     "exact_limit", "thinning", "ref_margin", "smoothness", "dir_vectors"});
  c.n_init = static_cast<int>(kv.integer("n_init", c.n_init));
  c.n_mc = static_cast<int>(kv.integer("n_mc", c.n_mc));
  c.q = static_cast<int>(kv.integer("q", c.q));
  c.candidate_pool = static_cast<int>(kv.integer("candidate_pool", c.candidate_pool));
  c.refine_pool = static_cast<int>(kv.integer("refine_pool", c.refine_pool));
  c.refine_edge = kv.number("refine_edge", c.refine_edge);
  c.n_features = static_cast<int>(kv.integer("n_features", c.n_features));
  c.exact_limit = static_cast<int>(kv.integer("exact_limit", c.exact_limit));
  c.thinning = static_cast<int>(kv.integer("thinning", c.thinning));
  c.ref_margin = kv.number("ref_margin", c.ref_margin);
  c.smoothness = parse_smoothness(kv, c.smoothness);
  c.dir_vectors = static_cast<int>(kv.integer("dir_vectors", c.dir_vectors));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Convergence: return "convergence";
    case Phase::HparamGrid: return "hparam-grid";
    case Phase::MfpCompare: return "mfp-compare";
    case Phase::Batch: return "batch";
  }
  return "?";
}

Phase parse_phase(std::string_view text) {
  if (text == "convergence") return Phase::Convergence;
  if (text == "hparam-grid") return Phase::HparamGrid;
  if (text == "mfp-compare") return Phase::MfpCompare;
  if (text == "batch") return Phase::Batch;
  throw ValidationError("phase", "unknown phase '" + std::string(text) + "'");
}

std::string to_string(EngineChoice e) {
  switch (e) {
    case EngineChoice::Morbo: return "morbo";
    case EngineChoice::Mobo: return "mobo";
    case EngineChoice::Both: return "both";
  }
  return "?";
}

EngineChoice parse_engine(std::string_view text) {
  if (text == "morbo") return EngineChoice::Morbo;
  if (text == "mobo") return EngineChoice::Mobo;
  if (text == "both") return EngineChoice::Both;
  throw ValidationError("engine", "unknown engine '" + std::string(text) + "'");
}

MfpReference parse_mfp(std::string_view text, const std::string& source, const ProblemInstance* inst) {
  const auto doc = textfmt::Document::parse(text, source);
  doc.reject_unknown_sections({"objectives", "solution"});
  const auto kv = textfmt::as_keyvalues(doc.require("objectives"), source);
  kv.reject_unknown({"cost", "lysine", "energy"});
  MfpReference ref;
  for (int j = 0; j < kObjectives; ++j) {
    if (!kv.find(kObjectiveNames[j]))
      throw SchemaError(source, doc.require("objectives").line, std::string("missing ") + kObjectiveNames[j]);
    ref.y.y[j] = kv.number(kObjectiveNames[j], 0.0);
  }
  if (const auto* sec = doc.find("solution")) {
    const auto table = textfmt::as_table(*sec, source);
    const auto name = table.column("name"), value = table.column("proportion");
    if (!name || !value) throw SchemaError(source, table.header_line, "solution needs name and proportion");
    if (!inst) return ref;  // names can only be matched against an instance
    Vector x = Vector::Zero(inst->dim());
    std::vector<bool> seen(static_cast<std::size_t>(inst->dim()), false);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& cell = table.rows[r][*name];
      const auto it = std::find(inst->ingredient_names.begin(), inst->ingredient_names.end(), cell);
      if (it == inst->ingredient_names.end())
        throw SchemaError(source, table.row_lines[r], "unknown ingredient '" + cell + "'");
      const auto i = static_cast<std::size_t>(it - inst->ingredient_names.begin());
      if (seen[i]) throw SchemaError(source, table.row_lines[r], "duplicate ingredient '" + cell + "'");
      seen[i] = true;
      x[static_cast<Eigen::Index>(i)] =
          textfmt::parse_number(table.rows[r][*value], source, table.row_lines[r], "proportion");
    }
    ref.x = std::move(x);
  }
  return ref;
}

MfpReference load_mfp(const std::filesystem::path& path, const ProblemInstance* inst) {
  return parse_mfp(read_text(path), path.string(), inst);
}

std::optional<MfpReference> mfp_from_instance(const ProblemInstance& inst) {
  MfpReference ref;
  for (int j = 0; j < kObjectives; ++j) {
    const auto it = inst.reference_profile.find(kObjectiveNames[j]);
    if (it == inst.reference_profile.end()) return std::nullopt;
    ref.y.y[j] = it->second;
  }
  ref.x = inst.reference_solution;
  return ref;
}

int ExperimentConfig::phase_k() const {
  if (k > 0) return k;
  return phase == Phase::Convergence ? 150 : 50;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ValidationError("seeds", "must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ValidationError("seeds", "must be distinct");
  if (k < 0) throw ValidationError("k", "must be >= 0");
  if (workers < 1) throw ValidationError("workers", "must be >= 1");
  if (n_ts_grid.empty() || n_tr_grid.empty() || l_init_grid.empty() || q_grid.empty())
    throw ValidationError("grid", "grids must be non-empty");
  if ((phase == Phase::Convergence || phase == Phase::HparamGrid) && engine != EngineChoice::Morbo)
    throw ValidationError("engine", to_string(phase) + " sweeps MORBO hyperparameters; use engine = morbo");
  for (const auto& g : expand_grid(*this)) {
    if (g.engine == "morbo") g.morbo.validate();
    else g.mobo.validate();
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text, const std::string& source,
                                         const std::filesystem::path& base_dir, std::optional<Phase> phase_override) {
  const auto doc = textfmt::Document::parse(text, source);
  doc.reject_unknown_sections({"experiment", "grid", "morbo", "mobo"});
  ExperimentConfig c;
  const auto ex = textfmt::as_keyvalues(doc.require("experiment"), source);
  ex.reject_unknown({"phase", "engine", "instance", "seeds", "k", "workers", "record_timing", "categories",
                     "mfp", "output_dir"});
  const auto phase = ex.get("phase");
  if (!phase && !phase_override) throw SchemaError(source, doc.require("experiment").line, "missing phase");
  c.phase = phase ? parse_phase(*phase) : *phase_override;
  if (phase_override && *phase_override != c.phase)
    throw ValidationError("phase", "config is for phase " + *phase + ", not " + to_string(*phase_override));
  c.engine = parse_engine(ex.get("engine").value_or(c.phase == Phase::MfpCompare ? "both" : "morbo"));
  const auto inst = ex.get("instance");
  if (!inst) throw SchemaError(source, doc.require("experiment").line, "missing instance");
  c.instance_path = resolve(base_dir, *inst);
  if (const auto* e = ex.find("seeds")) c.seeds = parse_seeds(*e, source);
  else
    for (std::uint64_t s = 1; s <= 30; ++s) c.seeds.push_back(s);
  c.k = static_cast<int>(ex.integer("k", 0));
  c.workers = static_cast<int>(ex.integer("workers", 1));
  c.record_timing = ex.boolean("record_timing", false);
  if (const auto* e = ex.find("categories")) {
    if (e->value != "exclusive" && e->value != "cumulative")
      throw SchemaError(source, e->line, "categories must be exclusive or cumulative");
    c.cumulative_categories = e->value == "cumulative";
  }
  if (const auto p = ex.get("output_dir")) c.output_dir = resolve(base_dir, *p);
  if (const auto p = ex.get("mfp")) {
    const auto instance = load_instance(c.instance_path);
    c.mfp = load_mfp(resolve(base_dir, *p), &instance);
  }

  if (const auto* sec = doc.find("grid")) {
    const auto g = textfmt::as_keyvalues(*sec, source);
    g.reject_unknown({"n_ts", "n_tr", "l_init", "q"});
    c.n_ts_grid = int_list(g, "n_ts", c.n_ts_grid);
    c.n_tr_grid = int_list(g, "n_tr", c.n_tr_grid);
    c.l_init_grid = g.numbers("l_init", c.l_init_grid);
    c.q_grid = int_list(g, "q", c.q_grid);
  }
  if (const auto* sec = doc.find("morbo")) read_morbo(textfmt::as_keyvalues(*sec, source), c.morbo);
  if (const auto* sec = doc.find("mobo")) read_mobo(textfmt::as_keyvalues(*sec, source), c.mobo);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path, std::optional<Phase> phase_override) {
  return parse(read_text(path), path.string(), path.parent_path(), phase_override);
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& config) {
  std::vector<GridPoint> out;
  const int k = config.phase_k();
  auto morbo_point = [&](std::string label) {
    GridPoint g;
    g.engine = "morbo";
    g.label = std::move(label);
    g.morbo = config.morbo;
    g.morbo.k = k;
    g.morbo.record_timing = config.record_timing;
    return g;
  };
  auto mobo_point = [&](std::string label) {
    GridPoint g;
    g.engine = "mobo";
    g.label = std::move(label);
    g.mobo = config.mobo;
    g.mobo.k = k;
    g.mobo.record_timing = config.record_timing;
    return g;
  };
  const bool want_morbo = config.engine != EngineChoice::Mobo;
  const bool want_mobo = config.engine != EngineChoice::Morbo;
  switch (config.phase) {
    case Phase::Convergence:
      for (int n_ts : config.n_ts_grid) {
        auto g = morbo_point("nts" + std::to_string(n_ts));
        g.morbo.n_ts = n_ts;
        out.push_back(std::move(g));
      }
      break;
    case Phase::HparamGrid:
      for (int n_tr : config.n_tr_grid)
        for (int n_ts : config.n_ts_grid)
          for (double l : config.l_init_grid) {
            auto g = morbo_point("ntr" + std::to_string(n_tr) + "_nts" + std::to_string(n_ts) + "_linit" +
                                 format_double(l));
            g.morbo.n_tr = n_tr;
            g.morbo.n_ts = n_ts;
            g.morbo.l_init = l;
            out.push_back(std::move(g));
          }
      break;
    case Phase::MfpCompare:
      if (want_morbo) out.push_back(morbo_point("k" + std::to_string(k)));
      if (want_mobo) out.push_back(mobo_point("k" + std::to_string(k)));
      break;
    case Phase::Batch:
      for (int q : config.q_grid) {
        // Same evaluation budget for every batch size.
        const int kq = q > 0 ? (k + q - 1) / q : k;
        if (want_morbo) {
          auto g = morbo_point("q" + std::to_string(q));
          g.morbo.q = q;
          g.morbo.k = kq;
          out.push_back(std::move(g));
        }
        if (want_mobo) {
          auto g = mobo_point("q" + std::to_string(q));
          g.mobo.q = q;
          g.mobo.k = kq;
          out.push_back(std::move(g));
        }
      }
      break;
  }
  return out;
}

PhaseResult run_phase(const ExperimentConfig& config, const ProblemInstance& instance) {
  config.validate();
  const auto grid = expand_grid(config);
  const std::size_t n_jobs = grid.size() * config.seeds.size();
  std::vector<std::optional<RunRecord>> done(n_jobs);
  std::vector<std::optional<RunFailure>> failed(n_jobs);

#pragma omp parallel for schedule(dynamic, 1) num_threads(config.workers)
  for (std::size_t j = 0; j < n_jobs; ++j) {
    const auto& g = grid[j / config.seeds.size()];
    const std::uint64_t seed = config.seeds[j % config.seeds.size()];
    try {
      RunRecord rec;
      if (g.engine == "morbo") {
        auto c = g.morbo;
        c.seed = seed;
        rec = morbo::run(instance, c);
      } else {
        auto c = g.mobo;
        c.seed = seed;
        rec = mobo::run(instance, c);
      }
      rec.group = g.label;
      done[j] = std::move(rec);
    } catch (const std::exception& e) {
      failed[j] = RunFailure{g.engine, g.label, seed, e.what()};
    }
  }

  PhaseResult result;
  for (std::size_t j = 0; j < n_jobs; ++j) {
    if (done[j]) result.records.push_back(std::move(*done[j]));
    if (failed[j]) result.failures.push_back(std::move(*failed[j]));
  }
  if (!config.output_dir.empty())
    result.manifest = emit_reports(result.records, result.failures, config, instance, config.output_dir);
  return result;
}

}  // namespace dietbo::harness
