#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "dietbo/error.hpp"
#include "dietbo/harness.hpp"
#include "dietbo/textfmt.hpp"
#include "fixtures.hpp"

using namespace dietbo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("dietbo_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

harness::ExperimentConfig smoke_convergence(const fs::path& out) {
  const std::string text = "[experiment]\nphase = convergence\ninstance = " + fixtures::reference_instance_path().string() +
                           "\nseeds = 1, 2\nk = 5\n[grid]\nn_ts = 512, 1024\n[morbo]\nn_init = 20\n";
  auto cfg = harness::ExperimentConfig::parse(text, "smoke", fixtures::source_dir());
  cfg.output_dir = out;
  return cfg;
}

RunRecord fixture_record(const std::vector<ObjectiveVector>& ys) {
  RunRecord r;
  r.engine = "morbo";
  r.group = "fixture";
  r.seed = 1;
  r.ref = {-1000, -10, -100};
  const auto& inst = fixtures::reference_instance();
  for (const auto& y : ys) r.history.push_back({*inst.reference_solution, y, 0, -1});
  IterationMetrics m;
  r.iterations.push_back(m);
  return r;
}

const ObjectiveVector kMfp{{151.4, 1.02, 14.31}};

}  // namespace

TEST_CASE("convergence smoke phase") {
  const auto out = scratch("convergence");
  const auto cfg = smoke_convergence(out);
  const auto& inst = fixtures::reference_instance();
  const auto res = harness::run_phase(cfg, inst);
  CHECK(res.failures.empty());
  REQUIRE(res.records.size() == 4);
  int summaries = 0, svgs = 0;
  for (const auto& e : res.manifest) {
    summaries += e.path == "summary.csv";
    svgs += fs::path(e.path).extension() == ".svg";
  }
  CHECK(summaries == 1);
  CHECK(svgs == 1);
  CHECK(fs::exists(out / "hypervolume.svg"));
  CHECK(fs::exists(out / "runs.csv"));
  CHECK(fs::exists(out / "morbo" / "nts512" / "archive_1.csv"));
  for (const auto& r : res.records) {
    CHECK(r.iterations.size() == 6);
    for (std::size_t i = 1; i < r.iterations.size(); ++i)
      CHECK(r.iterations[i].hypervolume >= r.iterations[i - 1].hypervolume);
  }

  SUBCASE("re-running gives byte-identical outputs") {
    auto again = cfg;
    again.output_dir = scratch("convergence_again");
    const auto res2 = harness::run_phase(again, inst);
    REQUIRE(res2.manifest.size() == res.manifest.size());
    for (std::size_t i = 0; i < res.manifest.size(); ++i) {
      CHECK(res.manifest[i].path == res2.manifest[i].path);
      CHECK(res.manifest[i].hash == res2.manifest[i].hash);
      CHECK(slurp(out / res.manifest[i].path) == slurp(again.output_dir / res2.manifest[i].path));
    }
    CHECK(slurp(out / "manifest.txt") == slurp(again.output_dir / "manifest.txt"));
  }

  SUBCASE("archive rows are feasible after reloading") {
    for (const auto& r : res.records) {
      const auto path = out / r.engine / r.group / ("archive_" + std::to_string(r.seed) + ".csv");
      const auto table = textfmt::as_table(textfmt::Document::parse("[a]\n" + slurp(path), path.string()).sections()[0],
                                           path.string());
      REQUIRE(table.rows.size() == r.final_archive().size());
      for (const auto& row : table.rows) {
        Vector x(inst.dim());
        for (Eigen::Index i = 0; i < inst.dim(); ++i)
          x[i] = std::stod(row[*table.column(inst.ingredient_names[static_cast<std::size_t>(i)])]);
        CHECK(check_feasibility(inst, x).feasible);
      }
    }
  }

  SUBCASE("records reload from the output directory") {
    const auto back = harness::load_records(out);
    REQUIRE(back.size() == res.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].ref == res.records[i].ref);
      REQUIRE(back[i].history.size() == res.records[i].history.size());
      for (std::size_t j = 0; j < back[i].history.size(); ++j) {
        CHECK(back[i].history[j].x == res.records[i].history[j].x);
        CHECK(back[i].history[j].y == res.records[i].history[j].y);
      }
      CHECK(back[i].final_archive().hypervolume() == res.records[i].final_archive().hypervolume());
    }
  }

  SUBCASE("comparison rows partition each front and count dominating runs monotonically") {
    const auto rep = harness::compare_with_reference(res.records, kMfp, harness::observed_ranges(res.records),
                                                     {1, 2, 3, 4, 5});
    REQUIRE(rep.rows.size() == 10);
    std::map<std::string, int> last;
    for (const auto& row : rep.rows) {
      double total = 0;
      for (const auto& c : row.categories) total += c.percent;
      CHECK(total == doctest::Approx(100.0).epsilon(1e-4));
      CHECK(row.dominating_runs <= row.runs);
      CHECK(row.dominating_runs >= last[row.group]);
      last[row.group] = row.dominating_runs;
    }
  }
}

TEST_CASE("hparam grid emits one table per region count") {
  const auto out = scratch("hparam");
  const std::string text = "[experiment]\nphase = hparam-grid\ninstance = " +
                           fixtures::reference_instance_path().string() +
                           "\nseeds = 3\nk = 2\n[grid]\nn_ts = 256\nn_tr = 1, 2\nl_init = 0.2, 0.4\n[morbo]\nn_init = 15\n";
  auto cfg = harness::ExperimentConfig::parse(text, "hparam", fixtures::source_dir());
  cfg.output_dir = out;
  const auto res = harness::run_phase(cfg, fixtures::reference_instance());
  CHECK(res.failures.empty());
  CHECK(res.records.size() == 4);
  for (int n_tr : {1, 2}) {
    const auto path = out / ("hparam_ntr" + std::to_string(n_tr) + ".csv");
    REQUIRE(fs::exists(path));
    std::istringstream in(slurp(path));
    std::string line;
    std::getline(in, line);
    CHECK(line == "n_ts,l_init,seed,hypervolume");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2);
  }
}

TEST_CASE("grid expansion") {
  harness::ExperimentConfig cfg;
  cfg.phase = harness::Phase::Batch;
  cfg.k = 50;
  const auto g = harness::expand_grid(cfg);
  REQUIRE(g.size() == 3);
  CHECK(g[0].label == "q1");
  CHECK(g[0].morbo.k == 50);
  CHECK(g[2].morbo.q == 3);
  CHECK(g[2].morbo.k == 17);
  cfg.phase = harness::Phase::MfpCompare;
  cfg.engine = harness::EngineChoice::Both;
  const auto m = harness::expand_grid(cfg);
  REQUIRE(m.size() == 2);
  CHECK(m[0].engine == "morbo");
  CHECK(m[1].engine == "mobo");
  cfg.phase = harness::Phase::HparamGrid;
  cfg.engine = harness::EngineChoice::Morbo;
  CHECK(harness::expand_grid(cfg).size() == 36);
}

TEST_CASE("config parsing") {
  const std::string base = "[experiment]\nphase = batch\ninstance = data/swine_reference.instance\nseeds = 4..7\n";
  const auto cfg = harness::ExperimentConfig::parse(base, "cfg", fixtures::source_dir());
  CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5, 6, 7});
  CHECK(cfg.instance_path == fixtures::source_dir() / "data" / "swine_reference.instance");
  CHECK(cfg.phase_k() == 50);
  CHECK_THROWS_AS(harness::ExperimentConfig::parse(base, "cfg", fixtures::source_dir(), harness::Phase::Convergence),
                  ValidationError);
  CHECK_THROWS(harness::ExperimentConfig::parse(base + "[bogus]\n", "cfg", fixtures::source_dir()));
  CHECK_THROWS(harness::ExperimentConfig::parse(base + "[morbo]\nn_ts = 0\n", "cfg", fixtures::source_dir()).validate());
  const auto conv = harness::ExperimentConfig::parse(
      "[experiment]\ninstance = data/swine_reference.instance\n", "cfg", fixtures::source_dir(), harness::Phase::Convergence);
  CHECK(conv.phase_k() == 150);
  CHECK(conv.seeds.size() == 30);
  for (const char* name : {"convergence.cfg", "hparam_grid.cfg", "mfp_compare.cfg", "batch.cfg", "smoke.cfg"})
    CHECK_NOTHROW(harness::ExperimentConfig::load(fixtures::source_dir() / "configs" / name).validate());
}

TEST_CASE("MFP reference file") {
  const auto& inst = fixtures::reference_instance();
  const auto mfp = harness::load_mfp(fixtures::mfp_path(), &inst);
  CHECK(mfp.y == kMfp);
  REQUIRE(mfp.x.has_value());
  CHECK(std::abs(mfp.x->sum() - 1.0) <= 1e-9);
  CHECK(*mfp.x == *inst.reference_solution);
  const auto from_inst = harness::mfp_from_instance(inst);
  REQUIRE(from_inst.has_value());
  CHECK(from_inst->y == kMfp);
}

TEST_CASE("published best MORBO diet lands in CLE and dominates") {
  const ObjectiveVector best{{149.2, 1.03, 14.45}};
  CHECK(harness::category_of(best, kMfp) == 7);
  CHECK(std::string(harness::kCategoryNames[7]) == "CLE");
  CHECK(harness::category_of(kMfp, kMfp) == 0);
  CHECK(harness::category_of({{150.0, 1.00, 14.00}}, kMfp) == 1);
  CHECK(harness::category_of({{152.0, 1.05, 14.50}}, kMfp) == 6);
  const auto cum = harness::categories_containing(best, kMfp);
  for (int c = 1; c < 8; ++c) CHECK(cum[c]);
  CHECK_FALSE(cum[0]);

  const auto rec = fixture_record({best, {{160.0, 1.2, 13.0}}});
  ObjectiveRanges ranges{{{140, 160}, {0.9, 1.2}, {13, 15}}};
  const auto rep = harness::compare_with_reference({rec}, kMfp, ranges, {0});
  REQUIRE(rep.rows.size() == 1);
  const auto& row = rep.rows[0];
  CHECK(row.dominating_runs == 1);
  CHECK(row.categories[7].solutions == 1);
  CHECK(row.categories[7].percent == doctest::Approx(50.0));
  CHECK(row.categories[7].improvement[0] == doctest::Approx(11.0));
  CHECK(row.categories[2].solutions == 1);  // lysine only
  const auto eq = harness::compare_with_reference({fixture_record({kMfp})}, kMfp, ranges, {0});
  CHECK(eq.rows[0].categories[0].solutions == 1);
  CHECK(eq.rows[0].categories[0].percent == doctest::Approx(100.0));
  CHECK(eq.rows[0].dominating_runs == 0);
  const auto cumrep = harness::compare_with_reference({rec}, kMfp, ranges, {0}, true);
  CHECK(cumrep.rows[0].categories[1].solutions == 1);
  CHECK(cumrep.rows[0].categories[2].solutions == 2);
}

TEST_CASE("empty record lists") {
  const auto& inst = fixtures::reference_instance();
  CHECK_THROWS_AS(harness::compare_with_reference({}, kMfp, {}), PreconditionError);
  const auto out = scratch("empty");
  harness::ExperimentConfig cfg;
  cfg.phase = harness::Phase::MfpCompare;
  const auto manifest = harness::emit_reports({}, {}, cfg, inst, out);
  CHECK(std::string(slurp(out / "runs.csv")) ==
        "seed,engine,group,iteration,evaluations,hypervolume,cardinality,dir,proposal_seconds\n");
  CHECK(fs::exists(out / "comparison.csv"));
  CHECK(fs::exists(out / "hypervolume.svg"));
  CHECK(manifest.size() >= 6);
}

TEST_CASE("manifest hashes follow the records") {
  const auto& inst = fixtures::reference_instance();
  harness::ExperimentConfig cfg;
  cfg.phase = harness::Phase::MfpCompare;
  auto rec = fixture_record({{{149.2, 1.03, 14.45}}, {{160.0, 1.2, 13.0}}});
  const auto a = harness::emit_reports({rec}, {}, cfg, inst, scratch("hash_a"));
  const auto b = harness::emit_reports({rec}, {}, cfg, inst, scratch("hash_b"));
  rec.history[0].y.y[1] = 1.04;
  const auto c = harness::emit_reports({rec}, {}, cfg, inst, scratch("hash_c"));
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  int changed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].hash == b[i].hash);
    changed += a[i].hash != c[i].hash;
  }
  CHECK(changed >= 2);
  CHECK(harness::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(harness::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
