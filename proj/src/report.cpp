#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dietbo/error.hpp"
#include "dietbo/harness.hpp"
#include "dietbo/pareto.hpp"
#include "dietbo/textfmt.hpp"

namespace dietbo::harness {

namespace {

namespace fs = std::filesystem;

// Objective mask of each category; bit 0 C, bit 1 L, bit 2 E.
constexpr int kCategoryMask[8] = {0, 1, 2, 4, 3, 5, 6, 7};

int improved_mask(const ObjectiveVector& y, const ObjectiveVector& mfp) {
  const Point3 s = y.standardized(), m = mfp.standardized();
  int mask = 0;
  for (int j = 0; j < kObjectives; ++j)
    if (s[j] > m[j]) mask |= 1 << j;
  return mask;
}

struct Writer {
  fs::path root;
  std::vector<std::string> files;

  fs::path path(const std::string& rel) {
    const fs::path p = root / rel;
    fs::create_directories(p.parent_path());
    files.push_back(rel);
    return p;
  }
  void text(const std::string& rel, const std::string& content) {
    const auto p = path(rel);
    std::ofstream out(p, std::ios::binary);
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + p.string());
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string run_dir(const RunRecord& r) { return r.engine + "/" + r.group; }

struct Stat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  int n = 0;
};

Stat stat_of(const std::vector<double>& v) {
  Stat s;
  std::vector<double> f;
  for (double x : v)
    if (std::isfinite(x)) f.push_back(x);
  s.n = static_cast<int>(f.size());
  if (f.empty()) return s;
  double sum = 0.0;
  for (double x : f) sum += x;
  s.mean = sum / f.size();
  double ss = 0.0;
  for (double x : f) ss += (x - s.mean) * (x - s.mean);
  s.sd = f.size() > 1 ? std::sqrt(ss / (f.size() - 1)) : 0.0;
  return s;
}

struct Group {
  std::string engine, label;
  std::vector<const RunRecord*> runs;
  int max_iteration() const {
    int k = 0;
    for (const auto* r : runs) {
      if (!r->iterations.empty()) k = std::max(k, r->iterations.back().iteration);
      for (const auto& o : r->history) k = std::max(k, o.iteration);
    }
    return k;
  }
};

std::vector<Group> group_records(const std::vector<RunRecord>& records) {
  std::vector<Group> groups;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.engine == r.engine && g.label == r.group; });
    if (it == groups.end()) {
      groups.push_back({r.engine, r.group, {}});
      it = groups.end() - 1;
    }
    it->runs.push_back(&r);
  }
  return groups;
}

double metric(const IterationMetrics& m, int which) {
  switch (which) {
    case 0: return m.hypervolume;
    case 1: return m.cardinality;
    default: return m.dir;
  }
}

std::vector<Series> metric_series(const std::vector<Group>& groups, int which) {
  std::vector<Series> out;
  for (const auto& g : groups) {
    Series s;
    s.label = g.engine + " " + g.label;
    const int k = g.max_iteration();
    for (int it = 0; it <= k; ++it) {
      std::vector<double> v;
      for (const auto* r : g.runs)
        if (it < static_cast<int>(r->iterations.size())) v.push_back(metric(r->iterations[it], which));
      const auto st = stat_of(v);
      if (st.n == 0) continue;
      s.x.push_back(it);
      s.mean.push_back(st.mean);
      s.sd.push_back(st.sd);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int category_of(const ObjectiveVector& y, const ObjectiveVector& mfp) {
  const int mask = improved_mask(y, mfp);
  return static_cast<int>(std::find(std::begin(kCategoryMask), std::end(kCategoryMask), mask) - kCategoryMask);
}

std::array<bool, 8> categories_containing(const ObjectiveVector& y, const ObjectiveVector& mfp) {
  const int mask = improved_mask(y, mfp);
  std::array<bool, 8> out{};
  out[0] = mask == 0;
  for (int c = 1; c < 8; ++c) out[c] = (kCategoryMask[c] & mask) == kCategoryMask[c];
  return out;
}

std::vector<int> comparison_checkpoints(const std::vector<RunRecord>& records) {
  std::vector<int> cps{10, 20, 30, 40, 50};
  for (const auto& g : group_records(records)) cps.push_back(g.max_iteration());
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

ObjectiveRanges observed_ranges(const std::vector<RunRecord>& records) {
  ObjectiveRanges r;
  for (auto& p : r) p = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& rec : records)
    for (const auto& o : rec.history)
      for (int j = 0; j < kObjectives; ++j) {
        r[j].first = std::min(r[j].first, o.y.y[j]);
        r[j].second = std::max(r[j].second, o.y.y[j]);
      }
  return r;
}

ComparisonReport compare_with_reference(const std::vector<RunRecord>& records, const ObjectiveVector& mfp,
                                        const ObjectiveRanges& ranges, const std::vector<int>& checkpoints,
                                        bool cumulative) {
  if (records.empty()) throw PreconditionError("compare_with_reference: no records");
  ComparisonReport rep;
  rep.cumulative = cumulative;
  rep.ranges = ranges;
  const Point3 m = mfp.standardized();
  for (const auto& g : group_records(records)) {
    const int k = g.max_iteration();
    for (int cp : checkpoints) {
      if (cp > k) continue;
      ComparisonRow row;
      row.engine = g.engine;
      row.group = g.label;
      row.checkpoint = cp;
      std::array<double, 8> pct_sum{};
      std::array<Point3, 8> imp_sum{};
      int counted_runs = 0;
      for (const auto* r : g.runs) {
        ++row.runs;
        const auto archive = r->archive_at(cp);
        bool dominating = false;
        std::array<int, 8> counts{};
        for (const auto& e : archive.entries()) {
          if (dominates(e.s, m)) dominating = true;
          std::array<bool, 8> in{};
          if (cumulative) in = categories_containing(e.y, mfp);
          else in[category_of(e.y, mfp)] = true;
          const Point3 d = improvement_distance(e.y, mfp, ranges);
          for (int c = 0; c < 8; ++c) {
            if (!in[c]) continue;
            ++counts[c];
            ++row.categories[c].solutions;
            for (int j = 0; j < kObjectives; ++j) imp_sum[c][j] += 100.0 * d[j];
          }
        }
        row.dominating_runs += dominating;
        if (archive.empty()) continue;
        ++counted_runs;
        for (int c = 0; c < 8; ++c) pct_sum[c] += 100.0 * counts[c] / static_cast<double>(archive.size());
      }
      for (int c = 0; c < 8; ++c) {
        auto& cs = row.categories[c];
        cs.percent = counted_runs > 0 ? pct_sum[c] / counted_runs : 0.0;
        for (int j = 0; j < kObjectives; ++j)
          cs.improvement[j] = cs.solutions > 0 ? imp_sum[c][j] / cs.solutions : 0.0;
      }
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

void write_comparison_csv(const ComparisonReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "engine,group,checkpoint,mode,category,percent,solutions,improvement_cost,improvement_lysine,"
         "improvement_energy,runs,dominating_runs\n";
  for (const auto& row : report.rows)
    for (int c = 0; c < 8; ++c) {
      const auto& cs = row.categories[c];
      out << row.engine << ',' << row.group << ',' << row.checkpoint << ','
          << (report.cumulative ? "cumulative" : "exclusive") << ',' << kCategoryNames[c] << ','
          << format_double(cs.percent) << ',' << cs.solutions << ',' << format_double(cs.improvement[0]) << ','
          << format_double(cs.improvement[1]) << ',' << format_double(cs.improvement[2]) << ',' << row.runs
          << ',' << row.dominating_runs << '\n';
    }
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series, const std::string& data_note) {
  constexpr double W = 760, H = 460, L = 70, R = 200, T = 40, B = 50;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.mean[i] - s.sd[i]);
      y1 = std::max(y1, s.mean[i] + s.sd[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
    << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<!-- " << escape(data_note) << " -->\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = x0 + (x1 - x0) * t / 5.0, yv = y0 + (y1 - y0) * t / 5.0;
    o << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << tick(xv)
      << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << fmt(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
      << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << fmt(py(yv)) << "\" x2=\"" << W - R << "\" y2=\"" << fmt(py(yv))
      << "\" stroke=\"#e0e0e0\"/>\n";
  }
  o << "<text x=\"" << fmt((L + W - R) / 2) << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << fmt((T + H - B) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fmt((T + H - B) / 2) << ")\">" << escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % 10];
    if (!s.x.empty()) {
      o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) o << fmt(px(s.x[i])) << ',' << fmt(py(s.mean[i] + s.sd[i])) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;) o << fmt(px(s.x[i])) << ',' << fmt(py(s.mean[i] - s.sd[i])) << ' ';
      o << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) o << fmt(px(s.x[i])) << ',' << fmt(py(s.mean[i])) << ' ';
      o << "\"/>\n";
    }
    const double ly = T + 10 + 18.0 * k;
    o << "<rect x=\"" << W - R + 12 << "\" y=\"" << fmt(ly - 8) << "\" width=\"14\" height=\"8\" fill=\"" << color
      << "\"/>\n<text x=\"" << W - R + 32 << "\" y=\"" << fmt(ly) << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<ManifestEntry> emit_reports(const std::vector<RunRecord>& records,
                                        const std::vector<RunFailure>& failures, const ExperimentConfig& config,
                                        const ProblemInstance& instance, const std::filesystem::path& out_dir) {
  fs::create_directories(out_dir);
  Writer w{out_dir, {}};
  const auto groups = group_records(records);

  {
    std::ostringstream o;
    o << "engine,group,seed,dim,ref_cost,ref_lysine,ref_energy,history\n";
    for (const auto& r : records)
      o << r.engine << ',' << r.group << ',' << r.seed << ',' << instance.dim() << ',' << format_double(r.ref[0])
        << ',' << format_double(r.ref[1]) << ',' << format_double(r.ref[2]) << ',' << run_dir(r) << "/history_"
        << r.seed << ".csv\n";
    w.text("records.csv", o.str());
  }
  {
    std::ostringstream o;
    o << "seed,engine,group,iteration,evaluations,hypervolume,cardinality,dir,proposal_seconds\n";
    for (const auto& r : records)
      for (const auto& m : r.iterations)
        o << r.seed << ',' << r.engine << ',' << r.group << ',' << m.iteration << ',' << m.evaluations << ','
          << format_double(m.hypervolume) << ',' << m.cardinality << ',' << format_double(m.dir) << ','
          << format_double(m.proposal_seconds) << '\n';
    w.text("runs.csv", o.str());
  }
  {
    std::ostringstream o;
    o << "engine,group,checkpoint,runs,hv_mean,hv_sd,cardinality_mean,cardinality_sd,dir_mean,dir_sd\n";
    for (const auto& g : groups) {
      const int k = g.max_iteration();
      std::vector<int> cps;
      for (int c = 10; c <= k; c += 10) cps.push_back(c);
      if (cps.empty() || cps.back() != k) cps.push_back(k);
      for (int cp : cps) {
        std::vector<double> hv, card, dv;
        for (const auto* r : g.runs)
          if (cp < static_cast<int>(r->iterations.size())) {
            hv.push_back(r->iterations[cp].hypervolume);
            card.push_back(r->iterations[cp].cardinality);
            dv.push_back(r->iterations[cp].dir);
          }
        const auto a = stat_of(hv), b = stat_of(card), c = stat_of(dv);
        o << g.engine << ',' << g.label << ',' << cp << ',' << a.n << ',' << format_double(a.mean) << ','
          << format_double(a.sd) << ',' << format_double(b.mean) << ',' << format_double(b.sd) << ','
          << format_double(c.mean) << ',' << format_double(c.sd) << '\n';
      }
    }
    w.text("summary.csv", o.str());
  }
  {
    std::ostringstream o;
    o << "engine,group,seed,message\n";
    for (const auto& f : failures) {
      std::string msg = f.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      o << f.engine << ',' << f.group << ',' << f.seed << ',' << msg << '\n';
    }
    w.text("failures.csv", o.str());
  }
  for (const auto& r : records) {
    const std::string dir = run_dir(r);
    write_history_csv(r, instance, w.path(dir + "/history_" + std::to_string(r.seed) + ".csv"));
    write_archive_csv(r, instance, w.path(dir + "/archive_" + std::to_string(r.seed) + ".csv"));
    if (r.engine == "morbo") write_regions_csv(r, w.path(dir + "/regions_" + std::to_string(r.seed) + ".csv"));
  }

  if (config.phase == Phase::HparamGrid) {
    for (int n_tr : config.n_tr_grid) {
      std::ostringstream o;
      o << "n_ts,l_init,seed,hypervolume\n";
      const std::string prefix = "ntr" + std::to_string(n_tr) + "_";
      for (const auto& r : records) {
        if (r.group.rfind(prefix, 0) != 0 || r.iterations.empty()) continue;
        const auto nts = r.group.substr(prefix.size() + 3, r.group.find("_linit") - prefix.size() - 3);
        const auto l = r.group.substr(r.group.find("_linit") + 6);
        o << nts << ',' << l << ',' << r.seed << ',' << format_double(r.iterations.back().hypervolume) << '\n';
      }
      w.text("hparam_ntr" + std::to_string(n_tr) + ".csv", o.str());
    }
  }

  std::optional<MfpReference> mfp = config.mfp;
  if (!mfp) mfp = mfp_from_instance(instance);
  if (mfp) {
    const auto cps = comparison_checkpoints(records);
    if (!records.empty()) {
      const auto rep =
          compare_with_reference(records, mfp->y, observed_ranges(records), cps, config.cumulative_categories);
      write_comparison_csv(rep, w.path("comparison.csv"));
    } else {
      write_comparison_csv(ComparisonReport{}, w.path("comparison.csv"));
    }
  }

  const std::string note = "data: runs.csv, phase " + to_string(config.phase) + ", mean and +-1 sd over seeds";
  w.text("hypervolume.svg",
         line_plot_svg("Hypervolume", "iteration", "hypervolume", metric_series(groups, 0), note));
  // The engine comparison figure also tracks cardinality and DIR.
  if (config.phase == Phase::MfpCompare) {
    w.text("cardinality.svg",
           line_plot_svg("Pareto set cardinality", "iteration", "cardinality", metric_series(groups, 1), note));
    w.text("dir.svg", line_plot_svg("DIR", "iteration", "DIR", metric_series(groups, 2), note));
  }

  std::vector<ManifestEntry> manifest;
  auto files = w.files;
  std::sort(files.begin(), files.end());
  std::ostringstream o;
  for (const auto& f : files) {
    const auto h = fnv1a64(read_file(out_dir / f));
    manifest.push_back({f, h});
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    o << buf << "  " << f << '\n';
  }
  w.text("manifest.txt", o.str());
  return manifest;
}

std::vector<RunRecord> load_records(const std::filesystem::path& dir) {
  const auto index = dir / "records.csv";
  std::ifstream in(index);
  if (!in) throw Error("cannot open " + index.string());
  std::string line;
  std::getline(in, line);
  if (textfmt::split_csv(line).size() != 8) throw SchemaError(index.string(), 1, "unexpected records header");
  std::vector<RunRecord> out;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (textfmt::trim(line).empty()) continue;
    const auto c = textfmt::split_csv(line);
    if (c.size() != 8) throw SchemaError(index.string(), number, "expected 8 cells");
    RunRecord r;
    r.engine = c[0];
    r.group = c[1];
    r.seed = static_cast<std::uint64_t>(textfmt::parse_integer(c[2], index.string(), number, "seed"));
    const auto d = textfmt::parse_integer(c[3], index.string(), number, "dim");
    for (int j = 0; j < kObjectives; ++j) r.ref[j] = textfmt::parse_number(c[4 + j], index.string(), number, "ref");
    r.history = read_history_csv(dir / c[7], d);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dietbo::harness
