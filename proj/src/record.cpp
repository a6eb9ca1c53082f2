#include "dietbo/record.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "dietbo/error.hpp"
#include "dietbo/textfmt.hpp"

namespace dietbo {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<Observation> initial_design(const ProblemInstance& problem, const PolytopeSpec& spec, int n,
                                        int thinning, Rng& rng, Rng& noise) {
  if (n < 1) throw PreconditionError("initial design needs at least one point");
  const Vector x0 = find_interior_point(spec, rng);
  // Burn-in so the design does not cluster around the interior start.
  constexpr int kBurnIn = 20;
  const auto draws = hit_and_run(spec, x0, n + kBurnIn, thinning, rng);
  if (draws.fallback || draws.points.cols() < n + kBurnIn)
    throw Error("initial design: hit-and-run stalled on the feasible polytope");
  std::vector<Observation> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Observation o;
    o.x = draws.points.col(kBurnIn + i);
    o.y = evaluate(problem, o.x, noise);
    out.push_back(std::move(o));
  }
  return out;
}

IterationMetrics snapshot(const ParetoArchive& archive, const ReferenceVectorSet& V, int iteration,
                          int evaluations) {
  IterationMetrics m;
  m.iteration = iteration;
  m.evaluations = evaluations;
  const auto front = archive.front();
  m.hypervolume = hypervolume_exact(front, archive.ref());
  m.cardinality = static_cast<int>(front.size());
  m.dir = front.size() >= 2 ? dir(front, V) : std::numeric_limits<double>::quiet_NaN();
  return m;
}

ParetoArchive RunRecord::archive_at(int iteration) const {
  ParetoArchive archive(ref);
  for (std::size_t i = 0; i < history.size(); ++i)
    if (history[i].iteration <= iteration)
      archive.insert(history[i].x, history[i].y, static_cast<std::int64_t>(i));
  return archive;
}

ParetoArchive RunRecord::final_archive() const {
  return archive_at(std::numeric_limits<int>::max());
}

int RunRecord::evaluations_at(int iteration) const {
  int n = 0;
  for (const auto& o : history) n += o.iteration <= iteration;
  return n;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void write_history_csv(const RunRecord& rec, const ProblemInstance& inst,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "iteration,region";
  for (const auto& n : inst.ingredient_names) out << ',' << n;
  out << ",cost,lysine,energy\n";
  for (const auto& o : rec.history) {
    out << o.iteration << ',' << o.region;
    for (Eigen::Index i = 0; i < o.x.size(); ++i) out << ',' << format_double(o.x[i]);
    for (double v : o.y.y) out << ',' << format_double(v);
    out << '\n';
  }
  finish(out, path);
}

std::vector<Observation> read_history_csv(const std::filesystem::path& path, Eigen::Index dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = textfmt::split_csv(line);
  const auto expected = static_cast<std::size_t>(dim + 5);
  if (header.size() != expected || header[0] != "iteration")
    throw SchemaError(path.string(), 1, "unexpected history header");
  std::vector<Observation> out;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (textfmt::trim(line).empty()) continue;
    const auto cells = textfmt::split_csv(line);
    if (cells.size() != expected)
      throw SchemaError(path.string(), number, "expected " + std::to_string(expected) + " cells");
    Observation o;
    o.iteration = static_cast<int>(textfmt::parse_integer(cells[0], path.string(), number, "iteration"));
    o.region = static_cast<int>(textfmt::parse_integer(cells[1], path.string(), number, "region"));
    o.x.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      o.x[i] = textfmt::parse_number(cells[2 + i], path.string(), number, header[2 + i]);
    for (int j = 0; j < kObjectives; ++j)
      o.y.y[j] = textfmt::parse_number(cells[2 + dim + j], path.string(), number, kObjectiveNames[j]);
    out.push_back(std::move(o));
  }
  return out;
}

void write_archive_csv(const RunRecord& rec, const ProblemInstance& inst,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "observation";
  for (const auto& n : inst.ingredient_names) out << ',' << n;
  out << ",cost,lysine,energy\n";
  auto archive = rec.final_archive();
  auto entries = archive.entries();
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& e : entries) {
    out << e.id;
    for (Eigen::Index i = 0; i < e.x.size(); ++i) out << ',' << format_double(e.x[i]);
    for (double v : e.y.y) out << ',' << format_double(v);
    out << '\n';
  }
  finish(out, path);
}

void write_regions_csv(const RunRecord& rec, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "iteration,region,length,success,failure,local_points,restarted\n";
  for (const auto& it : rec.iterations)
    for (const auto& r : it.regions)
      out << it.iteration << ',' << r.id << ',' << format_double(r.length) << ',' << r.success << ','
          << r.failure << ',' << r.local_points << ',' << (r.restarted ? 1 : 0) << '\n';
  finish(out, path);
}

}  // namespace dietbo
