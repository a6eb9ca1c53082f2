#include "dietbo/problem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <set>

#include "dietbo/error.hpp"
#include "dietbo/textfmt.hpp"

namespace dietbo {

namespace {

void require_dim(const Vector& x, Eigen::Index d, const char* what) {
  if (x.size() != d)
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(d) + ", got " +
                         std::to_string(x.size()));
}

void require_finite(const Vector& v, const std::string& field) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) throw ValidationError(field, "non-finite entry at " + std::to_string(i));
}

}  // namespace

void ProblemInstance::validate() const {
  const auto d = dim();
  const auto a = n_nutrients();
  if (d < 2) throw ValidationError("ingredients", "need at least 2 ingredients");
  if (a < 1) throw ValidationError("nutrients", "need at least 1 nutrient");
  auto check_len = [](const Vector& v, Eigen::Index n, const char* field) {
    if (v.size() != n)
      throw ValidationError(field, "length " + std::to_string(v.size()) + ", expected " +
                                       std::to_string(n));
  };
  check_len(cost, d, "cost");
  check_len(lysine, d, "lysine");
  check_len(energy, d, "energy");
  check_len(ingredient_upper, d, "max_proportion");
  check_len(nutrient_lower, a, "nutrient_lower");
  check_len(nutrient_upper, a, "nutrient_upper");
  if (composition.rows() != d || composition.cols() != a)
    throw ValidationError("composition", "shape " + std::to_string(composition.rows()) + "x" +
                                             std::to_string(composition.cols()) + ", expected " +
                                             std::to_string(d) + "x" + std::to_string(a));
  require_finite(cost, "cost");
  require_finite(lysine, "lysine");
  require_finite(energy, "energy");
  require_finite(ingredient_upper, "max_proportion");
  for (Eigen::Index j = 0; j < a; ++j) {
    if (!composition.col(j).allFinite())
      throw ValidationError(nutrient_names[j], "non-finite composition entry");
    if (std::isnan(nutrient_lower[j]) || std::isnan(nutrient_upper[j]))
      throw ValidationError(nutrient_names[j], "NaN bound");
    if (nutrient_lower[j] > nutrient_upper[j])
      throw ValidationError(nutrient_names[j], "lower bound exceeds upper bound");
  }
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(ingredient_upper[i] > 0.0 && ingredient_upper[i] <= 1.0))
      throw ValidationError(ingredient_names[i], "max_proportion must lie in (0, 1]");
  for (int j = 0; j < kObjectives; ++j)
    if (!(noise_std[j] >= 0.0) || !std::isfinite(noise_std[j]))
      throw ValidationError("noise", "standard deviations must be finite and >= 0");
  std::set<std::string> seen;
  for (const auto& n : ingredient_names)
    if (!seen.insert(n).second) throw ValidationError(n, "duplicate ingredient name");
  seen.clear();
  for (const auto& n : nutrient_names)
    if (!seen.insert(n).second) throw ValidationError(n, "duplicate nutrient name");
  if (reference_solution) check_len(*reference_solution, d, "reference_solution");
}

ProblemInstance parse_instance(std::string_view text, const std::string& source) {
  using namespace textfmt;
  const auto doc = Document::parse(text, source);
  doc.reject_unknown_sections(
      {"ingredients", "nutrients", "noise", "reference_solution", "reference_profile"});

  ProblemInstance inst;

  const auto nut = as_table(doc.require("nutrients"), source);
  if (nut.header != std::vector<std::string>{"name", "lower", "upper"})
    throw SchemaError(source, nut.header_line, "[nutrients] columns must be: name, lower, upper");
  const auto a = static_cast<Eigen::Index>(nut.rows.size());
  inst.nutrient_lower.resize(a);
  inst.nutrient_upper.resize(a);
  for (Eigen::Index j = 0; j < a; ++j) {
    const auto& row = nut.rows[j];
    const int line = nut.row_lines[j];
    inst.nutrient_names.push_back(row[0]);
    inst.nutrient_lower[j] = parse_number(row[1], source, line, "lower");
    inst.nutrient_upper[j] = parse_number(row[2], source, line, "upper");
  }

  const auto ing = as_table(doc.require("ingredients"), source);
  const std::vector<std::string> fixed = {"name", "cost", "lysine", "energy", "max_proportion"};
  for (std::size_t c = 0; c < fixed.size(); ++c)
    if (c >= ing.header.size() || ing.header[c] != fixed[c])
      throw SchemaError(source, ing.header_line,
                        "[ingredients] must start with: name, cost, lysine, energy, max_proportion");
  // One column per nutrient, in any order; anything else is rejected.
  std::vector<Eigen::Index> column_nutrient(ing.header.size(), -1);
  for (std::size_t c = fixed.size(); c < ing.header.size(); ++c) {
    Eigen::Index found = -1;
    for (Eigen::Index j = 0; j < a; ++j)
      if (inst.nutrient_names[j] == ing.header[c]) found = j;
    if (found < 0)
      throw SchemaError(source, ing.header_line, "unknown column '" + ing.header[c] + "'");
    column_nutrient[c] = found;
  }
  for (Eigen::Index j = 0; j < a; ++j)
    if (!ing.column(inst.nutrient_names[j]))
      throw ValidationError(inst.nutrient_names[j], "nutrient has no column in [ingredients]");

  const auto d = static_cast<Eigen::Index>(ing.rows.size());
  inst.cost.resize(d);
  inst.lysine.resize(d);
  inst.energy.resize(d);
  inst.ingredient_upper.resize(d);
  inst.composition.resize(d, a);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& row = ing.rows[i];
    const int line = ing.row_lines[i];
    inst.ingredient_names.push_back(row[0]);
    inst.cost[i] = parse_number(row[1], source, line, "cost");
    inst.lysine[i] = parse_number(row[2], source, line, "lysine");
    inst.energy[i] = parse_number(row[3], source, line, "energy");
    inst.ingredient_upper[i] = parse_number(row[4], source, line, "max_proportion");
    for (std::size_t c = fixed.size(); c < row.size(); ++c)
      inst.composition(i, column_nutrient[c]) = parse_number(row[c], source, line, ing.header[c]);
  }

  if (const auto* noise = doc.find("noise")) {
    if (noise->lines.size() != 1)
      throw SchemaError(source, noise->line, "[noise] must hold one line of three numbers");
    const auto cells = split_csv(noise->lines[0].text);
    if (cells.size() != 3)
      throw SchemaError(source, noise->lines[0].number, "[noise] needs exactly three numbers");
    for (int j = 0; j < kObjectives; ++j)
      inst.noise_std[j] = parse_number(cells[j], source, noise->lines[0].number, kObjectiveNames[j]);
  }

  if (const auto* sec = doc.find("reference_solution")) {
    const auto tab = as_table(*sec, source);
    if (tab.header != std::vector<std::string>{"name", "proportion"})
      throw SchemaError(source, tab.header_line,
                        "[reference_solution] columns must be: name, proportion");
    Vector x = Vector::Zero(d);
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
      Eigen::Index found = -1;
      for (Eigen::Index i = 0; i < d; ++i)
        if (inst.ingredient_names[i] == tab.rows[r][0]) found = i;
      if (found < 0)
        throw SchemaError(source, tab.row_lines[r], "unknown ingredient '" + tab.rows[r][0] + "'");
      x[found] = parse_number(tab.rows[r][1], source, tab.row_lines[r], "proportion");
    }
    inst.reference_solution = std::move(x);
  }

  if (const auto* sec = doc.find("reference_profile")) {
    const auto tab = as_table(*sec, source);
    if (tab.header != std::vector<std::string>{"name", "value"})
      throw SchemaError(source, tab.header_line, "[reference_profile] columns must be: name, value");
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
      const auto& key = tab.rows[r][0];
      bool known = false;
      for (const char* o : kObjectiveNames) known = known || key == o;
      for (const auto& n : inst.nutrient_names) known = known || key == n;
      if (!known) throw SchemaError(source, tab.row_lines[r], "unknown profile entry '" + key + "'");
      inst.reference_profile[key] = parse_number(tab.rows[r][1], source, tab.row_lines[r], key);
    }
  }

  inst.validate();
  return inst;
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str(), path.string());
}

ObjectiveVector evaluate(const ProblemInstance& inst, const Vector& x) {
  require_dim(x, inst.dim(), "evaluate");
  return {{inst.cost.dot(x), inst.lysine.dot(x), inst.energy.dot(x)}};
}

ObjectiveVector evaluate(const ProblemInstance& inst, const Vector& x, Rng& rng) {
  auto out = evaluate(inst, x);
  std::normal_distribution<double> normal;
  // Draw all three even when some sigma is zero so the stream advances uniformly.
  for (int j = 0; j < kObjectives; ++j) out.y[j] += inst.noise_std[j] * normal(rng);
  return out;
}

std::size_t FeasibilityReport::count(ConstraintKind kind) const {
  std::size_t n = 0;
  for (const auto& v : violations) n += v.kind == kind;
  return n;
}

FeasibilityReport check_feasibility(const ProblemInstance& inst, const Vector& x, double tol) {
  require_dim(x, inst.dim(), "check_feasibility");
  FeasibilityReport rep;
  auto add = [&](ConstraintKind k, Eigen::Index idx, const std::string& name, double v) {
    rep.violations.push_back({k, idx, name, v});
    rep.feasible = false;
  };
  const double total = x.sum();
  if (!(std::abs(total - 1.0) <= tol)) add(ConstraintKind::Simplex, -1, "simplex", total - 1.0);
  const Vector g = nutrient_profile(inst, x);
  for (Eigen::Index j = 0; j < inst.n_nutrients(); ++j) {
    if (!(g[j] >= inst.nutrient_lower[j] - tol))
      add(ConstraintKind::NutrientLower, j, inst.nutrient_names[j], g[j] - inst.nutrient_lower[j]);
    if (!(g[j] <= inst.nutrient_upper[j] + tol))
      add(ConstraintKind::NutrientUpper, j, inst.nutrient_names[j], g[j] - inst.nutrient_upper[j]);
  }
  for (Eigen::Index i = 0; i < inst.dim(); ++i) {
    if (!(x[i] >= -tol)) add(ConstraintKind::IngredientLower, i, inst.ingredient_names[i], x[i]);
    if (!(x[i] <= inst.ingredient_upper[i] + tol))
      add(ConstraintKind::IngredientUpper, i, inst.ingredient_names[i],
          x[i] - inst.ingredient_upper[i]);
  }
  return rep;
}

Vector nutrient_profile(const ProblemInstance& inst, const Vector& x) {
  require_dim(x, inst.dim(), "nutrient_profile");
  return inst.composition.transpose() * x;
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::Simplex: return "simplex";
    case ConstraintKind::NutrientLower: return "nutrient_lower";
    case ConstraintKind::NutrientUpper: return "nutrient_upper";
    case ConstraintKind::IngredientLower: return "ingredient_lower";
    case ConstraintKind::IngredientUpper: return "ingredient_upper";
  }
  return "?";
}

}  // namespace dietbo
