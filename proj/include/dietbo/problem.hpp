#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dietbo/random.hpp"
#include "dietbo/types.hpp"

namespace dietbo {

/// Linear tri-objective feed formulation:
///   min c'x, max l'x, max e'x  s.t.  1'x = 1, lower <= A'x <= upper, 0 <= x <= s.
struct ProblemInstance {
  std::vector<std::string> ingredient_names;
  Vector cost;
  Vector lysine;
  Vector energy;
  std::vector<std::string> nutrient_names;
  Matrix composition;  // d x a
  Vector nutrient_lower;
  Vector nutrient_upper;
  Vector ingredient_upper;
  Point3 noise_std{0.0, 0.0, 0.0};

  // Optional published reference diet and its reported profile (objectives
  // first, keyed by name).
  std::optional<Vector> reference_solution;
  std::map<std::string, double> reference_profile;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(ingredient_names.size()); }
  Eigen::Index n_nutrients() const { return static_cast<Eigen::Index>(nutrient_names.size()); }

  /// Throws ValidationError naming the first broken invariant.
  void validate() const;
};

/// Raw objective values (cost, lysine, energy).
struct ObjectiveVector {
  Point3 y{0.0, 0.0, 0.0};

  /// All-maximize form: (-cost, lysine, energy).
  Point3 standardized() const { return {-y[0], y[1], y[2]}; }
  static ObjectiveVector from_standardized(const Point3& s) { return {{-s[0], s[1], s[2]}}; }
  bool operator==(const ObjectiveVector&) const = default;
};

inline constexpr const char* kObjectiveNames[kObjectives] = {"cost", "lysine", "energy"};

/// Objective senses in raw units: +1 maximized, -1 minimized.
inline constexpr int kObjectiveSense[kObjectives] = {-1, +1, +1};

inline constexpr double kFeasibilityTol = 1e-9;

ProblemInstance parse_instance(std::string_view text, const std::string& source = "<string>");
ProblemInstance load_instance(const std::filesystem::path& path);

/// Noise-free objective values.
ObjectiveVector evaluate(const ProblemInstance& inst, const Vector& x);
/// Adds N(0, noise_std^2) to each objective using `rng`.
ObjectiveVector evaluate(const ProblemInstance& inst, const Vector& x, Rng& rng);

enum class ConstraintKind { Simplex, NutrientLower, NutrientUpper, IngredientLower, IngredientUpper };

struct Violation {
  ConstraintKind kind;
  Eigen::Index index = -1;  // nutrient or ingredient index; -1 for the simplex
  std::string name;
  double signed_violation = 0.0;  // observed minus bound
  double magnitude() const { return signed_violation < 0 ? -signed_violation : signed_violation; }
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
  std::size_t count(ConstraintKind kind) const;
};

FeasibilityReport check_feasibility(const ProblemInstance& inst, const Vector& x,
                                    double tol = kFeasibilityTol);

/// A'x.
Vector nutrient_profile(const ProblemInstance& inst, const Vector& x);

const char* to_string(ConstraintKind kind);

}  // namespace dietbo
