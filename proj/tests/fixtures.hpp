#pragma once

#include <filesystem>
#include <string>

#include "dietbo/problem.hpp"

namespace fixtures {

inline std::filesystem::path source_dir() { return DIETBO_SOURCE_DIR; }
inline std::filesystem::path reference_instance_path() { return source_dir() / "data" / "swine_reference.instance"; }
inline std::filesystem::path mfp_path() { return source_dir() / "data" / "mfp_reference.txt"; }

inline const dietbo::ProblemInstance& reference_instance() {
  static const dietbo::ProblemInstance inst = dietbo::load_instance(reference_instance_path());
  return inst;
}

// Two ingredients, one nutrient, s = (1, 1).
inline constexpr const char* kToyInstance = R"(
[ingredients]
name, cost, lysine, energy, max_proportion, protein
a, 10, 1, 5, 1, 2
b, 20, 3, 4, 1, 6

[nutrients]
name, lower, upper
protein, 0, 10
)";

/// d-ingredient instance whose single nutrient never binds, so the
/// feasible set is the simplex intersected with x <= s.
inline dietbo::ProblemInstance simplex_instance(int d, double s = 1.0) {
  dietbo::ProblemInstance inst;
  for (int i = 0; i < d; ++i) inst.ingredient_names.push_back("x" + std::to_string(i));
  inst.cost = dietbo::Vector::LinSpaced(d, 1.0, double(d));
  inst.lysine = dietbo::Vector::LinSpaced(d, double(d), 1.0);
  inst.energy = dietbo::Vector::Ones(d);
  inst.nutrient_names = {"mass"};
  inst.composition = dietbo::Matrix::Ones(d, 1);
  inst.nutrient_lower = dietbo::Vector::Constant(1, -1.0);
  inst.nutrient_upper = dietbo::Vector::Constant(1, 2.0);
  inst.ingredient_upper = dietbo::Vector::Constant(d, s);
  return inst;
}

}  // namespace fixtures
