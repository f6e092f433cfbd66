#pragma once

#include <optional>
#include <string>
#include <vector>

#include "algsample/expression.hpp"
#include "algsample/slicing.hpp"

namespace algsample {

// Line-oriented manifold description:
//
//   # comment
//   vars: x y
//   dim: 1
//   degree: 4                       (optional, Bezout fallback)
//   box: x in [-1.5, 1.5]; y in [-1.5, 1.5]
//   projective: false
//   shift: 0 0
//   def r2 = x^2 + y^2
//   eq: r2 - 1
//
// Definitions may be used by later equations and by integrands.
struct ManifoldFile {
  ManifoldSpec spec;
  Definitions definitions;
  // Definition names in file order.
  std::vector<std::string> definition_order;
  std::vector<std::string> equations;

  const std::vector<std::string>& variables() const noexcept { return spec.system.variables(); }
};

// Command-line replacements for file keys. A box given here uses the file's
// box syntax; its ParseErrors carry line 0.
struct ManifoldOverrides {
  std::optional<bool> projective;
  std::optional<std::string> box;
};

ManifoldFile parse_manifold(const std::string& text, const ManifoldOverrides& overrides = {});
ManifoldFile load_manifold(const std::string& path, const ManifoldOverrides& overrides = {});

}  // namespace algsample
