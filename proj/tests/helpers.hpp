#pragma once

#include <string>
#include <vector>

#include "algsample/manifold_file.hpp"

namespace testing_support {

inline std::string data_path(const std::string& name) { return std::string(ALGSAMPLE_DATA_DIR) + "/" + name; }

inline algsample::ManifoldFile load(const std::string& name) { return algsample::load_manifold(data_path(name)); }

inline algsample::ManifoldSpec manifold(const std::vector<std::string>& vars, const std::vector<std::string>& eqs,
                                        std::size_t dimension, std::size_t degree, bool projective = false) {
  std::vector<algsample::Polynomial> polys;
  for (const auto& e : eqs) polys.push_back(algsample::parse_polynomial(e, vars));
  algsample::ManifoldSpec m;
  m.system = algsample::PolynomialSystem(std::move(polys));
  m.dimension = dimension;
  m.degree_bound = degree;
  m.projective = projective;
  return m;
}

}  // namespace testing_support
