#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "algsample/polynomial.hpp"

namespace algsample {

namespace detail {
struct ExpressionNode;
}

// Immutable expression tree over variables, real constants, + - * /,
// integer powers, comparisons (yielding 0 or 1) and the functions
// exp, log, sqrt, acos, cos, sin, abs.
class ScalarExpression {
 public:
  ScalarExpression();  // constant zero

  static ScalarExpression constant(double value);

  // Evaluates at a point with one coordinate per variable. Throws
  // DomainError instead of ever returning NaN or infinity.
  double evaluate(std::span<const double> point) const;
  double operator()(std::span<const double> point) const { return evaluate(point); }

  std::size_t num_variables() const noexcept { return num_variables_; }
  bool is_constant() const noexcept;

  // Converts to a polynomial over the given variables; throws ParseError
  // pointing at the first non-polynomial construct.
  Polynomial to_polynomial(const std::vector<std::string>& variables) const;

  const std::shared_ptr<const detail::ExpressionNode>& root() const noexcept { return root_; }

 private:
  friend class ExpressionParser;
  ScalarExpression(std::shared_ptr<const detail::ExpressionNode> root, std::size_t num_variables);

  std::shared_ptr<const detail::ExpressionNode> root_;
  std::size_t num_variables_ = 0;
};

// Named subexpressions that later text may reference by name.
using Definitions = std::map<std::string, ScalarExpression>;

Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& variables,
                            const Definitions& definitions = {});

ScalarExpression parse_scalar_expression(const std::string& text, const std::vector<std::string>& variables,
                                         const Definitions& definitions = {});

}  // namespace algsample
