#include "algsample/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>

namespace algsample {

namespace detail {

enum class NodeKind {
  constant,
  variable,
  negate,
  add,
  subtract,
  multiply,
  divide,
  power,
  less,
  greater,
  less_equal,
  greater_equal,
  function,
};

enum class FunctionKind { exp, log, sqrt, acos, cos, sin, abs };

struct ExpressionNode {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;
  std::size_t variable = 0;
  int exponent = 0;
  FunctionKind function = FunctionKind::exp;
  std::shared_ptr<const ExpressionNode> lhs;
  std::shared_ptr<const ExpressionNode> rhs;
  std::size_t line = 1;
  std::size_t column = 1;
};

}  // namespace detail

using detail::ExpressionNode;
using detail::FunctionKind;
using detail::NodeKind;
using NodePtr = std::shared_ptr<const ExpressionNode>;

namespace {

const char* function_name(FunctionKind f) {
  switch (f) {
    case FunctionKind::exp: return "exp";
    case FunctionKind::log: return "log";
    case FunctionKind::sqrt: return "sqrt";
    case FunctionKind::acos: return "acos";
    case FunctionKind::cos: return "cos";
    case FunctionKind::sin: return "sin";
    case FunctionKind::abs: return "abs";
  }
  return "?";
}

std::optional<FunctionKind> lookup_function(const std::string& name) {
  static const std::map<std::string, FunctionKind> table = {
      {"exp", FunctionKind::exp},   {"log", FunctionKind::log}, {"sqrt", FunctionKind::sqrt},
      {"acos", FunctionKind::acos}, {"cos", FunctionKind::cos}, {"sin", FunctionKind::sin},
      {"abs", FunctionKind::abs},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

double integer_power(double base, int exponent) {
  const bool invert = exponent < 0;
  unsigned e = static_cast<unsigned>(invert ? -exponent : exponent);
  double result = 1.0;
  while (e) {
    if (e & 1u) result *= base;
    e >>= 1u;
    if (e) base *= base;
  }
  return invert ? 1.0 / result : result;
}

double eval_node(const ExpressionNode& node, std::span<const double> x) {
  auto fail = [&](const std::string& what) -> double {
    throw DomainError(what, std::vector<double>(x.begin(), x.end()));
  };
  double result = 0.0;
  switch (node.kind) {
    case NodeKind::constant: return node.value;
    case NodeKind::variable: return x[node.variable];
    case NodeKind::negate: return -eval_node(*node.lhs, x);
    case NodeKind::add: result = eval_node(*node.lhs, x) + eval_node(*node.rhs, x); break;
    case NodeKind::subtract: result = eval_node(*node.lhs, x) - eval_node(*node.rhs, x); break;
    case NodeKind::multiply: result = eval_node(*node.lhs, x) * eval_node(*node.rhs, x); break;
    case NodeKind::divide: {
      const double num = eval_node(*node.lhs, x);
      const double den = eval_node(*node.rhs, x);
      if (den == 0.0) fail("division by zero");
      result = num / den;
      break;
    }
    case NodeKind::power: {
      const double base = eval_node(*node.lhs, x);
      if (base == 0.0 && node.exponent < 0) fail("division by zero in negative power");
      result = integer_power(base, node.exponent);
      break;
    }
    case NodeKind::less: return eval_node(*node.lhs, x) < eval_node(*node.rhs, x) ? 1.0 : 0.0;
    case NodeKind::greater: return eval_node(*node.lhs, x) > eval_node(*node.rhs, x) ? 1.0 : 0.0;
    case NodeKind::less_equal: return eval_node(*node.lhs, x) <= eval_node(*node.rhs, x) ? 1.0 : 0.0;
    case NodeKind::greater_equal: return eval_node(*node.lhs, x) >= eval_node(*node.rhs, x) ? 1.0 : 0.0;
    case NodeKind::function: {
      const double a = eval_node(*node.lhs, x);
      switch (node.function) {
        case FunctionKind::exp: result = std::exp(a); break;
        case FunctionKind::log:
          if (!(a > 0.0)) fail("log of non-positive value");
          result = std::log(a);
          break;
        case FunctionKind::sqrt:
          if (a < 0.0) fail("sqrt of negative value");
          result = std::sqrt(a);
          break;
        case FunctionKind::acos:
          if (a < -1.0 || a > 1.0) fail("acos argument outside [-1, 1]");
          result = std::acos(a);
          break;
        case FunctionKind::cos: result = std::cos(a); break;
        case FunctionKind::sin: result = std::sin(a); break;
        case FunctionKind::abs: result = std::fabs(a); break;
      }
      break;
    }
  }
  if (!std::isfinite(result)) fail("non-finite value");
  return result;
}

Polynomial to_poly(const ExpressionNode& node, const std::vector<std::string>& vars) {
  auto reject = [&](const std::string& what) -> Polynomial { throw ParseError(what, node.line, node.column); };
  switch (node.kind) {
    case NodeKind::constant: return Polynomial::constant(vars, node.value);
    case NodeKind::variable: return Polynomial::variable(vars, node.variable);
    case NodeKind::negate: return -to_poly(*node.lhs, vars);
    case NodeKind::add: return to_poly(*node.lhs, vars) + to_poly(*node.rhs, vars);
    case NodeKind::subtract: return to_poly(*node.lhs, vars) - to_poly(*node.rhs, vars);
    case NodeKind::multiply: return to_poly(*node.lhs, vars) * to_poly(*node.rhs, vars);
    case NodeKind::divide: {
      Polynomial den = to_poly(*node.rhs, vars);
      if (!den.is_constant()) return reject("division by a non-constant is not polynomial");
      if (den.is_zero()) return reject("division by zero");
      return to_poly(*node.lhs, vars) * (1.0 / den.constant_value());
    }
    case NodeKind::power:
      if (node.exponent < 0) return reject("negative exponent is not allowed in a polynomial");
      return to_poly(*node.lhs, vars).pow(static_cast<unsigned>(node.exponent));
    case NodeKind::function:
      return reject(std::string("function '") + function_name(node.function) + "' is not allowed in a polynomial");
    default: return reject("comparison is not allowed in a polynomial");
  }
}

enum class TokenKind { number, identifier, op, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;
  double number = 0.0;
  bool integral = false;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> tokenize() {
    std::vector<Token> tokens;
    for (;;) {
      skip_space();
      Token tok;
      tok.line = line_;
      tok.column = column_;
      if (pos_ >= text_.size()) {
        tokens.push_back(tok);
        return tokens;
      }
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < text_.size() &&
                                                          std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        lex_number(tok);
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        tok.kind = TokenKind::identifier;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
          tok.text += advance();
      } else if ((c == '<' || c == '>') && pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
        tok.kind = TokenKind::op;
        tok.text += advance();
        tok.text += advance();
      } else if (std::string_view("+-*/^()<>").find(c) != std::string_view::npos) {
        tok.kind = TokenKind::op;
        tok.text += advance();
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line_, column_);
      }
      tokens.push_back(std::move(tok));
    }
  }

 private:
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  bool digit_at(std::size_t i) const {
    return i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]));
  }

  void lex_number(Token& tok) {
    tok.kind = TokenKind::number;
    bool integral = true;
    while (digit_at(pos_)) tok.text += advance();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      integral = false;
      tok.text += advance();
      while (digit_at(pos_)) tok.text += advance();
    }
    // An exponent marker must be followed by digits, otherwise "2ex" would
    // swallow the identifier.
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (digit_at(look)) {
        integral = false;
        while (pos_ < look) tok.text += advance();
        while (digit_at(pos_)) tok.text += advance();
      }
    }
    tok.number = std::strtod(tok.text.c_str(), nullptr);
    tok.integral = integral;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, const std::vector<std::string>& variables,
                   const Definitions& definitions)
      : tokens_(Lexer(text).tokenize()), variables_(variables), definitions_(definitions) {
    for (std::size_t i = 0; i < variables_.size(); ++i)
      for (std::size_t j = i + 1; j < variables_.size(); ++j)
        if (variables_[i] == variables_[j]) throw ParseError("duplicate variable '" + variables_[i] + "'", 1, 1);
  }

  ScalarExpression parse() {
    NodePtr root = comparison();
    if (peek().kind != TokenKind::end) syntax_error(peek(), "unexpected '" + peek().text + "'");
    return ScalarExpression(std::move(root), variables_.size());
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool at_op(const char* op) const { return peek().kind == TokenKind::op && peek().text == op; }

  [[noreturn]] static void syntax_error(const Token& tok, const std::string& message) {
    throw ParseError(message, tok.line, tok.column);
  }

  static NodePtr make(NodeKind kind, const Token& at, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto node = std::make_shared<ExpressionNode>();
    node->kind = kind;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    node->line = at.line;
    node->column = at.column;
    return node;
  }

  NodePtr comparison() {
    NodePtr lhs = sum();
    static const std::pair<const char*, NodeKind> ops[] = {
        {"<=", NodeKind::less_equal}, {">=", NodeKind::greater_equal}, {"<", NodeKind::less}, {">", NodeKind::greater}};
    for (const auto& [text, kind] : ops) {
      if (at_op(text)) {
        const Token& tok = next();
        return make(kind, tok, lhs, sum());
      }
    }
    return lhs;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    while (at_op("+") || at_op("-")) {
      const Token& tok = next();
      lhs = make(tok.text == "+" ? NodeKind::add : NodeKind::subtract, tok, lhs, product());
    }
    return lhs;
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (at_op("*") || at_op("/")) {
        const Token& tok = next();
        lhs = make(tok.text == "*" ? NodeKind::multiply : NodeKind::divide, tok, lhs, unary());
      } else if (peek().kind == TokenKind::identifier || peek().kind == TokenKind::number || at_op("(")) {
        syntax_error(peek(), "implicit multiplication is not allowed, use '*'");
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (at_op("-")) {
      const Token& tok = next();
      return make(NodeKind::negate, tok, unary());
    }
    if (at_op("+")) {
      next();
      return unary();
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!at_op("^")) return base;
    const Token& caret = next();
    auto node = std::make_shared<ExpressionNode>();
    node->kind = NodeKind::power;
    node->lhs = base;
    node->line = caret.line;
    node->column = caret.column;
    node->exponent = exponent();
    if (at_op("^")) syntax_error(peek(), "chained '^' is ambiguous, use parentheses");
    return node;
  }

  int exponent() {
    const bool parenthesized = at_op("(");
    if (parenthesized) next();
    bool negative = false;
    if (at_op("-") || at_op("+")) negative = next().text == "-";
    const Token& tok = peek();
    if (tok.kind != TokenKind::number) syntax_error(tok, "exponent must be an integer literal");
    next();
    if (!tok.integral || tok.number > 1e6) syntax_error(tok, "exponent must be an integer literal");
    if (parenthesized) {
      if (!at_op(")")) syntax_error(peek(), "expected ')'");
      next();
    }
    const int value = static_cast<int>(tok.number);
    return negative ? -value : value;
  }

  NodePtr primary() {
    const Token& tok = peek();
    if (tok.kind == TokenKind::number) {
      next();
      auto node = std::make_shared<ExpressionNode>();
      node->kind = NodeKind::constant;
      node->value = tok.number;
      node->line = tok.line;
      node->column = tok.column;
      // A numeric coefficient may prefix an identifier: 3x^2 reads as 3*(x^2).
      if (peek().kind == TokenKind::identifier) {
        const Token& ident = peek();
        return make(NodeKind::multiply, ident, node, power());
      }
      return node;
    }
    if (tok.kind == TokenKind::identifier) {
      next();
      if (at_op("(")) return call(tok);
      return identifier(tok);
    }
    if (at_op("(")) {
      next();
      NodePtr inner = comparison();
      if (!at_op(")")) syntax_error(peek(), "expected ')'");
      next();
      return inner;
    }
    if (tok.kind == TokenKind::end) syntax_error(tok, "unexpected end of input");
    syntax_error(tok, "unexpected '" + tok.text + "'");
  }

  NodePtr call(const Token& name) {
    auto f = lookup_function(name.text);
    if (!f) syntax_error(name, "unknown function '" + name.text + "'");
    next();  // '('
    NodePtr arg = comparison();
    if (!at_op(")")) syntax_error(peek(), "expected ')'");
    next();
    auto node = std::make_shared<ExpressionNode>();
    node->kind = NodeKind::function;
    node->function = *f;
    node->lhs = std::move(arg);
    node->line = name.line;
    node->column = name.column;
    return node;
  }

  NodePtr identifier(const Token& tok) {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i] == tok.text) {
        auto node = std::make_shared<ExpressionNode>();
        node->kind = NodeKind::variable;
        node->variable = i;
        node->line = tok.line;
        node->column = tok.column;
        return node;
      }
    }
    if (auto it = definitions_.find(tok.text); it != definitions_.end()) {
      if (it->second.num_variables() != variables_.size())
        syntax_error(tok, "definition '" + tok.text + "' uses a different variable list");
      return it->second.root();
    }
    if (tok.text == "pi") {
      auto node = std::make_shared<ExpressionNode>();
      node->kind = NodeKind::constant;
      node->value = std::numbers::pi;
      node->line = tok.line;
      node->column = tok.column;
      return node;
    }
    syntax_error(tok, "unknown identifier '" + tok.text + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::vector<std::string>& variables_;
  const Definitions& definitions_;
};

ScalarExpression::ScalarExpression() : ScalarExpression(constant(0.0)) {}

ScalarExpression::ScalarExpression(std::shared_ptr<const detail::ExpressionNode> root, std::size_t num_variables)
    : root_(std::move(root)), num_variables_(num_variables) {}

ScalarExpression ScalarExpression::constant(double value) {
  auto node = std::make_shared<ExpressionNode>();
  node->kind = NodeKind::constant;
  node->value = value;
  return ScalarExpression(std::move(node), 0);
}

double ScalarExpression::evaluate(std::span<const double> point) const {
  if (num_variables_ != 0 && point.size() != num_variables_)
    throw DimensionError("expression expects " + std::to_string(num_variables_) + " coordinates, got " +
                         std::to_string(point.size()));
  return eval_node(*root_, point);
}

bool ScalarExpression::is_constant() const noexcept { return root_->kind == NodeKind::constant; }

Polynomial ScalarExpression::to_polynomial(const std::vector<std::string>& variables) const {
  if (num_variables_ != 0 && variables.size() != num_variables_)
    throw DimensionError("variable list does not match the expression");
  return to_poly(*root_, variables);
}

Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& variables,
                            const Definitions& definitions) {
  if (variables.empty()) throw ParseError("polynomial needs at least one variable", 1, 1);
  return parse_scalar_expression(text, variables, definitions).to_polynomial(variables);
}

ScalarExpression parse_scalar_expression(const std::string& text, const std::vector<std::string>& variables,
                                         const Definitions& definitions) {
  return ExpressionParser(text, variables, definitions).parse();
}

}  // namespace algsample
