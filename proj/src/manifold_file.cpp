#include "algsample/manifold_file.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace algsample {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// A piece of a line together with the 1-based column where it starts.
struct Span {
  std::string text;
  std::size_t column = 1;
};

Span trim(const std::string& s, std::size_t column) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return {s.substr(b, e - b), column + b};
}

class FileParser {
 public:
  explicit FileParser(const ManifoldOverrides& overrides) : overrides_(overrides) {}

  ManifoldFile parse(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      const Span content = trim(raw, 1);
      if (content.text.empty()) continue;
      handle(content);
    }
    return finish();
  }

 private:
  [[noreturn]] void fail(const std::string& message, std::size_t column) const {
    throw ParseError(message, line_, column);
  }

  void handle(const Span& content) {
    const std::string& s = content.text;
    if (s.rfind("def", 0) == 0 && s.size() > 3 && is_space(s[3])) return definition(trim(s.substr(3), content.column + 3));
    const auto colon = s.find(':');
    if (colon == std::string::npos) fail("expected 'key: value'", content.column);
    const std::string key = trim(s.substr(0, colon), 0).text;
    const Span value = trim(s.substr(colon + 1), content.column + colon + 1);
    if (key == "eq") return equation(value);
    if (!seen_.insert(key).second) fail("duplicate key '" + key + "'", content.column);
    if (key == "vars") return variables(value);
    if (key == "dim") return void(dimension_ = integer(value, "dim"));
    if (key == "degree") return void(degree_ = integer(value, "degree"));
    if (key == "projective") return projective(value);
    if (key == "box") return box(value);
    if (key == "shift") return shift(value);
    fail("unknown key '" + key + "'", content.column);
  }

  void require_vars(std::size_t column) const {
    if (vars_.empty()) fail("'vars' must come first", column);
  }

  void variables(const Span& value) {
    std::istringstream in(value.text);
    std::string name;
    std::size_t offset = 0;
    while (in >> name) {
      const std::size_t at = value.text.find(name, offset);
      offset = at + name.size();
      const bool valid = std::isalpha(static_cast<unsigned char>(name[0])) &&
                         std::all_of(name.begin(), name.end(), [](char c) {
                           return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
                         });
      if (!valid) fail("invalid variable name '" + name + "'", value.column + at);
      if (std::find(vars_.begin(), vars_.end(), name) != vars_.end())
        fail("duplicate variable '" + name + "'", value.column + at);
      vars_.push_back(name);
    }
    if (vars_.empty()) fail("no variables given", value.column);
  }

  std::size_t integer(const Span& value, const std::string& key) const {
    char* end = nullptr;
    const long v = std::strtol(value.text.c_str(), &end, 10);
    if (value.text.empty() || *end != '\0' || v < 1) fail("'" + key + "' must be a positive integer", value.column);
    return static_cast<std::size_t>(v);
  }

  void projective(const Span& value) {
    if (value.text == "true")
      projective_ = true;
    else if (value.text == "false")
      projective_ = false;
    else
      fail("'projective' must be true or false", value.column);
  }

  double number(const std::string& s, std::size_t column) const {
    const Span t = trim(s, column);
    char* end = nullptr;
    const double v = std::strtod(t.text.c_str(), &end);
    if (t.text.empty() || *end != '\0') fail("expected a number", t.column);
    return v;
  }

  void box(const Span& value) {
    require_vars(value.column);
    box_.assign(vars_.size(), Interval{-HUGE_VAL, HUGE_VAL});
    std::vector<bool> given(vars_.size(), false);
    std::size_t pos = 0;
    while (pos <= value.text.size()) {
      std::size_t end = value.text.find(';', pos);
      if (end == std::string::npos) end = value.text.size();
      const Span part = trim(value.text.substr(pos, end - pos), value.column + pos);
      pos = end + 1;
      if (part.text.empty()) continue;
      const auto in = part.text.find(" in ");
      if (in == std::string::npos) fail("expected 'name in [lower, upper]'", part.column);
      const std::string name = trim(part.text.substr(0, in), 0).text;
      const auto it = std::find(vars_.begin(), vars_.end(), name);
      if (it == vars_.end()) fail("unknown variable '" + name + "' in box", part.column);
      const auto index = static_cast<std::size_t>(it - vars_.begin());
      if (given[index]) fail("variable '" + name + "' bounded twice", part.column);
      given[index] = true;
      const Span range = trim(part.text.substr(in + 4), part.column + in + 4);
      const auto comma = range.text.find(',');
      if (range.text.size() < 2 || range.text.front() != '[' || range.text.back() != ']' ||
          comma == std::string::npos)
        fail("expected an interval '[lower, upper]'", range.column);
      const double lo = number(range.text.substr(1, comma - 1), range.column + 1);
      const double hi = number(range.text.substr(comma + 1, range.text.size() - comma - 2), range.column + comma + 1);
      if (!(lo <= hi)) fail("interval lower bound exceeds upper bound", range.column);
      box_[index] = {lo, hi};
    }
  }

  void shift(const Span& value) {
    require_vars(value.column);
    std::string text = value.text;
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::string token;
    std::vector<double> entries;
    std::size_t offset = 0;
    while (in >> token) {
      const std::size_t at = text.find(token, offset);
      offset = at + token.size();
      entries.push_back(number(token, value.column + at));
    }
    if (entries.size() != vars_.size())
      fail("shift needs " + std::to_string(vars_.size()) + " entries", value.column);
    shift_ = Eigen::Map<Eigen::VectorXd>(entries.data(), static_cast<Eigen::Index>(entries.size()));
  }

  // Rethrows expression errors at their position within the file.
  template <typename F>
  auto located(const Span& where, F&& body) const {
    try {
      return body();
    } catch (const ParseError& e) {
      const std::size_t column = e.line() == 1 ? where.column + e.column() - 1 : e.column();
      throw ParseError(e.detail(), line_ + e.line() - 1, column);
    }
  }

  void definition(const Span& value) {
    require_vars(value.column);
    const auto eq = value.text.find('=');
    if (eq == std::string::npos) fail("expected 'def name = expression'", value.column);
    const std::string name = trim(value.text.substr(0, eq), 0).text;
    const bool valid = !name.empty() && std::isalpha(static_cast<unsigned char>(name[0])) &&
                       std::all_of(name.begin(), name.end(), [](char c) {
                         return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
                       });
    if (!valid) fail("invalid definition name '" + name + "'", value.column);
    if (std::find(vars_.begin(), vars_.end(), name) != vars_.end() || definitions_.count(name))
      fail("'" + name + "' is already defined", value.column);
    const Span body = trim(value.text.substr(eq + 1), value.column + eq + 1);
    ScalarExpression expr = located(body, [&] { return parse_scalar_expression(body.text, vars_, definitions_); });
    definitions_.emplace(name, std::move(expr));
    order_.push_back(name);
  }

  void equation(const Span& value) {
    require_vars(value.column);
    if (value.text.empty()) fail("empty equation", value.column);
    polys_.push_back(located(value, [&] { return parse_polynomial(value.text, vars_, definitions_); }));
    equations_.push_back(value.text);
  }

  ManifoldFile finish() {
    ++line_;
    if (vars_.empty()) fail("missing 'vars'", 1);
    if (!dimension_) fail("missing 'dim'", 1);
    if (polys_.empty()) fail("no 'eq' lines", 1);
    if (overrides_.projective) projective_ = *overrides_.projective;
    if (overrides_.box) {
      const std::size_t saved = line_;
      line_ = 0;
      box(trim(*overrides_.box, 1));
      line_ = saved;
    }
    ManifoldFile out;
    out.spec.system = PolynomialSystem(std::move(polys_));
    out.spec.dimension = *dimension_;
    out.spec.projective = projective_;
    if (!box_.empty()) out.spec.region = Box(box_);
    out.spec.shift = shift_;
    const std::size_t N = vars_.size();
    const std::size_t codim = projective_ ? N - 1 : N;
    if (*dimension_ >= codim) fail("'dim' must be below " + std::to_string(codim), 1);
    out.spec.degree_bound = degree_ ? *degree_ : default_degree_bound(out.spec.system, *dimension_, projective_);
    try {
      out.spec.validate();
    } catch (const DimensionError& e) {
      fail(e.what(), 1);
    }
    out.definitions = std::move(definitions_);
    out.definition_order = std::move(order_);
    out.equations = std::move(equations_);
    return out;
  }

  const ManifoldOverrides& overrides_;
  std::size_t line_ = 0;
  std::set<std::string> seen_;
  std::vector<std::string> vars_;
  std::optional<std::size_t> dimension_;
  std::optional<std::size_t> degree_;
  bool projective_ = false;
  std::vector<Interval> box_;
  std::optional<Eigen::VectorXd> shift_;
  Definitions definitions_;
  std::vector<std::string> order_;
  std::vector<Polynomial> polys_;
  std::vector<std::string> equations_;
};

}  // namespace

ManifoldFile parse_manifold(const std::string& text, const ManifoldOverrides& overrides) {
  return FileParser(overrides).parse(text);
}

ManifoldFile load_manifold(const std::string& path, const ManifoldOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifold file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed to read manifold file '" + path + "'");
  return parse_manifold(buffer.str(), overrides);
}

}  // namespace algsample
