#include "algsample/polynomial.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace algsample {

unsigned ExponentVector::total_degree() const noexcept {
  return std::accumulate(entries_.begin(), entries_.end(), 0u);
}

ExponentVector operator+(const ExponentVector& a, const ExponentVector& b) {
  ExponentVector sum(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
  return sum;
}

Polynomial::Polynomial(std::vector<std::string> variables) : variables_(std::move(variables)) {}

Polynomial::Polynomial(std::vector<std::string> variables, TermMap terms) : variables_(std::move(variables)) {
  for (const auto& [exponents, coefficient] : terms) {
    if (exponents.size() != variables_.size())
      throw DimensionError("exponent vector length does not match variable count");
    add_term(exponents, coefficient);
  }
}

Polynomial Polynomial::constant(std::vector<std::string> variables, double value) {
  Polynomial p(std::move(variables));
  p.add_term(ExponentVector(p.num_variables()), value);
  return p;
}

Polynomial Polynomial::variable(std::vector<std::string> variables, std::size_t index) {
  Polynomial p(std::move(variables));
  if (index >= p.num_variables()) throw DimensionError("variable index out of range");
  ExponentVector e(p.num_variables());
  e[index] = 1;
  p.add_term(e, 1.0);
  return p;
}

bool Polynomial::is_constant() const noexcept {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.total_degree() == 0);
}

double Polynomial::constant_value() const noexcept {
  auto it = terms_.find(ExponentVector(num_variables()));
  return it == terms_.end() ? 0.0 : it->second;
}

unsigned Polynomial::total_degree() const noexcept {
  unsigned degree = 0;
  for (const auto& [e, c] : terms_) degree = std::max(degree, e.total_degree());
  return degree;
}

bool Polynomial::is_homogeneous() const noexcept {
  if (terms_.empty()) return true;
  const unsigned degree = terms_.begin()->first.total_degree();
  return std::all_of(terms_.begin(), terms_.end(),
                     [degree](const auto& term) { return term.first.total_degree() == degree; });
}

std::size_t Polynomial::variable_index(const std::string& name) const {
  auto it = std::find(variables_.begin(), variables_.end(), name);
  if (it == variables_.end()) throw DimensionError("unknown variable '" + name + "'");
  return static_cast<std::size_t>(it - variables_.begin());
}

void Polynomial::add_term(const ExponentVector& exponents, double coefficient) {
  if (coefficient == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(exponents, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Polynomial::require_same_variables(const Polynomial& other) const {
  if (variables_ != other.variables_) throw DimensionError("polynomials use different variable lists");
}

template <typename Scalar>
Scalar Polynomial::evaluate(std::span<const Scalar> point) const {
  const std::size_t n = num_variables();
  if (point.size() != n)
    throw DimensionError("point has " + std::to_string(point.size()) + " coordinates, expected " +
                         std::to_string(n));
  std::vector<unsigned> max_exponent(n, 0);
  for (const auto& [e, c] : terms_)
    for (std::size_t j = 0; j < n; ++j) max_exponent[j] = std::max(max_exponent[j], e[j]);
  std::vector<std::vector<Scalar>> powers(n);
  for (std::size_t j = 0; j < n; ++j) {
    powers[j].resize(max_exponent[j] + 1);
    powers[j][0] = Scalar(1);
    for (unsigned k = 1; k <= max_exponent[j]; ++k) powers[j][k] = powers[j][k - 1] * point[j];
  }
  Scalar value(0);
  for (const auto& [e, c] : terms_) {
    Scalar monomial(1);
    for (std::size_t j = 0; j < n; ++j)
      if (e[j]) monomial *= powers[j][e[j]];
    value += monomial * c;
  }
  return value;
}

template double Polynomial::evaluate<double>(std::span<const double>) const;
template std::complex<double> Polynomial::evaluate<std::complex<double>>(
    std::span<const std::complex<double>>) const;

template <typename Scalar>
double Polynomial::magnitude(std::span<const Scalar> point) const {
  if (point.size() != num_variables()) throw DimensionError("point has wrong dimension");
  std::vector<double> a(point.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::abs(point[j]);
  double total = 0.0;
  for (const auto& [e, c] : terms_) {
    double m = std::fabs(c);
    for (std::size_t j = 0; j < a.size(); ++j)
      for (unsigned k = 0; k < e[j]; ++k) m *= a[j];
    total += m;
  }
  return total;
}

template double Polynomial::magnitude<double>(std::span<const double>) const;
template double Polynomial::magnitude<std::complex<double>>(std::span<const std::complex<double>>) const;

Polynomial Polynomial::derivative(std::size_t variable) const {
  if (variable >= num_variables()) throw DimensionError("variable index out of range");
  Polynomial d(variables_);
  for (const auto& [e, c] : terms_) {
    if (e[variable] == 0) continue;
    ExponentVector lowered = e;
    lowered[variable] -= 1;
    d.add_term(lowered, c * static_cast<double>(e[variable]));
  }
  return d;
}

Polynomial Polynomial::derivative(const std::string& variable) const {
  return derivative(variable_index(variable));
}

Polynomial Polynomial::substitute_affine(const Eigen::VectorXd& offset, const Eigen::MatrixXd& basis,
                                         std::vector<std::string> new_variables) const {
  const std::size_t n = num_variables();
  const std::size_t m = new_variables.size();
  if (static_cast<std::size_t>(offset.size()) != n || static_cast<std::size_t>(basis.rows()) != n ||
      static_cast<std::size_t>(basis.cols()) != m)
    throw DimensionError("affine substitution has inconsistent shape");

  std::vector<unsigned> max_exponent(n, 0);
  for (const auto& [e, c] : terms_)
    for (std::size_t j = 0; j < n; ++j) max_exponent[j] = std::max(max_exponent[j], e[j]);

  // powers[j][k] = (offset_j + sum_l basis(j,l) t_l)^k
  std::vector<std::vector<Polynomial>> powers(n);
  for (std::size_t j = 0; j < n; ++j) {
    Polynomial form = constant(new_variables, offset(j));
    for (std::size_t l = 0; l < m; ++l) {
      if (basis(j, l) == 0.0) continue;
      ExponentVector e(m);
      e[l] = 1;
      form.add_term(e, basis(j, l));
    }
    powers[j].push_back(constant(new_variables, 1.0));
    for (unsigned k = 1; k <= max_exponent[j]; ++k) powers[j].push_back(powers[j].back() * form);
  }

  Polynomial result(new_variables);
  for (const auto& [e, c] : terms_) {
    Polynomial product = constant(new_variables, c);
    for (std::size_t j = 0; j < n; ++j)
      if (e[j]) product = product * powers[j][e[j]];
    result += product;
  }
  return result;
}

std::vector<double> Polynomial::univariate_coefficients() const {
  if (num_variables() != 1) throw DimensionError("polynomial is not univariate");
  std::vector<double> coefficients(total_degree() + 1, 0.0);
  for (const auto& [e, c] : terms_) coefficients[e[0]] = c;
  return coefficients;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  require_same_variables(other);
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  require_same_variables(other);
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double scalar) {
  if (scalar == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= scalar;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.require_same_variables(b);
  Polynomial product(a.variables_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) product.add_term(ea + eb, ca * cb);
  return product;
}

Polynomial Polynomial::operator-() const {
  Polynomial negated = *this;
  for (auto& [e, c] : negated.terms_) c = -c;
  return negated;
}

Polynomial Polynomial::pow(unsigned exponent) const {
  Polynomial result = constant(variables_, 1.0);
  Polynomial base = *this;
  while (exponent) {
    if (exponent & 1u) result = result * base;
    exponent >>= 1u;
    if (exponent) base = base * base;
  }
  return result;
}

namespace {

std::string format_number(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

}  // namespace

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  // Highest degree first reads naturally.
  std::vector<std::pair<ExponentVector, double>> ordered(terms_.begin(), terms_.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return a.first.total_degree() > b.first.total_degree();
  });
  for (const auto& [e, c] : ordered) {
    const bool negative = std::signbit(c);
    const double magnitude = std::fabs(c);
    if (first)
      out += negative ? "-" : "";
    else
      out += negative ? " - " : " + ";
    first = false;

    std::string monomial;
    for (std::size_t j = 0; j < num_variables(); ++j) {
      if (!e[j]) continue;
      if (!monomial.empty()) monomial += '*';
      monomial += variables_[j];
      if (e[j] > 1) monomial += '^' + std::to_string(e[j]);
    }
    if (monomial.empty())
      out += format_number(magnitude);
    else if (magnitude == 1.0)
      out += monomial;
    else
      out += format_number(magnitude) + '*' + monomial;
  }
  return out;
}

PolynomialSystem::PolynomialSystem(std::vector<Polynomial> polynomials) : polynomials_(std::move(polynomials)) {
  if (!polynomials_.empty()) variables_ = polynomials_.front().variables();
  for (const auto& p : polynomials_)
    if (p.variables() != variables_) throw DimensionError("system polynomials must share one variable ordering");
  jacobian_.reserve(polynomials_.size());
  for (const auto& p : polynomials_) {
    std::vector<Polynomial> row;
    row.reserve(variables_.size());
    for (std::size_t j = 0; j < variables_.size(); ++j) row.push_back(p.derivative(j));
    jacobian_.push_back(std::move(row));
  }
}

std::vector<unsigned> PolynomialSystem::degrees() const {
  std::vector<unsigned> d;
  d.reserve(polynomials_.size());
  for (const auto& p : polynomials_) d.push_back(p.total_degree());
  return d;
}

template <typename Scalar>
std::vector<Scalar> PolynomialSystem::evaluate(std::span<const Scalar> point) const {
  std::vector<Scalar> values;
  values.reserve(polynomials_.size());
  for (const auto& p : polynomials_) values.push_back(p.evaluate<Scalar>(point));
  return values;
}

template std::vector<double> PolynomialSystem::evaluate<double>(std::span<const double>) const;
template std::vector<std::complex<double>> PolynomialSystem::evaluate<std::complex<double>>(
    std::span<const std::complex<double>>) const;

double PolynomialSystem::residual(std::span<const double> point) const {
  double r = 0.0;
  for (const auto& p : polynomials_) r = std::max(r, std::fabs(p.evaluate<double>(point)));
  return r;
}

double PolynomialSystem::residual(std::span<const std::complex<double>> point) const {
  double r = 0.0;
  for (const auto& p : polynomials_) r = std::max(r, std::abs(p.evaluate<std::complex<double>>(point)));
  return r;
}

template <typename Scalar>
double PolynomialSystem::residual_scale(std::span<const Scalar> point) const {
  double scale = 1.0;
  for (const auto& p : polynomials_) scale = std::max(scale, p.magnitude<Scalar>(point));
  return scale;
}

template double PolynomialSystem::residual_scale<double>(std::span<const double>) const;
template double PolynomialSystem::residual_scale<std::complex<double>>(std::span<const std::complex<double>>) const;

Eigen::MatrixXd PolynomialSystem::jacobian(std::span<const double> point) const {
  if (point.size() != num_variables()) throw DimensionError("jacobian point has wrong dimension");
  Eigen::MatrixXd J(num_equations(), num_variables());
  for (std::size_t i = 0; i < num_equations(); ++i)
    for (std::size_t j = 0; j < num_variables(); ++j) J(i, j) = jacobian_[i][j].evaluate<double>(point);
  return J;
}

Eigen::MatrixXcd PolynomialSystem::jacobian(std::span<const std::complex<double>> point) const {
  if (point.size() != num_variables()) throw DimensionError("jacobian point has wrong dimension");
  Eigen::MatrixXcd J(num_equations(), num_variables());
  for (std::size_t i = 0; i < num_equations(); ++i)
    for (std::size_t j = 0; j < num_variables(); ++j)
      J(i, j) = jacobian_[i][j].evaluate<std::complex<double>>(point);
  return J;
}

PolynomialSystem PolynomialSystem::substitute_affine(const Eigen::VectorXd& offset, const Eigen::MatrixXd& basis,
                                                     std::vector<std::string> new_variables) const {
  std::vector<Polynomial> substituted;
  substituted.reserve(polynomials_.size());
  for (const auto& p : polynomials_) substituted.push_back(p.substitute_affine(offset, basis, new_variables));
  return PolynomialSystem(std::move(substituted));
}

std::uint64_t bezout_number(const PolynomialSystem& system) {
  std::uint64_t product = 1;
  for (unsigned d : system.degrees()) product *= d;
  return product;
}

}  // namespace algsample
