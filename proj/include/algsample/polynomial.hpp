#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "algsample/error.hpp"

namespace algsample {

// Exponents of a monomial, one entry per variable.
class ExponentVector {
 public:
  ExponentVector() = default;
  explicit ExponentVector(std::size_t num_variables) : entries_(num_variables, 0) {}
  explicit ExponentVector(std::vector<unsigned> entries) : entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }
  unsigned operator[](std::size_t i) const { return entries_[i]; }
  unsigned& operator[](std::size_t i) { return entries_[i]; }
  const std::vector<unsigned>& entries() const noexcept { return entries_; }

  unsigned total_degree() const noexcept;

  friend ExponentVector operator+(const ExponentVector& a, const ExponentVector& b);
  friend auto operator<=>(const ExponentVector&, const ExponentVector&) = default;
  friend bool operator==(const ExponentVector&, const ExponentVector&) = default;

 private:
  std::vector<unsigned> entries_;
};

// Sparse multivariate polynomial with double coefficients over an ordered
// list of variable names. Zero coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<ExponentVector, double>;

  Polynomial() = default;
  explicit Polynomial(std::vector<std::string> variables);
  Polynomial(std::vector<std::string> variables, TermMap terms);

  static Polynomial constant(std::vector<std::string> variables, double value);
  static Polynomial variable(std::vector<std::string> variables, std::size_t index);

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  std::size_t num_variables() const noexcept { return variables_.size(); }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t num_terms() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept;
  double constant_value() const noexcept;
  unsigned total_degree() const noexcept;
  bool is_homogeneous() const noexcept;
  std::size_t variable_index(const std::string& name) const;

  template <typename Scalar>
  Scalar evaluate(std::span<const Scalar> point) const;
  double operator()(std::span<const double> point) const { return evaluate<double>(point); }

  // sum |c| |x^e| over the terms; the size of the rounding error of evaluate is
  // about machine epsilon times this.
  template <typename Scalar>
  double magnitude(std::span<const Scalar> point) const;

  Polynomial derivative(std::size_t variable) const;
  Polynomial derivative(const std::string& variable) const;

  // Substitutes x = offset + basis * t, where t ranges over new_variables.
  // basis has num_variables() rows and new_variables.size() columns.
  Polynomial substitute_affine(const Eigen::VectorXd& offset, const Eigen::MatrixXd& basis,
                               std::vector<std::string> new_variables) const;

  // Coefficients of a univariate polynomial, lowest degree first.
  std::vector<double> univariate_coefficients() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scalar);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  Polynomial operator-() const;
  Polynomial pow(unsigned exponent) const;

  // Grammar-compatible text; parse_polynomial(to_string()) reproduces *this.
  std::string to_string() const;

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void add_term(const ExponentVector& exponents, double coefficient);
  void require_same_variables(const Polynomial& other) const;

  std::vector<std::string> variables_;
  TermMap terms_;
};

// Ordered list of polynomials over one shared variable list.
class PolynomialSystem {
 public:
  PolynomialSystem() = default;
  explicit PolynomialSystem(std::vector<Polynomial> polynomials);

  const std::vector<Polynomial>& polynomials() const noexcept { return polynomials_; }
  const Polynomial& operator[](std::size_t i) const { return polynomials_[i]; }
  std::size_t num_equations() const noexcept { return polynomials_.size(); }
  std::size_t num_variables() const noexcept { return variables_.size(); }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  bool is_square() const noexcept { return num_equations() == num_variables(); }
  std::vector<unsigned> degrees() const;

  template <typename Scalar>
  std::vector<Scalar> evaluate(std::span<const Scalar> point) const;

  // Maximum absolute value of the equations at the point.
  double residual(std::span<const double> point) const;
  double residual(std::span<const std::complex<double>> point) const;
  // Largest term magnitude over the equations, at least 1. Solver tolerances
  // are relative to it, so they stay meaningful far from the origin.
  template <typename Scalar>
  double residual_scale(std::span<const Scalar> point) const;

  Eigen::MatrixXd jacobian(std::span<const double> point) const;
  Eigen::MatrixXcd jacobian(std::span<const std::complex<double>> point) const;

  // Formal partial derivatives, row i column j holds dF_i/dx_j.
  const std::vector<std::vector<Polynomial>>& jacobian_polynomials() const noexcept { return jacobian_; }

  PolynomialSystem substitute_affine(const Eigen::VectorXd& offset, const Eigen::MatrixXd& basis,
                                     std::vector<std::string> new_variables) const;

 private:
  std::vector<std::string> variables_;
  std::vector<Polynomial> polynomials_;
  std::vector<std::vector<Polynomial>> jacobian_;
};

// Product of the total degrees of the polynomials.
std::uint64_t bezout_number(const PolynomialSystem& system);

}  // namespace algsample
