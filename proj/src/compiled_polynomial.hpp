#pragma once

#include <algorithm>
#include <vector>

#include "algsample/polynomial.hpp"

namespace algsample::detail {

// Flat term list for repeated evaluation of a polynomial and its gradient.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p) : num_variables_(p.num_variables()) {
    max_exponent_.assign(num_variables_, 0);
    term_start_.push_back(0);
    for (const auto& [e, c] : p.terms()) {
      coefficients_.push_back(c);
      for (std::size_t j = 0; j < num_variables_; ++j) {
        if (!e[j]) continue;
        factors_.push_back({static_cast<unsigned>(j), e[j]});
        max_exponent_[j] = std::max(max_exponent_[j], e[j]);
      }
      term_start_.push_back(factors_.size());
    }
    offsets_.assign(num_variables_ + 1, 0);
    for (std::size_t j = 0; j < num_variables_; ++j) offsets_[j + 1] = offsets_[j] + max_exponent_[j] + 1;
  }

  std::size_t num_variables() const noexcept { return num_variables_; }

  // Returns p(x) and writes the gradient into grad (length num_variables()).
  template <typename Scalar>
  Scalar evaluate(const Scalar* x, Scalar* grad) const {
    const std::size_t n = num_variables_;
    thread_local std::vector<Scalar> powers, factor, prefix;
    powers.resize(offsets_[n]);
    for (std::size_t j = 0; j < n; ++j) {
      Scalar* pw = powers.data() + offsets_[j];
      pw[0] = Scalar(1);
      for (unsigned k = 1; k <= max_exponent_[j]; ++k) pw[k] = pw[k - 1] * x[j];
    }
    for (std::size_t j = 0; j < n; ++j) grad[j] = Scalar(0);
    Scalar value(0);
    for (std::size_t t = 0; t < coefficients_.size(); ++t) {
      const Factor* f = factors_.data() + term_start_[t];
      const std::size_t s = term_start_[t + 1] - term_start_[t];
      const double c = coefficients_[t];
      factor.resize(s);
      prefix.resize(s + 1);
      prefix[0] = Scalar(1);
      for (std::size_t i = 0; i < s; ++i) {
        factor[i] = powers[offsets_[f[i].variable] + f[i].exponent];
        prefix[i + 1] = prefix[i] * factor[i];
      }
      value += prefix[s] * c;
      Scalar suffix(c);
      for (std::size_t i = s; i-- > 0;) {
        const Factor& fi = f[i];
        grad[fi.variable] += prefix[i] * suffix * powers[offsets_[fi.variable] + fi.exponent - 1] *
                             static_cast<double>(fi.exponent);
        suffix *= factor[i];
      }
    }
    return value;
  }

 private:
  std::size_t num_variables_ = 0;
  struct Factor {
    unsigned variable;
    unsigned exponent;
  };
  std::vector<double> coefficients_;
  // Nonzero exponents of term t are factors_[term_start_[t] .. term_start_[t + 1]).
  std::vector<Factor> factors_;
  std::vector<std::size_t> term_start_;
  std::vector<unsigned> max_exponent_;
  std::vector<std::size_t> offsets_;
};

// Homogenizes p in variables (x_1..x_m) to degree d with a new leading variable x_0.
inline Polynomial homogenize(const Polynomial& p, unsigned degree) {
  std::vector<std::string> vars;
  vars.reserve(p.num_variables() + 1);
  vars.push_back("_h0");
  for (const auto& v : p.variables()) vars.push_back(v);
  Polynomial::TermMap terms;
  for (const auto& [e, c] : p.terms()) {
    std::vector<unsigned> h(e.size() + 1);
    h[0] = degree - e.total_degree();
    std::copy(e.entries().begin(), e.entries().end(), h.begin() + 1);
    terms.emplace(ExponentVector(std::move(h)), c);
  }
  return Polynomial(std::move(vars), std::move(terms));
}

}  // namespace algsample::detail
