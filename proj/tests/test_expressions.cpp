#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "algsample/expression.hpp"
#include "algsample/rng.hpp"

using namespace algsample;
using cplx = std::complex<double>;

namespace {

const std::vector<std::string> xy{"x", "y"};
const std::string eq1 = "x^4+y^4-3x^2-x*y^2-y+1";

double eval(const Polynomial& p, std::initializer_list<double> pt) {
  std::vector<double> v(pt);
  return p.evaluate<double>(v);
}

// Random sparse polynomial with small integer exponents.
Polynomial random_polynomial(RandomStream& rng, const std::vector<std::string>& vars, unsigned max_exp, int terms) {
  Polynomial p(vars);
  for (int t = 0; t < terms; ++t) {
    Polynomial m = Polynomial::constant(vars, std::round(rng.gaussian() * 1e3) / 64.0);
    for (std::size_t j = 0; j < vars.size(); ++j)
      m = m * Polynomial::variable(vars, j).pow(static_cast<unsigned>(rng.bits() % (max_exp + 1)));
    p += m;
  }
  return p;
}

}  // namespace

TEST_CASE("parse simple polynomials") {
  const Polynomial circle = parse_polynomial("x^2 + y^2 - 1", xy);
  CHECK(circle.num_terms() == 3);
  CHECK(circle.total_degree() == 2);

  const Polynomial curve = parse_polynomial(eq1, xy);
  CHECK(curve.num_terms() == 6);
  CHECK(curve.total_degree() == 4);
  CHECK(eval(curve, {0, 0}) == 1.0);
  CHECK(eval(curve, {1, 1}) == -2.0);

  const Polynomial zero = parse_polynomial("x + x - 2x", {"x"});
  CHECK(zero.is_zero());
  CHECK(zero.terms().empty());
}

TEST_CASE("grammar details") {
  CHECK(eval(parse_polynomial("2*(x - 1)^3", xy), {3, 0}) == 16.0);
  CHECK(eval(parse_polynomial("-x^2", xy), {3, 0}) == -9.0);
  CHECK(eval(parse_polynomial("1.5e1*x - 2.5E-1", xy), {1, 0}) == 14.75);
  CHECK(eval(parse_polynomial("x/4 + y", xy), {2, 1}) == 1.5);
  CHECK(eval(parse_polynomial("(x+y)^0", xy), {2, 1}) == 1.0);
  CHECK(eval(parse_polynomial("  x\t*\ny ", xy), {2, 3}) == 6.0);
}

TEST_CASE("polynomial parse errors carry positions") {
  auto fails_at = [](const std::string& text, std::size_t line, std::size_t column) {
    CAPTURE(text);
    try {
      parse_polynomial(text, {"x", "y"});
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() == column);
      return;
    }
    FAIL("expected a parse error for " << text);
  };
  fails_at("x^2 + z", 1, 7);
  fails_at("x y", 1, 3);
  fails_at("x^2.5", 1, 3);
  fails_at("x^-1", 1, 2);
  fails_at("x +", 1, 4);
  fails_at("(x + y", 1, 7);
  fails_at("x +\n  * y", 2, 3);
  fails_at("exp(x)", 1, 1);
  fails_at("x / y", 1, 3);
  fails_at("x $ y", 1, 3);
  CHECK_THROWS_AS(parse_polynomial("x", {"x", "x"}), ParseError);
}

TEST_CASE("scalar expressions") {
  const auto e = parse_scalar_expression("exp(2*y)", xy);
  const std::vector<double> p{0, 1};
  CHECK(e.evaluate(p) == doctest::Approx(7.389056).epsilon(1e-7));
  const auto one = parse_scalar_expression("1", xy);
  CHECK(one.is_constant());
  CHECK(one.evaluate(p) == 1.0);
  CHECK(parse_scalar_expression("acos(0)", xy).evaluate(p) == doctest::Approx(std::numbers::pi / 2));
  CHECK(parse_scalar_expression("sqrt(4) + log(1) + abs(-3) + cos(0) + sin(0)", xy).evaluate(p) == 6.0);
  CHECK(parse_scalar_expression("x^-2", xy).evaluate(std::vector<double>{2, 0}) == 0.25);
  CHECK(parse_scalar_expression("(x > 1) * (x <= 3)", xy).evaluate(std::vector<double>{2, 0}) == 1.0);
  CHECK(parse_scalar_expression("(x > 1) * (x <= 3)", xy).evaluate(std::vector<double>{3.5, 0}) == 0.0);
  CHECK(parse_scalar_expression("2*pi", xy).evaluate(p) == doctest::Approx(2 * std::numbers::pi));
  CHECK_THROWS_AS(parse_scalar_expression("gamma(x)", xy), ParseError);
}

TEST_CASE("scalar domain errors carry the point") {
  const std::vector<double> p{0, 2};
  CHECK_THROWS_AS(parse_scalar_expression("1/x", xy).evaluate(p), DomainError);
  CHECK_THROWS_AS(parse_scalar_expression("log(x)", xy).evaluate(p), DomainError);
  CHECK_THROWS_AS(parse_scalar_expression("sqrt(x - 1)", xy).evaluate(p), DomainError);
  CHECK_THROWS_AS(parse_scalar_expression("exp(1000*y)", xy).evaluate(p), DomainError);
  try {
    parse_scalar_expression("acos(y)", xy).evaluate(p);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.point() == p);
  }
}

TEST_CASE("definitions are inlined") {
  Definitions defs;
  defs.emplace("r2", parse_scalar_expression("x^2 + y^2", xy));
  const auto e = parse_scalar_expression("sqrt(r2)", xy, defs);
  CHECK(e.evaluate(std::vector<double>{3, 4}) == 5.0);
  const auto p = parse_polynomial("r2 - 1", xy, defs);
  CHECK(p == parse_polynomial("x^2 + y^2 - 1", xy));
}

TEST_CASE("evaluation over complex numbers") {
  const auto p = parse_polynomial("x^2 + y^2", xy);
  const std::vector<cplx> z{cplx(0, 1), cplx(0, 0)};
  CHECK(p.evaluate<cplx>(z) == cplx(-1, 0));

  RandomStream rng(9);
  const auto curve = parse_polynomial(eq1, xy);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> r{rng.gaussian(), rng.gaussian()};
    const std::vector<cplx> c{r[0], r[1]};
    const cplx vc = curve.evaluate<cplx>(c);
    CHECK(vc.real() == curve.evaluate<double>(r));
    CHECK(vc.imag() == 0.0);
  }
  const std::vector<double> wrong{1, 2, 3};
  CHECK_THROWS_AS(curve.evaluate<double>(wrong), DimensionError);
}

TEST_CASE("formal derivatives") {
  const auto circle = parse_polynomial("x^2 + y^2 - 1", xy);
  CHECK(circle.derivative("x") == parse_polynomial("2*x", xy));
  const auto curve = parse_polynomial(eq1, xy);
  CHECK(curve.derivative("y") == parse_polynomial("4*y^3 - 2*x*y - 1", xy));
  CHECK(Polynomial::constant(xy, 5).derivative("x").is_zero());
  CHECK_THROWS(circle.derivative("z"));
}

TEST_CASE("jacobians") {
  const PolynomialSystem circle({parse_polynomial("x^2 + y^2 - 1", xy)});
  const std::vector<double> p{1, 0};
  const Eigen::MatrixXd J = circle.jacobian(p);
  CHECK(J.rows() == 1);
  CHECK(J(0, 0) == 2.0);
  CHECK(J(0, 1) == 0.0);

  const PolynomialSystem sys({parse_polynomial("x^2 + y^2 - 5", xy), parse_polynomial("x*y - 2", xy)});
  const Eigen::MatrixXd K = sys.jacobian(std::vector<double>{1, 2});
  CHECK(K(0, 0) == 2.0);
  CHECK(K(0, 1) == 4.0);
  CHECK(K(1, 0) == 2.0);
  CHECK(K(1, 1) == 1.0);
  CHECK_THROWS_AS(sys.jacobian(std::vector<double>{1}), DimensionError);
}

TEST_CASE("derivatives agree with central finite differences") {
  RandomStream rng(21);
  const std::vector<std::string> vars{"a", "b", "c"};
  for (int poly = 0; poly < 10; ++poly) {
    const Polynomial p = random_polynomial(rng, vars, 4, 6);
    const PolynomialSystem sys({p});
    for (int i = 0; i < 100; ++i) {
      std::vector<double> x{rng.gaussian(), rng.gaussian(), rng.gaussian()};
      const Eigen::MatrixXd J = sys.jacobian(x);
      for (std::size_t j = 0; j < 3; ++j) {
        const double h = 1e-5 * (1.0 + std::fabs(x[j]));
        std::vector<double> up = x, down = x;
        up[j] += h;
        down[j] -= h;
        const double fd = (p.evaluate<double>(up) - p.evaluate<double>(down)) / (2 * h);
        const double exact = J(0, static_cast<Eigen::Index>(j));
        double scale = 0.0;
        for (const auto& [e, coeff] : p.terms()) {
          double term = std::fabs(coeff);
          for (std::size_t k = 0; k < 3; ++k) term *= std::pow(1.0 + std::fabs(x[k]), e[k]);
          scale += term;
        }
        CHECK(std::fabs(fd - exact) <= 1e-6 * std::max(std::fabs(exact), scale * 1e-2));
      }
    }
  }
}

TEST_CASE("print-parse round trip") {
  RandomStream rng(4);
  const std::vector<std::string> vars{"u", "v", "w1"};
  for (int i = 0; i < 200; ++i) {
    const Polynomial p = random_polynomial(rng, vars, 5, 1 + static_cast<int>(rng.bits() % 8));
    const std::string text = p.to_string();
    CAPTURE(text);
    CHECK(parse_polynomial(text, vars) == p);
  }
  CHECK(Polynomial(xy).to_string() == "0");
  const auto q = parse_polynomial("0.1*x - 1e-20*y^3 + 123456789.125", xy);
  CHECK(parse_polynomial(q.to_string(), xy) == q);
}

TEST_CASE("bezout numbers") {
  const PolynomialSystem sys({parse_polynomial("x^2 + y^2 - 5", xy), parse_polynomial("x*y - 2", xy)});
  CHECK(bezout_number(sys) == 4);
  const std::vector<std::string> x12{"x1", "x2"};
  const PolynomialSystem trott({parse_polynomial(
      "144*(x1^4 + x2^4) - 225*(x1^2 + x2^2) + 350*x1^2*x2^2 + 81", x12)});
  CHECK(bezout_number(trott) == 4);

  // Invariance under reordering equations and variables.
  const std::vector<std::string> abc{"a", "b", "c"}, cab{"c", "a", "b"};
  const std::vector<std::string> eqs{"a^3 - b", "a*b*c - 1", "c^2 + a"};
  std::vector<Polynomial> forward, reordered;
  for (const auto& e : eqs) forward.push_back(parse_polynomial(e, abc));
  for (auto it = eqs.rbegin(); it != eqs.rend(); ++it) reordered.push_back(parse_polynomial(*it, cab));
  CHECK(bezout_number(PolynomialSystem(forward)) == 18);
  CHECK(bezout_number(PolynomialSystem(reordered)) == 18);
}

TEST_CASE("affine substitution") {
  const auto circle = parse_polynomial("x^2 + y^2 - 1", xy);
  // Line (0.5, 0) + t (0, 1): t^2 - 0.75.
  const Polynomial restricted =
      circle.substitute_affine(Eigen::Vector2d(0.5, 0), Eigen::MatrixXd(Eigen::Vector2d(0, 1)), {"t"});
  const auto c = restricted.univariate_coefficients();
  REQUIRE(c.size() == 3);
  CHECK(c[0] == doctest::Approx(-0.75));
  CHECK(c[1] == doctest::Approx(0));
  CHECK(c[2] == doctest::Approx(1));
}
