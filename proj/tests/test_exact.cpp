#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gibbslab/exact.hpp"

using namespace gibbslab;

TEST_CASE("parse_rational reads integers, fractions and decimals exactly") {
  CHECK(parse_rational("3") == Rational(3));
  CHECK(parse_rational("-1/3") == Rational(-1, 3));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("2.5e-3") == Rational(1, 400));
  CHECK(parse_rational(" 6/4 ") == Rational(3, 2));
  CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
}

TEST_CASE("quotient ring Q[s]/(s^2 - 2) behaves like sqrt(2)") {
  const auto ctx = AlgebraicContext::quotient({Rational(-2), Rational(0), Rational(1)}, std::sqrt(2.0), "s");
  const Algebraic s = Algebraic::generator(ctx);
  CHECK(s * s == Algebraic(2));
  CHECK((s + 1) * (s - 1) == Algebraic(1));
  const Algebraic inv = s.inverse();
  CHECK(inv * s == Algebraic(1));
  CHECK(inv.to_double() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  // 1/(1+s) = s - 1
  CHECK(Algebraic(1) / (Algebraic(1) + s) == s - Algebraic(1));
}

TEST_CASE("cubic ring reduces powers of the generator") {
  // y^3 = q - 3y^2 with q = 25
  const auto ctx = AlgebraicContext::quotient({Rational(-25), Rational(0), Rational(3), Rational(1)}, 0.0, "y");
  const Algebraic y = Algebraic::generator(ctx);
  const Algebraic cube = y * y * y;
  CHECK(cube == Algebraic(25) - Algebraic(3) * y * y);
  CHECK(cube.coeffs().size() == 3);
  CHECK((y * (y * y + Algebraic(3) * y)) == Algebraic(25));
  CHECK(y.inverse() * y == Algebraic(1));
}

TEST_CASE("polynomial ring keeps exact polynomial identities") {
  const auto ctx = AlgebraicContext::polynomial(0.5, "t");
  const Algebraic t = Algebraic::generator(ctx);
  const Algebraic lhs = (Algebraic(1) + t) * (Algebraic(1) - t);
  CHECK(lhs == Algebraic(1) - t * t);
  CHECK(lhs.to_double() == doctest::Approx(0.75));
  CHECK_THROWS_AS(t.inverse(), std::domain_error);
}

TEST_CASE("power tables and ipow agree") {
  const auto table = power_table(Rational(2, 3), 6);
  REQUIRE(table.size() == 7);
  for (int k = 0; k <= 6; ++k) CHECK(table[k] == ipow(Rational(2, 3), k));
  CHECK(table[6] == Rational(64, 729));
  CHECK(ipow(3.0, 0) == 1.0);
}

TEST_CASE("rational to_string is canonical") {
  Rational r(6, 4);
  r.canonicalize();
  CHECK(to_string(r) == "3/2");
  CHECK(to_string(0.1) == "0.10000000000000001");
}
