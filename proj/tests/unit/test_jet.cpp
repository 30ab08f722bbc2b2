#include <doctest.h>

#include <cmath>

#include "alf/jet.hpp"

using namespace alf;

namespace {

MultiIndex mi(int a, int b, int c = 0, int d = 0) {
  return {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(c),
          static_cast<std::uint8_t>(d)};
}

}  // namespace

TEST_CASE("monomial table prefixes match binomial counts") {
  const auto& t = MonomialTable::instance();
  // monomials of degree <= k in 4 variables: C(k + 4, 4)
  CHECK(t.count(0) == 1);
  CHECK(t.count(1) == 5);
  CHECK(t.count(2) == 15);
  CHECK(t.count(4) == 70);
  for (int i = 0; i < t.count(3); ++i) CHECK(t.index(t.exponent(i)) == i);
}

TEST_CASE("product and chain rule against closed forms") {
  auto x = jet_lift({0.3, 0.7, 0.0, 0.0}, 4);
  JetScalar f = sin(x[0]) * exp(x[1]);
  CHECK(f.value() == doctest::Approx(std::sin(0.3) * std::exp(0.7)).epsilon(1e-15));
  CHECK(f.derivative(mi(1, 1)) == doctest::Approx(std::cos(0.3) * std::exp(0.7)).epsilon(1e-14));
  CHECK(f.derivative(mi(3, 0)) == doctest::Approx(-std::cos(0.3) * std::exp(0.7)).epsilon(1e-14));
  CHECK(f.derivative(mi(2, 2)) == doctest::Approx(-std::sin(0.3) * std::exp(0.7)).epsilon(1e-14));
}

TEST_CASE("inverse, sqrt, log and pow agree with their series") {
  auto x = jet_lift({2.0, 0.0, 0.0, 0.0}, 5);
  JetScalar u = inverse(x[0]);
  // d^k (1/x) = (-1)^k k! / x^(k+1)
  CHECK(u.derivative(mi(3, 0)) == doctest::Approx(-6.0 / 16.0).epsilon(1e-14));
  JetScalar s = sqrt(x[0]);
  CHECK(s.derivative(mi(2, 0)) == doctest::Approx(-0.25 * std::pow(2.0, -1.5)).epsilon(1e-14));
  JetScalar l = log(x[0]);
  CHECK(l.derivative(mi(4, 0)) == doctest::Approx(-6.0 / 16.0).epsilon(1e-14));
  JetScalar p = pow(x[0], 2.5);
  CHECK(p.derivative(mi(2, 0)) == doctest::Approx(2.5 * 1.5 * std::pow(2.0, 0.5)).epsilon(1e-14));
  JetScalar q = atan(x[0]);
  CHECK(q.derivative(mi(1, 0)) == doctest::Approx(1.0 / 5.0).epsilon(1e-15));
}

TEST_CASE("exact partial derivative lowers the order") {
  auto x = jet_lift({0.5, 1.5, 0.0, 0.0}, 3);
  JetScalar f = x[0] * x[0] * x[1];
  JetScalar fx = f.d(0);
  CHECK(fx.order() == 2);
  CHECK(fx.value() == doctest::Approx(2 * 0.5 * 1.5));
  CHECK(fx.derivative(mi(1, 1)) == doctest::Approx(2.0));
}

TEST_CASE("division round trip") {
  auto x = jet_lift({0.4, 0.9, 1.1, 0.2}, 4);
  JetScalar a = x[0] * x[1] + cos(x[2]) + 3.0;
  JetScalar b = exp(x[3]) + x[0];
  JetScalar back = (a / b) * b;
  for (int i = 0; i < a.size(); ++i) CHECK(back[i] == doctest::Approx(a[i]).epsilon(1e-13));
}
