#include <doctest.h>

#include <cmath>

#include "alf/identities.hpp"
#include "alf/metrics.hpp"

using namespace alf;

namespace {

// flat (tau, x) times a round sphere of radius rho
MetricFn cylinder_sphere(double rho) {
  return [rho](const ChartJets& c) {
    int K = c[0].order();
    TensorValue g("dd", K, "sphere");
    g[ix(0, 0)] = JetScalar(1.0, K);
    g[ix(1, 1)] = JetScalar(1.0, K);
    g[ix(2, 2)] = JetScalar(rho * rho, K);
    JetScalar s = sin(c[2]);
    g[ix(3, 3)] = rho * rho * s * s;
    return g;
  };
}

double kretschmann(const CurvatureBundle& b) {
  TensorValue up = b.riemann;
  for (int s = 0; s < 4; ++s) up = raise_index(up, s, b);
  return full_contraction(b.riemann, up, b).value();
}

}  // namespace

TEST_CASE("round sphere factor: scalar curvature 2 / rho^2, Weyl zero") {
  const double rho = 1.7;
  CurvatureBundle b = curvature(cylinder_sphere(rho), {0.0, 0.3, 1.1, 0.4}, 3);
  CHECK(b.scalar.value() == doctest::Approx(2.0 / (rho * rho)).epsilon(1e-12));
  // W^2 = Riem^2 - 2 Ric^2 + R^2 / 3, and the first two cancel for this product
  TensorValue wu = b.weyl;
  for (int s = 0; s < 4; ++s) wu = raise_index(wu, s, b);
  double w2 = full_contraction(b.weyl, wu, b).value();
  CHECK(w2 == doctest::Approx(4.0 / (3.0 * std::pow(rho, 4))).epsilon(1e-10));
}

TEST_CASE("Schwarzschild is Ricci flat with Kretschmann 48 m^2 / r^6") {
  MetricModel m = make_model("schwarzschild", {{"m", 1.3}});
  for (double x : {0.5, 1.0, 2.5}) {
    Point p{0.0, x, 0.9, 0.0};
    CurvatureBundle b = curvature(m.metric, p, 2, m.orientation);
    double r = m.r_of_x(x);
    double k = 48 * 1.3 * 1.3 / std::pow(r, 6);
    CHECK(kretschmann(b) == doctest::Approx(k).epsilon(1e-10));
    CHECK(b.ricci.max_abs() < 1e-12 * k * r * r);
  }
}

TEST_CASE("volume form contraction identities") {
  MetricModel m = make_model("kerr", {{"a", 0.4}});
  CurvatureBundle b = connection_only(m.metric, {0.0, 0.8, 1.2, 0.3}, 1);
  EpsilonReport r = epsilon_identity_suite(b);
  CHECK(r.pass);
  CHECK(r.full_contraction < 1e-12);
}

TEST_CASE("self-dual and anti-self-dual Weyl pieces add up to twice the Weyl tensor") {
  MetricModel m = make_model("kerr", {{"a", 0.4}});
  CurvatureBundle b = curvature(m.metric, {0.0, 0.8, 1.2, 0.3}, 2);
  double wmax = b.weyl.max_abs();
  for (int i = 0; i < 256; ++i)
    CHECK(std::abs(b.weyl_sd[i].value() + b.weyl_asd[i].value() - 2 * b.weyl[i].value()) <
          1e-12 * wmax);
}

TEST_CASE("degenerate metric is reported") {
  MetricFn bad = [](const ChartJets& c) {
    TensorValue g("dd", c[0].order(), "bad");
    g[ix(0, 0)] = JetScalar(1.0, c[0].order());
    return g;
  };
  CHECK_THROWS_AS(connection_only(bad, {0, 0, 0, 0}, 1), DegenerateMetric);
}
