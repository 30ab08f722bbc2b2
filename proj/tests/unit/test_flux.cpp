#include <doctest.h>

#include <cmath>
#include <numbers>

#include "alf/flux.hpp"

using namespace alf;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("sqrt-eps Richardson step is exact on A + B sqrt(eps)") {
  auto v = [](double e) { return 3.0 - 7.0 * std::sqrt(e); };
  CHECK(richardson_sqrt(0.1, v(0.1), 0.05, v(0.05)) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("sphere volume at r = R on Schwarzschild") {
  const double m = 1.0, R = 7.0;
  MetricModel model = make_model("schwarzschild", {{"m", m}});
  LevelSurfaceMesh s = sphere_at_radius(model, R, 32);
  CHECK(s.area == doctest::Approx(8 * kPi * m * std::sqrt(1 - 2 * m / R) * 4 * kPi * R * R).epsilon(1e-12));
  CHECK_THROWS_AS(sphere_at_radius(model, 1.0, 32), MeshError);
}

TEST_CASE("level surfaces reject bad input") {
  MetricModel m = make_model("taub-nut");
  CHECK_THROWS_AS(level_surface(m, "nut:0", 1.5), MeshError);
  CHECK_THROWS_AS(level_surface(m, "nut:3", 0.1), MeshError);
  CHECK_THROWS_AS(level_surface(m, "edge:0", 0.1), MeshError);
  CHECK_THROWS_AS(level_surface(m, "nut:0", 0.1, 17), MeshError);
  LevelSurfaceMesh s = level_surface(m, "nut:0", 0.05, 16);
  for (const auto& p : s.nodes) CHECK(m.lambda_at(p) == doctest::Approx(0.05).epsilon(1e-12));
  for (double w : s.weights) CHECK(w > 0);
}

TEST_CASE("nut and bolt charges") {
  const double n = 0.8;
  FluxSeries nut = charge(make_model("taub-nut", {{"n", n}}), "nut:0");
  CHECK(nut.extrapolated == doctest::Approx(8 * kPi * n * n).epsilon(1e-4));
  CHECK(nut.pass);
  FluxSeries sch = charge(make_model("schwarzschild"), "bolt:0");
  CHECK(std::abs(sch.extrapolated) < 1e-6);
  // B.B = 1, kappa = 1 / (4 n)
  FluxSeries tb = charge(make_model("taub-bolt", {{"n", n}}), "bolt:0");
  CHECK(tb.extrapolated == doctest::Approx(-8 * kPi * n * n).epsilon(1e-4));
}

TEST_CASE("Schwarzschild boundary terms: +-32 pi^2 m") {
  const double m = 1.5;
  MetricModel model = make_model("schwarzschild", {{"m", m}});
  for (int s : {1, -1}) {
    FluxSeries b = fixed_point_boundary_term(model, "bolt:0", s);
    CHECK(b.extrapolated == doctest::Approx(32 * kPi * kPi * m).epsilon(1e-6));
    FluxSeries inf = infinity_term(model, s);
    CHECK(inf.extrapolated == doctest::Approx(-32 * kPi * kPi * m).epsilon(1e-6));
  }
}

TEST_CASE("global balance closes on Schwarzschild and on the non-flat side of Taub-NUT") {
  for (int s : {1, -1}) {
    BalanceLedger L = global_balance(make_model("schwarzschild"), s, 24);
    CHECK(L.applicable);
    CHECK(L.closed_imbalance < 1e-5);
    CHECK(L.numeric_imbalance < 1e-5);
    CHECK(L.pass);
  }
  MetricModel tn = make_model("taub-nut");
  CHECK(global_balance(tn, 1, 24).pass);
  BalanceLedger flat_side = global_balance(tn, -1, 24);
  CHECK_FALSE(flat_side.applicable);
  CHECK(flat_side.petrov == "half-flat");
}

TEST_CASE("length at infinity: shortest local period, below the generic one") {
  MetricModel k = make_model("kerr", {{"m", 1.0}, {"a", 1.0 / std::sqrt(3.0)}});
  LengthAtInfinity li = length_at_infinity(k);
  const double kh = 2.0 - std::sqrt(3.0);
  CHECK(li.ell_inf == doctest::Approx(2 * kPi / kh).epsilon(1e-8));
  CHECK(li.generic == doctest::Approx(4 * kPi / kh).epsilon(1e-8));
  CHECK(li.bound_ok);
  LengthAtInfinity sl = length_at_infinity(make_model("schwarzschild", {{"m", 2.0}}));
  CHECK(sl.ell_inf == doctest::Approx(16 * kPi).epsilon(1e-8));
}

TEST_CASE("F tends to 2 kappa at a bolt, and the rewrite remainder stays bounded") {
  FixedPointLimits l = fixed_point_limits(make_model("schwarzschild"), "bolt:0", 1);
  CHECK(l.calF_target == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(l.calF_slope == doctest::Approx(1.0).epsilon(0.15));
  CHECK(l.rest_slope > -0.1);
  CHECK(l.gradient_slope < -0.4);
  CHECK(l.pass);
}
