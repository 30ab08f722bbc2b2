#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "alf/metrics.hpp"

using namespace alf;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("catalogue lists the five models and each passes its gate") {
  auto names = metric_names();
  CHECK(names == std::vector<std::string>{"flat", "schwarzschild", "kerr", "taub-nut", "taub-bolt"});
  for (const auto& n : names) {
    MetricModel m = make_model(n, {}, false);
    GateResult g = validate_model(m, 40, 3);
    CHECK_MESSAGE(g.pass, n);
    CHECK(g.lambda_max <= 1.0 + 1e-12);
  }
}

TEST_CASE("Schwarzschild bolt: kappa = 1 / (4 m), no spurious second gravity") {
  MetricModel m = make_model("schwarzschild", {{"m", 1.3}});
  SurfaceGravity sg = surface_gravities(m, "bolt:0");
  CHECK_FALSE(sg.is_nut);
  CHECK(sg.kappa == doctest::Approx(1.0 / 5.2).epsilon(1e-9));
  CHECK(std::abs(sg.nu_over_mu) < 1e-8);
  CHECK(m.tau_period == doctest::Approx(8 * kPi * 1.3));
  CHECK(m.fixed.bolts.at(0).self_intersection == 0);
}

TEST_CASE("Taub-NUT nut has equal surface gravities 1 / (4 n)") {
  MetricModel m = make_model("taub-nut", {{"n", 0.7}});
  SurfaceGravity sg = surface_gravities(m, "nut:0");
  CHECK(sg.is_nut);
  CHECK(std::abs(sg.kappa1) == doctest::Approx(1.0 / 2.8).epsilon(1e-9));
  CHECK(std::abs(sg.kappa2) == doctest::Approx(1.0 / 2.8).epsilon(1e-9));
  CHECK(sg.kappa1 * sg.kappa2 > 0);
}

TEST_CASE("Kerr at a = m / sqrt 3: kappa = 2 - sqrt 3, Omega = kappa / 2, weights {1, 2}") {
  MetricModel m = make_model("kerr", {{"m", 1.0}, {"a", 1.0 / std::sqrt(3.0)}});
  const double kh = 2.0 - std::sqrt(3.0);
  for (int i = 0; i < 2; ++i) {
    std::string loc = "nut:" + std::to_string(i);
    SurfaceGravity sg = surface_gravities(m, loc);
    double big = std::max(std::abs(sg.kappa1), std::abs(sg.kappa2));
    double small = std::min(std::abs(sg.kappa1), std::abs(sg.kappa2));
    CHECK(big == doctest::Approx(kh).epsilon(1e-8));
    CHECK(small == doctest::Approx(kh / 2).epsilon(1e-8));
    const NutMeta& n = m.fixed.nuts[i];
    CHECK(std::min(n.w1, n.w2) == 1);
    CHECK(std::max(n.w1, n.w2) == 2);
  }
  // opposite orientations at the two poles
  CHECK(m.fixed.nuts[0].eps == -m.fixed.nuts[1].eps);
}

TEST_CASE("Taub-bolt metadata: one sphere, B.B = e = 1, kappa = 1 / (4 n)") {
  MetricModel m = make_model("taub-bolt", {{"n", 1.0}});
  REQUIRE(m.fixed.bolts.size() == 1);
  CHECK(m.fixed.bolts[0].euler_char == 2);
  CHECK(m.fixed.bolts[0].self_intersection == 1);
  CHECK(m.fixed.euler_number == 1);
  SurfaceGravity sg = surface_gravities(m, "bolt:0");
  CHECK(sg.kappa == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("bad parameters are rejected") {
  CHECK_THROWS_AS(make_model("kerr", {{"a", 1.5}}), CatalogueError);
  CHECK_THROWS_AS(make_model("schwarzschild", {{"q", 1.0}}), CatalogueError);
  CHECK_THROWS_AS(make_model("nope"), CatalogueError);
  CHECK_THROWS_AS(make_model("taub-nut", {{"n", -1.0}}), CatalogueError);
}

TEST_CASE("sampling is seeded and respects the lambda floor") {
  MetricModel m = make_model("kerr");
  auto a = sample_points(m, 30, 11, 0.1);
  auto b = sample_points(m, 30, 11, 0.1);
  CHECK(a == b);
  for (const auto& p : a) CHECK(m.lambda_at(p) >= 0.1);
  CHECK_THROWS_AS(sample_points(m, 5, 1, 1.5), SamplingError);
}

TEST_CASE("perturbed copies fail the Ricci gate") {
  MetricModel m = make_model("schwarzschild");
  GateResult g = validate_model(perturbed(m, 1e-3), 20, 1);
  CHECK_FALSE(g.pass);
  CHECK(g.ricci_rel > 1e-6);
}

TEST_CASE("key=value files: comments, blanks, malformed lines") {
  const char* path = "alf_test_kv.cfg";
  {
    std::ofstream f(path);
    f << "# header\n\nmetric = kerr  # trailing\n a=0.5\n";
  }
  auto kv = read_key_values(path);
  CHECK(kv.size() == 2);
  CHECK(kv.at("metric") == "kerr");
  CHECK(kv.at("a") == "0.5");
  {
    std::ofstream f(path);
    f << "no equals sign\n";
  }
  CHECK_THROWS(read_key_values(path));
  std::remove(path);
}
