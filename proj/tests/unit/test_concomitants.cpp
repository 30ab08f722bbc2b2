#include <doctest.h>

#include <cmath>

#include "alf/concomitants.hpp"

using namespace alf;

TEST_CASE("Ernst calibration: E = 1 + b / r with b = -2 m +- 2 n") {
  struct Case {
    const char* name;
    double b_plus, b_minus;
    bool flat_minus;
  };
  // static and rotating: no NUT charge; Taub-NUT (m = n) and Taub-bolt (m = 5 n / 4)
  for (auto c : {Case{"schwarzschild", -2.0, -2.0, false}, Case{"kerr", -2.0, -2.0, false},
                 Case{"taub-nut", -4.0, 0.0, true}, Case{"taub-bolt", -0.5, -4.5, false}}) {
    MetricModel m = make_model(c.name);
    ErnstCalibration p = ernst_calibrate(m, 1), q = ernst_calibrate(m, -1);
    CHECK_MESSAGE(p.b == doctest::Approx(c.b_plus).epsilon(1e-6).scale(1.0), c.name);
    CHECK_MESSAGE(q.b == doctest::Approx(c.b_minus).epsilon(1e-6).scale(1.0), c.name);
    CHECK(q.constant == c.flat_minus);
    CHECK_FALSE(p.constant);
  }
}

TEST_CASE("Kerr twist potential is -2 m a cos(theta) / Sigma") {
  const double M = 1.0, A = 0.4;
  MetricModel m = make_model("kerr", {{"m", M}, {"a", A}});
  for (Point p : {Point{0, 0.8, 0.7, 0}, Point{0, 1.5, 2.0, 0}, Point{0, 3.0, 1.2, 0}}) {
    double r = m.r_of_x(p[1]);
    double c = std::cos(p[2]);
    double expect = -2 * M * A * c / (r * r - A * A * c * c);
    CHECK(twist_potential(m, p) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(twist_potential_alt(m, p) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("static metric: twist vanishes and the Ernst potentials coincide") {
  MetricModel m = make_model("schwarzschild");
  std::array<ErnstCalibration, 2> cal{ernst_calibrate(m, 1), ernst_calibrate(m, -1)};
  Concomitants c = concomitants_at(m, {0.0, 1.2, 0.8, 0.0}, 2, cal);
  CHECK(std::abs(c.twist.value()) < 1e-14);
  CHECK(c.E[0].value() == doctest::Approx(c.E[1].value()).epsilon(1e-14));
  CHECK(c.E[0].value() == doctest::Approx(c.lambda.value()).epsilon(1e-14));
}

TEST_CASE("Petrov classification of the catalogue") {
  for (const char* name : {"schwarzschild", "kerr", "taub-bolt"}) {
    MetricModel m = make_model(name);
    PetrovReport r = petrov_report(m, 20, 5);
    for (const PetrovSide* s : {&r.plus, &r.minus}) {
      CHECK_MESSAGE(s->type == "D", name);
      CHECK(s->s2_rel_std < 1e-6);
      CHECK(s->max_s_ratio < 1e-7);
    }
  }
  PetrovReport t = petrov_report(make_model("taub-nut"), 20, 5);
  CHECK(((t.plus.type == "half-flat") != (t.minus.type == "half-flat")));
  // reversing the orientation swaps which side is flat
  CHECK(((t.plus.type == "half-flat") == (t.minus_flipped.type == "half-flat")));
}

TEST_CASE("V(beta) is non-negative on type-D sides") {
  MetricModel m = make_model("kerr");
  std::array<ErnstCalibration, 2> cal{ernst_calibrate(m, 1), ernst_calibrate(m, -1)};
  for (const Point& p : sample_points(m, 12, 9, 0.05)) {
    Concomitants c = concomitants_at(m, p, 2, cal);
    for (int side = 0; side < 2; ++side) {
      REQUIRE(c.ms_valid[side]);
      for (double beta : {0.5, 1.0, 2.0}) CHECK(potential_V(c, side, beta).value() >= -1e-10);
    }
  }
}

TEST_CASE("half-flat side withholds the Mars-Simon layer") {
  MetricModel m = make_model("taub-nut");
  std::array<ErnstCalibration, 2> cal{ernst_calibrate(m, 1), ernst_calibrate(m, -1)};
  Concomitants c = concomitants_at(m, {0.0, 1.0, 1.0, 0.0}, 2, cal);
  CHECK(c.ms_valid[0]);
  CHECK_FALSE(c.ms_valid[1]);
  CHECK_FALSE(c.ms_reason[1].empty());
}
