#include <doctest.h>

#include <cmath>

#include "alf/quotient.hpp"

using namespace alf;

TEST_CASE("quotient scalars by direct substitution") {
  // lambda = 0.3, omega = 0.1: E+ = 0.4, E- = 0.2
  QuotientScalarValues q = quotient_scalars(0.3, 0.4, 0.2, 0.02, 0.01);
  CHECK(q.w_plus == doctest::Approx(0.6 / 1.4));
  CHECK(q.w_minus == doctest::Approx(0.8 / 1.2));
  CHECK(q.theta == doctest::Approx(1.2 / 1.68));
  CHECK(q.theta_residual < 1e-15);
  CHECK(q.k4_plus == doctest::Approx(0.48 / 3.8416));
  CHECK(q.k4_minus == doctest::Approx(0.16 / 2.0736));
}

TEST_CASE("static metric: w+ = w-, A vanishes, gamma annihilates xi") {
  MetricModel m = make_model("schwarzschild");
  std::array<ErnstCalibration, 2> cal{ernst_calibrate(m, 1), ernst_calibrate(m, -1)};
  Concomitants c = concomitants_at(m, {0.0, 1.1, 1.3, 0.0}, 3, cal);
  QuotientFields q = quotient_bundle(c);
  CHECK(q.w[0].value() == doctest::Approx(q.w[1].value()).epsilon(1e-14));
  CHECK(q.A_norm < 1e-14);
  CHECK(q.gamma_xi_residual < 1e-14);
}

TEST_CASE("rotating metric: divergence dictionary and twist conservation") {
  MetricModel m = make_model("kerr", {{"a", 0.5}});
  std::array<ErnstCalibration, 2> cal{ernst_calibrate(m, 1), ernst_calibrate(m, -1)};
  for (const Point& p : sample_points(m, 6, 4, 0.05)) {
    Concomitants c = concomitants_at(m, p, 4, cal);
    QuotientFields q = quotient_bundle(c);
    CHECK(q.A_xi_residual < 1e-12 * std::max(q.A_norm, 1e-300) + 1e-15);
    CHECK(q.A_norm > 0.0);
    TensorValue dlam = gradient(c.lambda, c.bundle.chart_id);
    CHECK(dictionary_residual(c, dlam) < 1e-8);
    CHECK(twist_divergence_residual(c) < 1e-8);
  }
}

TEST_CASE("type-D sides have vanishing P tensor") {
  MetricModel m = make_model("taub-bolt");
  std::array<ErnstCalibration, 2> cal{ernst_calibrate(m, 1), ernst_calibrate(m, -1)};
  Concomitants c = concomitants_at(m, {0.0, 0.9, 1.0, 0.0}, 3, cal);
  QuotientFields q = quotient_bundle(c);
  for (int s = 0; s < 2; ++s) {
    REQUIRE(q.has_p[s]);
    CHECK(q.P[s].max_abs() < 1e-8 * q.p_scale[s]);
  }
}
