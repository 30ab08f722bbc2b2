#pragma once

#include <array>
#include <string>
#include <vector>

#include "alf/curvature.hpp"
#include "alf/metrics.hpp"

namespace alf {

struct FixedPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NormalizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// side index: 0 for +, 1 for -
constexpr int side_index(int sign) { return sign > 0 ? 0 : 1; }
constexpr int side_sign(int idx) { return idx == 0 ? 1 : -1; }

// Normalization of the Ernst potentials for one duality side:
// E = lambda +/- omega with the twist potential omega -> 0 at infinity.
struct ErnstCalibration {
  int sign = 1;
  double b = 0.0;              // E = 1 + b / r + ...
  double tail_exponent = 0.0;  // empirical delta in sigma_r r^2 + b ~ r^-delta
  double fit_residual = 0.0;
  double r_fit = 0.0;          // radius where the tail fit starts
  bool constant = false;       // E identically 1 (half-flat side)
};

// twist potential at a chart point, normalized to vanish at infinity
double twist_potential(const MetricModel& model, const Point& p);
// value along a second path (radial ray at the point's theta), spot check
double twist_potential_alt(const MetricModel& model, const Point& p);
// sigma^+ and sigma^- at a point (degree-0 covariant components)
std::array<std::array<double, 4>, 2> sigma_at(const MetricModel& model, const Point& p);

ErnstCalibration ernst_calibrate(const MetricModel& model, int sign);

struct Concomitants {
  int order = 0;
  Point point{};
  CurvatureBundle bundle;
  TensorValue xi_up, xi;      // u, d
  JetScalar lambda;
  TensorValue F;              // F_ab = nabla_a xi_b
  JetScalar mu, nu;
  TensorValue twist1;         // omega_a
  JetScalar twist;            // omega
  std::array<TensorValue, 2> Fs;   // F+-_ab
  std::array<JetScalar, 2> F2;     // (F+-)^2
  std::array<TensorValue, 2> sigma;
  std::array<JetScalar, 2> E;
  std::array<bool, 2> half_flat{false, false};  // calibration found E identically 1
  TensorValue JT, JD, JE;          // contravariant currents
  std::array<TensorValue, 2> J;    // J+-^a
  // Mars-Simon layer, populated only when ms_valid
  std::array<bool, 2> ms_valid{false, false};
  std::array<std::string, 2> ms_reason;
  std::array<TensorValue, 2> S;    // dddd
  std::array<JetScalar, 2> S2, FS2, s2;
  std::array<TensorValue, 2> Gamma;  // d

  const TensorValue& W(int side) const { return side == 0 ? bundle.weyl_sd : bundle.weyl_asd; }
  const TensorValue& I(int side) const { return side == 0 ? bundle.proj_sd : bundle.proj_asd; }
};

// Mars-Simon floor: (F+-)^2 below floor_scale * b^2 / r^4 withholds the S-layer
Concomitants concomitants_at(const MetricModel& model, const Point& point, int order,
                             const std::array<ErnstCalibration, 2>& cal,
                             double floor_scale = 1e-10);

// V(beta) and Psi^(beta) for one side; require ms_valid
JetScalar potential_V(const Concomitants& c, int side, double beta);
TensorValue psi_field(const Concomitants& c, int side, double beta);  // contravariant
// |s|^beta
JetScalar s_power(const Concomitants& c, int side, double beta);
// P+-_abc; parts receives the gamma W xi F and xi xi W sigma pieces separately
TensorValue p_tensor(const Concomitants& c, int side, std::array<TensorValue, 2>* parts = nullptr);

struct QuotientScalarValues {
  double w_plus = 0, w_minus = 0, theta = 0, k4_plus = 0, k4_minus = 0;
  double theta_residual = 0;   // |Theta - 4 lambda / ((1+E+)(1+E-))|
  std::array<double, 2> k4_residual{0, 0};  // |k^4 - 4 w^4 s^2| (NaN when s is withheld)
};
QuotientScalarValues quotient_scalars(const Concomitants& c);
// direct-substitution form used by the oracle tests
QuotientScalarValues quotient_scalars(double lambda, double E_plus, double E_minus, double mu,
                                      double nu);

struct PetrovSide {
  std::string type;  // "half-flat" | "D" | "general" | "inconsistent" | "flat"
  double max_s_ratio = 0;         // max ||S|| / ||W||
  double s2_rel_std = 0;          // std / |mean| of s^2
  double s2_mean = 0;
  double max_eig_split = 0;       // relative gap of the closest eigenvalue pair (0 = degenerate)
  double max_w_ratio = 0;         // ||W+-|| / ||W||
  int n_points = 0;
  std::vector<std::string> diagnostics;
};
PetrovSide petrov_classify(const MetricModel& model, const std::vector<Point>& points, int sign);

// Both label assignments: with the chart orientation and with it reversed.
struct PetrovReport {
  PetrovSide plus, minus;              // chart orientation
  PetrovSide plus_flipped, minus_flipped;
};
PetrovReport petrov_report(const MetricModel& model, int n_points, std::uint64_t seed);

// jets of a potential whose gradient jets are known (coefficient matching)
JetScalar integrate_gradient(double value, const TensorValue& grad, int order);

}  // namespace alf
