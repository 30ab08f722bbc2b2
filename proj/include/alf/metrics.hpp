#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "alf/curvature.hpp"

namespace alf {

using Point = std::array<double, kDim>;

// chart slots shared by every model: (tau, x, theta, phi) with r = r_h + x^2
enum Coord { kTau = 0, kX = 1, kTheta = 2, kPhi = 3 };

struct CatalogueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ExtractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NutMeta {
  int eps = 1;
  int w1 = 1, w2 = 1;     // 0 when the surface gravity ratio is irrational
  double theta = 0.0;     // chart location: x = 0, theta in {0, pi}
  double kappa1 = 0.0;    // signed so that sign(kappa1 * kappa2) = eps
  double kappa2 = 0.0;
};

struct BoltMeta {
  int euler_char = 2;
  int self_intersection = 0;
  double kappa = 0.0;
};

struct FixedPointMeta {
  std::vector<NutMeta> nuts;
  std::vector<BoltMeta> bolts;
  int euler_number = 0;      // e of the circle bundle at infinity
  double ell_inf = 0.0;      // length at infinity
  int orbifold_euler = 2;    // chi[O]
  int euler_char = 0;        // chi[M]
  int signature = 0;
};

struct MetricModel {
  std::string name;
  std::map<std::string, double> params;
  std::string chart_id;
  int orientation = 1;
  double r_h = 0.0;          // r = r_h + x^2
  double scale = 1.0;        // length scale used for sampling and asymptotic rays
  double xi_scale = 1.0;     // xi = xi_scale * d/dtau, sup lambda = 1
  double tau_period = 0.0;
  MetricFn metric;
  FixedPointMeta fixed;
  std::string declared_petrov_plus;   // "half-flat" | "D" | "detect" | "flat"
  std::string declared_petrov_minus;
  bool hypersurface_orthogonal = false;
  bool flat = false;

  double r_of_x(double x) const { return r_h + x * x; }
  double x_of_r(double r) const;
  // Killing field components (constant in this chart)
  Point killing() const { return {xi_scale, 0.0, 0.0, 0.0}; }
  TensorValue killing_jet(int order) const;
  // lambda at a chart point (degree-0 only)
  double lambda_at(const Point& p) const;
};

// Residuals of the self-validation gate.
struct GateResult {
  double ricci_rel = 0.0;
  double killing_rel = 0.0;
  double lambda_max = 0.0;
  bool lambda_monotone = true;
  std::vector<double> ray_lambda;  // lambda at r = {10,1e2,1e3,1e4} * scale
  bool pass = false;
};

std::vector<std::string> metric_names();
// Build a model from name and parameter overrides; runs the validation gate.
MetricModel make_model(const std::string& name, const std::map<std::string, double>& params = {},
                       bool validate = true);
GateResult validate_model(const MetricModel& model, int n_points = 100, std::uint64_t seed = 1);
std::vector<MetricModel> catalogue();

// A copy of model with a non-Ricci-flat perturbation of relative size amp: a decaying
// conformal factor plus a tau-phi cross term. xi stays Killing.
MetricModel perturbed(const MetricModel& model, double amp);

std::vector<Point> sample_points(const MetricModel& model, int count, std::uint64_t seed,
                                 double lambda_min, double margin = 1e-2, double r_max = 0.0);

struct SurfaceGravity {
  bool is_nut = true;
  double kappa1 = 0.0, kappa2 = 0.0;  // nut (signed, product sign = orientation)
  double kappa = 0.0;                 // bolt
  double nu_over_mu = 0.0;            // bolt check
  double metadata_rel_err = 0.0;
  std::vector<double> eps_trace;      // approach distances used
  std::vector<double> mu_trace, nu_trace;
};

// locus: "nut:<i>" or "bolt:<i>"
SurfaceGravity surface_gravities(const MetricModel& model, const std::string& locus);

// key=value configuration (blank lines and # comments ignored)
std::map<std::string, std::string> read_key_values(const std::string& path);

}  // namespace alf
