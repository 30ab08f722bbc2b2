#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alf/concomitants.hpp"

namespace alf {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A level surface {lambda = eps} around one fixed point, or {r = R}. The surface is a
// torus fibration over a curve in the (x, theta) half-plane; nodes sit on that curve
// and weights carry the (tau, phi) circle factors and the induced volume element.
struct LevelSurfaceMesh {
  std::string locus;              // "nut:<i>", "bolt:<i>" or "infinity"
  double level = 0.0;             // eps, or R for infinity
  std::vector<Point> nodes;
  std::vector<double> weights;    // > 0
  std::vector<std::array<double, 4>> normal;  // unit covector: toward the fixed point / outward
  double area = 0.0;              // sum of weights
};

// Unit for the eps sequences below: 1 when the fixed set is a whole chart line, else the
// level at which the sets around neighbouring nuts merge. Levels are relative to it.
double level_scale(const MetricModel& model, const std::string& locus);

LevelSurfaceMesh level_surface(const MetricModel& model, const std::string& locus, double eps,
                               int n_nodes = 32);
LevelSurfaceMesh sphere_at_radius(const MetricModel& model, double R, int n_nodes = 32);

// sum_i w_i V^a(p_i) n_a(p_i) for a contravariant field given by value
double surface_flux(const LevelSurfaceMesh& mesh,
                    const std::function<std::array<double, 4>(const Point&)>& field);

// extrapolation in eps with error O(eps^{1/2}), from the last two levels
double richardson_sqrt(double eps1, double v1, double eps2, double v2);

struct FluxSeries {
  std::string locus;
  int sign = 0;                  // 0 for the charge
  std::vector<double> levels;    // eps or R
  std::vector<double> values;
  double extrapolated = 0.0;
  double target = 0.0;           // closed form from extracted surface gravities
  double abs_err = 0.0, rel_err = 0.0;
  double spread = 0.0;           // max |v_i - v_j| / max(|v|, scale)
  double tail_exponent = 0.0;    // infinity only
  std::string warning;
  bool pass = false;
};

// -(1/8 pi) int lambda^-2 omega_a n^a over {lambda = eps}, n toward the fixed point
FluxSeries charge(const MetricModel& model, const std::string& locus,
                  const std::vector<double>& eps_sequence = {0.1, 0.05, 0.025},
                  int n_nodes = 32);

// int n^a Psi_a (beta = 1) over {lambda = eps}
FluxSeries fixed_point_boundary_term(const MetricModel& model, const std::string& locus, int sign,
                                     const std::vector<double>& eps_sequence = {0.1, 0.05, 0.025},
                                     int n_nodes = 32);

// int n^a Psi_a over {r = R}, n outward
FluxSeries infinity_term(const MetricModel& model, int sign,
                         const std::vector<double>& R_sequence = {},
                         int n_nodes = 32);

// F+-^(1/2) limits and the rewrite decomposition on a shrinking family of level sets
struct FixedPointLimits {
  std::string locus;
  int sign = 1;
  std::vector<double> levels;
  std::vector<double> calF_mean;     // mean of sqrt((F+-)^2) on the surface
  double calF_target = 0.0;          // 2 |kappa1 +- kappa2| or 2 |kappa|
  double calF_slope = 0.0;           // log-log slope of the deviation against eps
  std::vector<double> rest_max;      // max |Psi - (+-(F/2) J_T + grad F / (2 lambda))|
  std::vector<double> current_max;   // max |(F/2) J_T|
  std::vector<double> gradient_max;  // max |grad F / (2 lambda)|
  double rest_slope = 0.0, current_slope = 0.0, gradient_slope = 0.0;
  bool pass = false;
};
FixedPointLimits fixed_point_limits(const MetricModel& model, const std::string& locus, int sign,
                                    const std::vector<double>& eps_sequence = {0.04, 0.02, 0.01,
                                                                              0.005},
                                    int n_nodes = 24);

struct LengthAtInfinity {
  double ell_inf = 0.0;   // the value used: Pi = min 2 pi / |kappa|
  double generic = 0.0;   // 2 pi G, when the weights are known
  double metadata = 0.0;
  bool bound_ok = false;  // ell_inf >= Pi
};
LengthAtInfinity length_at_infinity(const MetricModel& model);

struct BalanceEntry {
  std::string locus;
  double closed_form = 0.0;
  double numeric = 0.0;
};

struct BalanceLedger {
  std::string metric;
  int sign = 1;
  std::string petrov;                  // type of this side
  std::vector<BalanceEntry> fixed_points;
  BalanceEntry infinity;
  double ell_inf = 0.0;
  int orbifold_euler = 2;
  double bulk = 0.0;                   // int div Psi over the region between the surfaces
  int bulk_nodes = 0;
  double closed_sum = 0.0, closed_scale = 0.0, closed_imbalance = 0.0;   // relative
  double numeric_sum = 0.0, numeric_scale = 0.0, numeric_imbalance = 0.0; // |sum - bulk| / scale
  double tolerance = 1e-5;
  bool applicable = true;
  std::string reason;
  bool pass = false;
};

BalanceLedger global_balance(const MetricModel& model, int sign, int n_nodes = 32);

}  // namespace alf
