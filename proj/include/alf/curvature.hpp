#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>

#include "alf/jet.hpp"
#include "alf/tensor.hpp"

namespace alf {

struct DegenerateMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

using ChartJets = std::array<JetScalar, kDim>;
using MetricFn = std::function<TensorValue(const ChartJets&)>;

// Riemann convention: (D_a D_b - D_b D_a) w_c = R_abc^d w_d, Ricci R_ac = R_abc^b.
struct CurvatureBundle {
  int order = 0;        // metric jet order K
  int orientation = 1;  // eps_abcd = orientation * sqrt(det g) [abcd]
  std::string chart_id;
  TensorValue g;            // dd, order K
  TensorValue ginv;         // uu, order K
  JetScalar sqrt_det;       // order K
  TensorValue christoffel;  // udd, Gamma^a_bc, order K-1
  TensorValue riemann;      // dddd, order K-2
  TensorValue ricci;        // dd
  JetScalar scalar;
  TensorValue eps;       // dddd, order K
  TensorValue eps_up;    // uuuu, order K
  TensorValue weyl;      // dddd
  TensorValue weyl_sd;   // duality on the second pair, + side
  TensorValue weyl_asd;  // - side
  TensorValue proj_sd;   // (g_ac g_bd - g_ad g_bc + eps_abcd) / 4
  TensorValue proj_asd;

  const TensorValue& weyl_side(int sign) const { return sign > 0 ? weyl_sd : weyl_asd; }
  const TensorValue& proj_side(int sign) const { return sign > 0 ? proj_sd : proj_asd; }
};

// Requires K >= 2 (Riemann at order K-2); Weyl-derivative users need K >= 3.
CurvatureBundle curvature(const MetricFn& metric_fn, const std::array<double, kDim>& point,
                          int order, int orientation = 1, double det_tol = 1e-14);

// Metric-only part of the pipeline (g, inverse, Christoffel, eps); cheap.
CurvatureBundle connection_only(const MetricFn& metric_fn, const std::array<double, kDim>& point,
                                int order, int orientation = 1, double det_tol = 1e-14);

// X = F + sign * (1/2) eps_ab^cd F_cd for a covariant antisymmetric F
TensorValue sd_project(const TensorValue& two_form, const CurvatureBundle& b, int sign);

// index gymnastics on the chart basis
TensorValue raise_index(const TensorValue& t, int slot, const CurvatureBundle& b);
TensorValue lower_index(const TensorValue& t, int slot, const CurvatureBundle& b);
// nabla T with the derivative index appended as the last (covariant) slot
TensorValue covariant_derivative(const TensorValue& t, const CurvatureBundle& b);
// contraction of slots i and j (one up, one down; or both raised via g)
TensorValue contract(const TensorValue& t, int i, int j, const CurvatureBundle& b);
// full contraction of two tensors of the same rank and opposite/equal slot types
JetScalar full_contraction(const TensorValue& x, const TensorValue& y, const CurvatureBundle& b);
// g^ab d_a f d_b f style helpers
JetScalar laplacian(const JetScalar& f, const CurvatureBundle& b);
TensorValue gradient(const JetScalar& f, const std::string& chart_id = {});
JetScalar divergence(const TensorValue& vec_up, const CurvatureBundle& b);

// (1/rho) d_a (rho V^a) for a density rho; scale is the largest product-rule piece
// |V^a d_a rho| / rho + |d_a V^a| and sets the residual floor for divergence identities
struct DivergenceTerms {
  JetScalar div;
  double scale = 0.0;
};
DivergenceTerms divergence_terms(const TensorValue& vec_up, const JetScalar& density);

}  // namespace alf
