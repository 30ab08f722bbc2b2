#pragma once

#include <array>
#include <string>
#include <vector>

#include "alf/concomitants.hpp"

namespace alf {

// Orbit-space scalars pulled back to M. Every quotient object is represented by a
// xi-orthogonal, xi-invariant field on M; norms use gamma^{-1} = lambda^{-1} g^{-1}
// per index.
struct QuotientFields {
  TensorValue gamma;               // dd: lambda g_ab - xi_a xi_b
  std::array<JetScalar, 2> w;      // (1 - E) / (1 + E)
  JetScalar theta;                 // 1 - w+ w-
  TensorValue A;                   // d: (w+ dw- - w- dw+) / 2
  std::array<JetScalar, 2> k4;     // 16 (mu +- nu) / (1 + E)^4
  std::array<bool, 2> has_p{false, false};
  std::array<TensorValue, 2> P;    // ddd, only on sides with a Mars-Simon layer
  std::array<double, 2> p_scale{0.0, 0.0};  // |first part| + |second part| of P
  double gamma_xi_residual = 0.0;  // max |gamma_ab xi^b|
  double A_xi_residual = 0.0;      // |A_a xi^a|
  double A_norm = 0.0;             // max |A_a|
};

QuotientFields quotient_bundle(const Concomitants& c);

// quotient divergence D_mu Q^mu of the quotient vector Q^mu = gamma^{mu nu} X_nu, built
// from the 3x3 (x, theta, phi) block of gamma and its determinant
JetScalar quotient_divergence(const Concomitants& c, const TensorValue& one_form);

// quotient divergence with the product-rule scale of its pieces
DivergenceTerms quotient_divergence_terms(const Concomitants& c, const TensorValue& one_form);

struct Residual {
  double abs = 0.0, scale = 0.0;
  double rel() const { return scale > 0 ? abs / scale : 0.0; }
};

// lambda D_mu Q^mu versus nabla_a (g^{ab} X_b)
Residual dictionary_check(const Concomitants& c, const TensorValue& one_form);
double dictionary_residual(const Concomitants& c, const TensorValue& one_form);

// D_mu (lambda^{-2} omega^mu) against its product-rule pieces
Residual twist_divergence_check(const Concomitants& c);
double twist_divergence_residual(const Concomitants& c);

struct DdkwSample {
  Point point{};
  double alpha = 0.0;
  bool skipped = false;
  std::string reason;
  double lhs = 0.0;        // D(Theta^{-1} Dhat f), f = k^{alpha+1} / w^alpha
  double rhs_grad = 0.0;   // alpha (alpha + 1) term
  double rhs_cotton = 0.0; // C^2 term
  double ddkw_rel = 0.0;
  double lifted = 0.0;     // 2^{beta-1} lambda^{-1} div Psi^(beta), beta = (alpha + 1) / 2
  double corr_rel = 0.0;
  double field_rel = 0.0;  // g^{ab} X_b against 2^{beta-1} Psi^a
  double dict_rel = 0.0;
  double b2_rel = -1.0;    // alpha = 3 only: RHS against Theta^3 B^2 / (8 w^3)
  Residual ddkw, corr, field, dict, b2;
};

// one point and side; c must carry the Mars-Simon layer on side si
DdkwSample ddkw_at(const Concomitants& c, const QuotientFields& q, int si, double alpha,
                   bool with_b2 = false);

struct DdkwReport {
  int sign = 1;
  std::vector<double> alphas;
  std::vector<DdkwSample> samples;
  int n_evaluated = 0, n_skipped = 0;
  double max_ddkw_rel = 0.0, max_corr_rel = 0.0, max_field_rel = 0.0, max_dict_rel = 0.0,
         max_b2_rel = 0.0;
  bool pass = false;
};

DdkwReport ddkw_correspondence(const MetricModel& model, const std::vector<Point>& points, int sign,
                               const std::vector<double>& alphas, int order = 4,
                               double tolerance = 1e-8);

}  // namespace alf
