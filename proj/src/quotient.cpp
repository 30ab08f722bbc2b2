#include "alf/quotient.hpp"

#include <algorithm>
#include <cmath>

namespace alf {

namespace {

double max3(double a, double b, double c) { return std::max({std::abs(a), std::abs(b), std::abs(c)}); }

// g-norm squared of a one-form, degree-0
double one_form_norm2(const TensorValue& X, const CurvatureBundle& b) {
  double s = 0;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) s += b.ginv[ix(a, c)].value() * X[a].value() * X[c].value();
  return s;
}

}  // namespace

QuotientFields quotient_bundle(const Concomitants& c) {
  const CurvatureBundle& b = c.bundle;
  QuotientFields q;
  for (int si = 0; si < 2; ++si)
    if (c.half_flat[si]) throw NormalizationError("normalization violated: half-flat side, E = 1");
  for (int si = 0; si < 2; ++si)
    if (!(std::abs(c.E[si].value()) < 1.0))
      throw NormalizationError("normalization violated: |E| >= 1");
  int go = std::min(c.lambda.order(), c.xi.order());
  q.gamma = TensorValue("dd", go, b.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d) q.gamma[ix(a, d)] = c.lambda * b.g[ix(a, d)] - c.xi[a] * c.xi[d];
  for (int a = 0; a < 4; ++a) {
    double s = 0;
    for (int d = 0; d < 4; ++d) s += q.gamma[ix(a, d)].value() * c.xi_up[d].value();
    q.gamma_xi_residual = std::max(q.gamma_xi_residual, std::abs(s));
  }
  for (int si = 0; si < 2; ++si) {
    q.w[si] = (1.0 - c.E[si]) * inverse(1.0 + c.E[si]);
    double sg = side_sign(si);
    JetScalar fpm = 16.0 * (c.mu + sg * c.nu);
    JetScalar e1 = 1.0 + c.E[si];
    JetScalar e2 = e1 * e1;
    q.k4[si] = fpm * inverse(e2 * e2);
  }
  q.theta = 1.0 - q.w[0] * q.w[1];
  TensorValue dwp = gradient(q.w[0], b.chart_id), dwm = gradient(q.w[1], b.chart_id);
  q.A = TensorValue("d", dwp.order(), b.chart_id);
  double axi = 0;
  for (int a = 0; a < 4; ++a) {
    q.A[a] = 0.5 * (q.w[0] * dwm[a] - q.w[1] * dwp[a]);
    axi += q.A[a].value() * c.xi_up[a].value();
    q.A_norm = std::max(q.A_norm, std::abs(q.A[a].value()));
  }
  q.A_xi_residual = std::abs(axi);
  for (int si = 0; si < 2; ++si) {
    if (!c.ms_valid[si]) continue;
    q.has_p[si] = true;
    std::array<TensorValue, 2> parts;
    q.P[si] = p_tensor(c, si, &parts);
    q.p_scale[si] = 0.0;
    for (const auto& part : parts) {
      TensorValue pu = raise_index(raise_index(raise_index(part, 0, b), 1, b), 2, b);
      q.p_scale[si] += std::sqrt(std::max(full_contraction(part, pu, b).value(), 0.0));
    }
  }
  return q;
}

namespace {

DivergenceTerms quotient_div_terms(const Concomitants& c, const TensorValue& X) {
  const CurvatureBundle& b = c.bundle;
  int o = X.order();
  JetScalar G[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      G[i][j] = (c.lambda * b.g[ix(i + 1, j + 1)] - c.xi[i + 1] * c.xi[j + 1]).truncated(o);
  JetScalar cof[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      cof[i][j] = G[(i + 1) % 3][(j + 1) % 3] * G[(i + 2) % 3][(j + 2) % 3] -
                  G[(i + 1) % 3][(j + 2) % 3] * G[(i + 2) % 3][(j + 1) % 3];
  JetScalar det = G[0][0] * cof[0][0] + G[0][1] * cof[0][1] + G[0][2] * cof[0][2];
  if (!(det.value() > 0.0)) throw DegenerateMetric("quotient metric block not positive definite");
  JetScalar idet = inverse(det);
  TensorValue Q("u", o, b.chart_id);
  Q[0] = JetScalar(0.0, o);
  for (int i = 0; i < 3; ++i) {
    Q[i + 1] = JetScalar(0.0, o);
    for (int j = 0; j < 3; ++j) fma_into(Q[i + 1], cof[j][i] * idet, X[j + 1]);
  }
  return divergence_terms(Q, sqrt(det));
}

DivergenceTerms manifold_div_terms(const Concomitants& c, const TensorValue& X) {
  return divergence_terms(raise_index(X, 0, c.bundle), c.bundle.sqrt_det);
}

}  // namespace

DivergenceTerms quotient_divergence_terms(const Concomitants& c, const TensorValue& one_form) {
  return quotient_div_terms(c, one_form);
}

JetScalar quotient_divergence(const Concomitants& c, const TensorValue& one_form) {
  return quotient_div_terms(c, one_form).div;
}

Residual dictionary_check(const Concomitants& c, const TensorValue& one_form) {
  DivergenceTerms q = quotient_div_terms(c, one_form);
  DivergenceTerms m = manifold_div_terms(c, one_form);
  double lam = c.lambda.value();
  return {std::abs(lam * q.div.value() - m.div.value()),
          std::max({lam * q.scale, m.scale, std::abs(m.div.value())})};
}

double dictionary_residual(const Concomitants& c, const TensorValue& one_form) {
  return dictionary_check(c, one_form).rel();
}

double twist_divergence_residual(const Concomitants& c) { return twist_divergence_check(c).rel(); }

Residual twist_divergence_check(const Concomitants& c) {
  const TensorValue& om = c.twist1;
  int o = om.order();
  JetScalar il2 = inverse(c.lambda * c.lambda).truncated(o);
  TensorValue X("d", o, c.bundle.chart_id);
  for (int a = 0; a < 4; ++a) X[a] = il2 * om[a];
  DivergenceTerms t = quotient_div_terms(c, X);
  return {std::abs(t.div.value()), t.scale};
}

namespace {

struct ValueScale {
  double value = 0.0, scale = 0.0;
};

// gamma-norm of a horizontal 2-tensor: lambda^{-1} times its g-norm
double quotient_norm2(const double T[4][4], const CurvatureBundle& b, double lam) {
  double s = 0;
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d)
      for (int e = 0; e < 4; ++e)
        for (int f = 0; f < 4; ++f)
          s += b.ginv[ix(a, e)].value() * b.ginv[ix(d, f)].value() * T[a][d] * T[e][f];
  return s / (lam * lam);
}

// RHS of the alpha = 3 identity written through the trace-free quotient Hessian of w;
// scale uses the Hessian and the gradient-product pieces of B separately
ValueScale b_squared_form(const Concomitants& c, const QuotientFields& q, int si) {
  const CurvatureBundle& b = c.bundle;
  const JetScalar& w = q.w[si];
  double wv = w.value(), wo = q.w[1 - si].value(), th = q.theta.value();
  double lam = c.lambda.value();
  TensorValue gw = gradient(w, b.chart_id);
  TensorValue H = covariant_derivative(gw, b);  // [b][a] = nabla_a nabla_b w
  double xi[4], xiu[4], dw[4], phi[4];
  for (int a = 0; a < 4; ++a) {
    xi[a] = c.xi[a].value();
    xiu[a] = c.xi_up[a].value();
    dw[a] = gw[a].value();
    phi[a] = c.lambda.gradient(a) / (2.0 * lam);
  }
  double Pi[4][4];
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d) Pi[a][d] = (a == d ? 1.0 : 0.0) - xi[a] * xiu[d] / lam;
  double phidw = 0;
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d) phidw += b.ginv[ix(a, d)].value() * phi[a] * dw[d];
  double T[4][4], Hq[4][4], DD[4][4];
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d) {
      double h = 0;
      for (int e = 0; e < 4; ++e)
        for (int f = 0; f < 4; ++f) h += Pi[a][e] * Pi[d][f] * H[ix(f, e)].value();
      double hq = q.gamma[ix(a, d)].value() / lam;
      h += -phi[a] * dw[d] - dw[a] * phi[d] + hq * phidw;
      Hq[a][d] = h;
      DD[a][d] = (3.0 / wv + wo / th) * dw[a] * dw[d];
      T[a][d] = h - DD[a][d];
    }
  double tr = 0;
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d) tr += b.ginv[ix(a, d)].value() * T[a][d];
  tr /= lam;
  double B[4][4];
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d)
      B[a][d] = 4.0 / (th * th) * (T[a][d] - tr / 3.0 * q.gamma[ix(a, d)].value());
  double pref = th * th * th / (8.0 * wv * wv * wv);
  double piece = 4.0 / (th * th) *
                 (std::sqrt(quotient_norm2(Hq, b, lam)) + std::sqrt(quotient_norm2(DD, b, lam)));
  return {pref * quotient_norm2(B, b, lam), std::abs(pref) * piece * piece};
}

}  // namespace

DdkwSample ddkw_at(const Concomitants& c, const QuotientFields& q, int si, double al,
                   bool with_b2) {
  const CurvatureBundle& b = c.bundle;
  double sg = side_sign(si);
  double lam = c.lambda.value();
  const JetScalar& w = q.w[si];
  JetScalar k = pow(q.k4[si], 0.25);
  JetScalar ith = inverse(q.theta);
  double wv = w.value(), kv = k.value(), th = q.theta.value();
  const TensorValue& P = q.P[si];
  TensorValue Pu = raise_index(raise_index(raise_index(P, 0, b), 1, b), 2, b);
  double p2 = full_contraction(P, Pu, b).value();
  double ep = 1.0 + c.E[si].value(), eo = 1.0 + c.E[1 - si].value();
  double cfac = std::pow(eo, 4) / (64.0 * std::pow(lam, 4) * std::pow(ep, 4)) / std::pow(lam, 3);
  double c2 = cfac * p2;
  double c2_scale = cfac * q.p_scale[si] * q.p_scale[si];
  TensorValue dk = gradient(k, b.chart_id), dw = gradient(w, b.chart_id);
  TensorValue G("d", dk.order(), b.chart_id), Gw("d", dk.order(), b.chart_id);
  for (int a = 0; a < 4; ++a) {
    Gw[a] = (k * inverse(w)) * dw[a];
    G[a] = dk[a] - Gw[a];
  }
  double g2 = one_form_norm2(G, b) / lam;
  double g2_piece = std::sqrt(one_form_norm2(dk, b) / lam) + std::sqrt(one_form_norm2(Gw, b) / lam);
  g2_piece *= g2_piece;

  DdkwSample s;
  s.point = c.point;
  s.alpha = al;
  JetScalar f = pow(k, al + 1.0) * pow(w, -al);
  TensorValue df = gradient(f, b.chart_id);
  TensorValue X("d", df.order(), b.chart_id);
  for (int a = 0; a < 4; ++a) X[a] = ith * (df[a] - 2.0 * sg * ith * q.A[a] * f);
  DivergenceTerms lt = quotient_div_terms(c, X);
  s.lhs = lt.div.value();
  s.dict = dictionary_check(c, X);
  s.dict_rel = s.dict.rel();
  double gpref = al * (al + 1.0) * std::pow(kv, al - 1.0) / (th * std::pow(wv, al));
  double cpref = (al + 1.0) / 16.0 * std::pow(kv, al - 7.0) / std::pow(wv, al) * th * th * th;
  s.rhs_grad = gpref * g2;
  s.rhs_cotton = cpref * c2;
  double rhs = s.rhs_grad + s.rhs_cotton;
  s.ddkw = {std::abs(s.lhs - rhs),
            std::max({max3(s.lhs, s.rhs_grad, s.rhs_cotton), lt.scale, std::abs(gpref) * g2_piece,
                      std::abs(cpref) * c2_scale})};
  s.ddkw_rel = s.ddkw.rel();
  double beta = 0.5 * (al + 1.0);
  TensorValue psi = psi_field(c, si, beta);
  DivergenceTerms pt = divergence_terms(psi, b.sqrt_det);
  double fac = std::pow(2.0, beta - 1.0) / lam;
  s.lifted = fac * pt.div.value();
  s.corr = {std::abs(s.lhs - s.lifted),
            std::max({std::abs(s.lhs), std::abs(s.lifted), lt.scale, fac * pt.scale})};
  s.corr_rel = s.corr.rel();
  // the fields themselves: g^{ab} X_b = 2^{beta-1} Psi^a
  TensorValue U = raise_index(X, 0, b);
  for (int a = 0; a < 4; ++a) {
    double lifted_a = std::pow(2.0, beta - 1.0) * psi[a].value();
    s.field.scale = std::max({s.field.scale, std::abs(U[a].value()), std::abs(lifted_a)});
    s.field.abs = std::max(s.field.abs, std::abs(U[a].value() - lifted_a));
  }
  s.field_rel = s.field.rel();
  if (with_b2) {
    ValueScale target = b_squared_form(c, q, si);
    s.b2 = {std::abs(rhs - target.value),
            std::max({std::abs(target.value), target.scale, std::abs(s.rhs_grad),
                      std::abs(s.rhs_cotton), std::abs(gpref) * g2_piece,
                      std::abs(cpref) * c2_scale})};
    s.b2_rel = s.b2.rel();
  }
  return s;
}

DdkwReport ddkw_correspondence(const MetricModel& model, const std::vector<Point>& points, int sign,
                               const std::vector<double>& alphas, int order, double tolerance) {
  DdkwReport rep;
  rep.sign = sign;
  rep.alphas = alphas;
  int si = side_index(sign);
  std::array<ErnstCalibration, 2> cal{ernst_calibrate(model, 1), ernst_calibrate(model, -1)};
  bool ok = true;
  for (const auto& p : points) {
    Concomitants c = concomitants_at(model, p, order, cal);
    std::string reason;
    QuotientFields q;
    if (!c.ms_valid[si]) {
      reason = c.ms_reason[si];
    } else {
      try {
        q = quotient_bundle(c);
      } catch (const NormalizationError& e) {
        reason = e.what();
      }
    }
    for (double al : alphas) {
      if (!reason.empty()) {
        DdkwSample s;
        s.point = p;
        s.alpha = al;
        s.skipped = true;
        s.reason = reason;
        rep.samples.push_back(s);
        ++rep.n_skipped;
        continue;
      }
      DdkwSample s = ddkw_at(c, q, si, al, al == 3.0);
      rep.max_field_rel = std::max(rep.max_field_rel, s.field_rel);
      rep.max_ddkw_rel = std::max(rep.max_ddkw_rel, s.ddkw_rel);
      rep.max_corr_rel = std::max(rep.max_corr_rel, s.corr_rel);
      rep.max_dict_rel = std::max(rep.max_dict_rel, s.dict_rel);
      if (s.b2_rel >= 0) {
        rep.max_b2_rel = std::max(rep.max_b2_rel, s.b2_rel);
        if (!(s.b2_rel < tolerance)) ok = false;
      }
      if (!(s.ddkw_rel < tolerance && s.corr_rel < tolerance && s.dict_rel < tolerance &&
            s.field_rel < tolerance))
        ok = false;
      ++rep.n_evaluated;
      rep.samples.push_back(s);
    }
  }
  rep.pass = ok && rep.n_evaluated > 0;
  return rep;
}

}  // namespace alf
