#include "alf/concomitants.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace alf {

namespace {

constexpr double kPi = std::numbers::pi;

struct FirstOrder {
  double lambda = 0;
  std::array<double, 4> dlambda{};
  std::array<double, 4> twist{};
};

FirstOrder first_order(const MetricModel& model, const Point& p) {
  CurvatureBundle b = connection_only(model.metric, p, 1, model.orientation);
  TensorValue xi_up = model.killing_jet(1);
  TensorValue xi = lower_index(xi_up, 0, b);
  TensorValue D = covariant_derivative(xi, b);  // [b][a] = nabla_a xi_b
  FirstOrder f;
  JetScalar lam = full_contraction(xi, xi_up, b);
  f.lambda = lam.value();
  for (int a = 0; a < 4; ++a) f.dlambda[a] = lam.gradient(a);
  // F^cd with F_cd = D[d][c]
  double Fup[16];
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 4; ++d) {
      double s = 0;
      for (int e = 0; e < 4; ++e)
        for (int h = 0; h < 4; ++h)
          s += b.ginv[ix(c, e)].value() * b.ginv[ix(d, h)].value() * D[ix(h, e)].value();
      Fup[ix(c, d)] = s;
    }
  for (int i = 0; i < 256; ++i) {
    double e = b.eps[i].value();
    if (e == 0.0) continue;
    int a = i / 64, bb = (i / 16) % 4, c = (i / 4) % 4, d = i % 4;
    f.twist[a] += e * xi_up[bb].value() * Fup[ix(c, d)];
  }
  return f;
}

// radial component (per unit r) of the twist one-form at (r, theta)
double twist_r(const MetricModel& model, double r, double theta) {
  double x = model.x_of_r(r);
  FirstOrder f = first_order(model, {0.0, x, theta, 0.0});
  return f.twist[kX] / (2.0 * x);
}

// composite Gauss-Kronrod on equal panels, doubling the panel count until the
// summed error estimate drops below 1e-11 * max(1, L1); the absolute floor keeps
// integrands that vanish up to roundoff from refining forever
template <class F>
double panel_integral(F&& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  double prev = 0.0;
  for (int panels = 1; panels <= 256; panels *= 2) {
    double h = (b - a) / panels, sum = 0.0, err = 0.0, l1 = 0.0;
    for (int i = 0; i < panels; ++i) {
      double e = 0.0, n = 0.0;
      sum += gauss_kronrod<double, 31>::integrate(f, a + i * h, a + (i + 1) * h, 0, 0.0, &e, &n);
      err += e;
      l1 += n;
    }
    if (err <= 1e-11 * std::max(1.0, l1)) return sum;
    prev = sum;
  }
  return prev;
}

double radial_twist_from_infinity(const MetricModel& model, double r_p, double theta) {
  auto integrand = [&](double u) {
    if (u <= 0.0) u = 1e-300;
    return twist_r(model, 1.0 / u, theta) / (u * u);
  };
  // omega(r_p) = -int_{r_p}^inf omega_r dr, compactified with u = 1/r
  return -panel_integral(integrand, 0.0, 1.0 / r_p);
}

}  // namespace

double twist_potential(const MetricModel& model, const Point& p) {
  if (model.hypersurface_orthogonal) return 0.0;
  double r_p = model.r_of_x(p[kX]);
  double base = radial_twist_from_infinity(model, r_p, kPi / 2);
  if (p[kTheta] == kPi / 2) return base;
  auto leg = [&](double th) {
    FirstOrder f = first_order(model, {0.0, p[kX], th, 0.0});
    return f.twist[kTheta];
  };
  return base + panel_integral(leg, kPi / 2, p[kTheta]);
}

double twist_potential_alt(const MetricModel& model, const Point& p) {
  if (model.hypersurface_orthogonal) return 0.0;
  return radial_twist_from_infinity(model, model.r_of_x(p[kX]), p[kTheta]);
}

std::array<std::array<double, 4>, 2> sigma_at(const MetricModel& model, const Point& p) {
  FirstOrder f = first_order(model, p);
  std::array<std::array<double, 4>, 2> s{};
  for (int a = 0; a < 4; ++a) {
    s[0][a] = f.dlambda[a] + f.twist[a];
    s[1][a] = f.dlambda[a] - f.twist[a];
  }
  return s;
}

ErnstCalibration ernst_calibrate(const MetricModel& model, int sign) {
  ErnstCalibration cal;
  cal.sign = sign;
  int si = side_index(sign);
  double u0 = 1.0 / (1000.0 * model.scale);
  cal.r_fit = 1.0 / u0;
  std::vector<double> us, qs;
  double lscale = 0.0;  // |d lambda / dr| r^2, sets the noise floor
  for (int k = 0; k < 5; ++k) {
    double u = u0 / (1 << k);
    double r = 1.0 / u;
    auto s = sigma_at(model, {0.0, model.x_of_r(r), kPi / 2, 0.0});
    double sr = s[si][kX] / (2.0 * model.x_of_r(r));
    double lr = 0.5 * (s[0][kX] + s[1][kX]) / (2.0 * model.x_of_r(r));
    lscale = std::max(lscale, std::abs(lr) / (u * u));
    us.push_back(u);
    qs.push_back(sr / (u * u));
  }
  // Neville to u = 0
  std::vector<double> y = qs;
  int n = static_cast<int>(us.size());
  double last = 0.0;
  for (int k = 1; k < n; ++k)
    for (int i = n - 1; i >= k; --i) {
      double nv = (us[i] * y[i - 1] - us[i - k] * y[i]) / (us[i] - us[i - k]);
      if (i == n - 1) last = nv - y[i];
      y[i] = nv;
    }
  double q0 = y[n - 1];
  cal.b = -q0;
  double qscale = 0.0;
  for (double q : qs) qscale = std::max(qscale, std::abs(q));
  if (model.flat || qscale < 1e-9 * lscale) {
    cal.constant = true;
    cal.b = 0.0;
    cal.fit_residual = qscale;
    return cal;
  }
  cal.fit_residual = std::abs(last) / std::abs(q0);
  if (cal.fit_residual > 1e-6) {
    std::ostringstream os;
    os << model.name << ": Ernst tail fit residual " << cal.fit_residual << " above tolerance";
    throw CalibrationError(os.str());
  }
  double d0 = std::abs(qs[0] - q0), d1 = std::abs(qs[1] - q0);
  if (d0 <= 1e-10 * std::abs(q0) || d1 <= 1e-10 * std::abs(q0))
    cal.tail_exponent = std::numeric_limits<double>::infinity();
  else
    cal.tail_exponent = std::log(d0 / d1) / std::log(2.0);
  return cal;
}

JetScalar integrate_gradient(double value, const TensorValue& grad, int order) {
  const auto& t = MonomialTable::instance();
  JetScalar r(value, order);
  for (int i = 1; i < t.count(order); ++i) {
    MultiIndex a = t.exponent(i);
    int mu = 0;
    while (a[mu] == 0) ++mu;
    int am = a[mu];
    a[mu]--;
    r[i] = grad[mu].coeff(a) / am;
  }
  return r;
}

Concomitants concomitants_at(const MetricModel& model, const Point& point, int order,
                             const std::array<ErnstCalibration, 2>& cal, double floor_scale) {
  if (order < 2) throw std::invalid_argument("concomitants need jet order >= 2");
  Concomitants c;
  c.order = order;
  c.point = point;
  c.bundle = curvature(model.metric, point, order, model.orientation);
  const CurvatureBundle& b = c.bundle;
  c.xi_up = model.killing_jet(order);
  c.xi = lower_index(c.xi_up, 0, b);
  c.lambda = full_contraction(c.xi, c.xi_up, b);
  if (!(c.lambda.value() > 0.0)) {
    std::ostringstream os;
    os << "fixed point: lambda = " << c.lambda.value() << " at (" << point[0] << ", " << point[1]
       << ", " << point[2] << ", " << point[3] << ")";
    throw FixedPointError(os.str());
  }
  TensorValue D = covariant_derivative(c.xi, b);
  c.F = TensorValue("dd", D.order(), b.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int d = 0; d < 4; ++d) c.F[ix(a, d)] = D[ix(d, a)];
  // exact antisymmetry
  for (int a = 0; a < 4; ++a)
    for (int d = a; d < 4; ++d) {
      JetScalar v = 0.5 * (c.F[ix(a, d)] - c.F[ix(d, a)]);
      c.F[ix(a, d)] = v;
      c.F[ix(d, a)] = -v;
    }
  TensorValue Fup = raise_index(raise_index(c.F, 0, b), 1, b);
  int fo = c.F.order();
  c.mu = 0.5 * full_contraction(c.F, Fup, b);
  c.nu = JetScalar(0.0, fo);
  c.twist1 = TensorValue("d", fo, b.chart_id);
  for (int i = 0; i < 256; ++i) {
    int s = permutation_sign(i / 64, (i / 16) % 4, (i / 4) % 4, i % 4);
    if (!s) continue;
    int a = i / 64, bb = (i / 16) % 4, cc = (i / 4) % 4, d = i % 4;
    fma_into(c.nu, 0.25 * b.eps[i], Fup[ix(a, bb)] * Fup[ix(cc, d)]);
    fma_into(c.twist1[a], b.eps[i] * c.xi_up[bb], Fup[ix(cc, d)]);
  }
  // nu uses the covariant eps with both F raised
  double w0 = twist_potential(model, point);
  c.twist = integrate_gradient(w0, c.twist1, order);
  for (int si = 0; si < 2; ++si) {
    int sg = side_sign(si);
    c.Fs[si] = sd_project(c.F, b, sg);
    TensorValue Fsu = raise_index(raise_index(c.Fs[si], 0, b), 1, b);
    c.F2[si] = full_contraction(c.Fs[si], Fsu, b);
    c.sigma[si] = TensorValue("d", fo, b.chart_id);
    for (int a = 0; a < 4; ++a) {
      JetScalar s(0.0, fo);
      for (int d = 0; d < 4; ++d) fma_into(s, c.Fs[si][ix(a, d)], c.xi_up[d]);
      c.sigma[si][a] = 2.0 * s;
    }
    c.E[si] = sg > 0 ? c.lambda + c.twist : c.lambda - c.twist;
  }
  // currents
  TensorValue sp = raise_index(c.sigma[0], 0, b), sm = raise_index(c.sigma[1], 0, b);
  JetScalar il2 = inverse(c.lambda * c.lambda).truncated(fo);
  const JetScalar& Ep = c.E[0];
  const JetScalar& Em = c.E[1];
  c.JT = TensorValue("u", fo, b.chart_id);
  c.JD = TensorValue("u", fo, b.chart_id);
  c.JE = TensorValue("u", fo, b.chart_id);
  for (int a = 0; a < 4; ++a) {
    c.JT[a] = 0.5 * (sm[a] - sp[a]) * il2;
    c.JD[a] = 0.5 * (Ep * sm[a] + Em * sp[a]) * il2;
    c.JE[a] = 0.5 * (Ep * Ep * sm[a] - Em * Em * sp[a]) * il2;
  }
  for (int si = 0; si < 2; ++si) {
    double sg = side_sign(si);
    c.J[si] = TensorValue("u", fo, b.chart_id);
    for (int a = 0; a < 4; ++a) c.J[si][a] = sg * c.JT[a] - 2.0 * c.JD[a] + sg * c.JE[a];
  }
  // Mars-Simon layer
  double r = model.r_of_x(point[kX]);
  for (int si = 0; si < 2; ++si) {
    if (cal[si].constant) {
      c.half_flat[si] = true;
      c.ms_reason[si] = "half-flat side";
      continue;
    }
    double floor = floor_scale * cal[si].b * cal[si].b / (r * r * r * r);
    if (!(c.F2[si].value() > floor)) {
      c.ms_reason[si] = "Mars-Simon singular: (F)^2 below floor";
      continue;
    }
    JetScalar one_m = 1.0 - c.E[si];
    if (!(std::abs(one_m.value()) > 0.0)) {
      c.ms_reason[si] = "E = 1";
      continue;
    }
    c.ms_valid[si] = true;
    const TensorValue& W = c.W(si);
    const TensorValue& I = c.I(si);
    int so = W.order();
    JetScalar inv1m = inverse(one_m).truncated(so);
    JetScalar f2 = c.F2[si].truncated(so);
    c.S[si] = TensorValue("dddd", so, b.chart_id);
    for (int i = 0; i < 256; ++i) {
      int a = i / 64, bb = (i / 16) % 4, cc = (i / 4) % 4, d = i % 4;
      JetScalar t = c.Fs[si][ix(a, bb)] * c.Fs[si][ix(cc, d)] - (1.0 / 3.0) * f2 * I[i];
      c.S[si][i] = W[i] - 6.0 * t * inv1m;
    }
    TensorValue Su = raise_index(raise_index(raise_index(raise_index(c.S[si], 0, b), 1, b), 2, b), 3, b);
    c.S2[si] = full_contraction(c.S[si], Su, b);
    TensorValue Fsu = raise_index(raise_index(c.Fs[si], 0, b), 1, b);
    TensorValue Y("dd", so, b.chart_id);
    for (int e = 0; e < 4; ++e)
      for (int f = 0; f < 4; ++f) {
        JetScalar s(0.0, so);
        for (int cc = 0; cc < 4; ++cc)
          for (int d = 0; d < 4; ++d) fma_into(s, c.S[si][ix(e, f, cc, d)], Fsu[ix(cc, d)]);
        Y[ix(e, f)] = s;
      }
    c.FS2[si] = full_contraction(Y, Y, b);
    JetScalar om2 = one_m * one_m;
    c.s2[si] = c.F2[si] * inverse(om2 * om2).truncated(fo);
    JetScalar pref = ((1.0 + c.E[1 - si]) * inverse(one_m * c.lambda)).truncated(fo);
    c.Gamma[si] = TensorValue("d", fo, b.chart_id);
    for (int a = 0; a < 4; ++a) c.Gamma[si][a] = pref * c.sigma[si][a];
  }
  return c;
}

JetScalar s_power(const Concomitants& c, int side, double beta) {
  if (!c.ms_valid[side]) throw ContractViolation("Mars-Simon fields withheld: " + c.ms_reason[side]);
  return pow(c.s2[side], 0.5 * beta);
}

JetScalar potential_V(const Concomitants& c, int side, double beta) {
  if (!c.ms_valid[side]) throw ContractViolation("Mars-Simon fields withheld: " + c.ms_reason[side]);
  int so = c.S2[side].order();
  JetScalar f2 = c.F2[side].truncated(so);
  JetScalar num = f2 * c.S2[side] + (beta - 2.0) * c.FS2[side];
  return beta * c.lambda.truncated(so) * num * inverse(4.0 * f2 * f2);
}

TensorValue psi_field(const Concomitants& c, int side, double beta) {
  JetScalar sb = s_power(c, side, beta);
  TensorValue grad = raise_index(gradient(sb, c.bundle.chart_id), 0, c.bundle);
  int o = grad.order();
  JetScalar pref =
      ((1.0 + c.E[1 - side]) * (1.0 - c.E[side]) * inverse(2.0 * c.lambda)).truncated(o);
  TensorValue psi("u", o, c.bundle.chart_id);
  for (int a = 0; a < 4; ++a) psi[a] = 0.5 * c.J[side][a].truncated(o) * sb.truncated(o) + pref * grad[a];
  return psi;
}

TensorValue p_tensor(const Concomitants& c, int side, std::array<TensorValue, 2>* parts) {
  const CurvatureBundle& b = c.bundle;
  const TensorValue& W = c.W(side);
  int o = W.order();
  TensorValue Fsu = raise_index(raise_index(c.Fs[side], 0, b), 1, b);
  TensorValue X("d", o, b.chart_id), Y("dd", o, b.chart_id);
  for (int cc = 0; cc < 4; ++cc) {
    JetScalar s(0.0, o);
    for (int e = 0; e < 4; ++e)
      for (int f = 0; f < 4; ++f)
        for (int k = 0; k < 4; ++k)
          fma_into(s, W[ix(cc, e, f, k)] * c.xi_up[e], Fsu[ix(f, k)]);
    X[cc] = s;
  }
  for (int a = 0; a < 4; ++a)
    for (int bb = 0; bb < 4; ++bb) {
      JetScalar s(0.0, o);
      for (int e = 0; e < 4; ++e)
        for (int f = 0; f < 4; ++f) fma_into(s, c.xi_up[e] * c.xi_up[f], W[ix(e, a, f, bb)]);
      Y[ix(a, bb)] = s;
    }
  TensorValue P("ddd", o, b.chart_id), P1("ddd", o, b.chart_id), P2("ddd", o, b.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int bb = 0; bb < 4; ++bb)
      for (int cc = 0; cc < 4; ++cc) {
        JetScalar gab = c.lambda * b.g[ix(a, bb)] - c.xi[a] * c.xi[bb];
        JetScalar gac = c.lambda * b.g[ix(a, cc)] - c.xi[a] * c.xi[cc];
        P1[ix(a, bb, cc)] = 0.5 * (gab * X[cc] - gac * X[bb]);
        P2[ix(a, bb, cc)] =
            2.0 * (Y[ix(a, bb)] * c.sigma[side][cc] - Y[ix(a, cc)] * c.sigma[side][bb]);
        P[ix(a, bb, cc)] = P1[ix(a, bb, cc)] + P2[ix(a, bb, cc)];
      }
  if (parts) *parts = {P1, P2};
  return P;
}

QuotientScalarValues quotient_scalars(double lambda, double Ep, double Em, double mu, double nu) {
  if (!(std::abs(Ep) < 1.0) || !(std::abs(Em) < 1.0))
    throw NormalizationError("normalization violated: |E| >= 1");
  QuotientScalarValues q;
  q.w_plus = (1 - Ep) / (1 + Ep);
  q.w_minus = (1 - Em) / (1 + Em);
  q.theta = 1 - q.w_plus * q.w_minus;
  q.k4_plus = 16 * (mu + nu) / std::pow(1 + Ep, 4);
  q.k4_minus = 16 * (mu - nu) / std::pow(1 + Em, 4);
  q.theta_residual = std::abs(q.theta - 4 * lambda / ((1 + Ep) * (1 + Em)));
  q.k4_residual = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  return q;
}

QuotientScalarValues quotient_scalars(const Concomitants& c) {
  QuotientScalarValues q = quotient_scalars(c.lambda.value(), c.E[0].value(), c.E[1].value(),
                                            c.mu.value(), c.nu.value());
  for (int si = 0; si < 2; ++si) {
    if (!c.ms_valid[si]) continue;
    double w = si == 0 ? q.w_plus : q.w_minus;
    double k4 = si == 0 ? q.k4_plus : q.k4_minus;
    q.k4_residual[si] = std::abs(k4 - 4 * std::pow(w, 4) * c.s2[si].value());
  }
  return q;
}

namespace {

double norm_dddd(const TensorValue& T, const CurvatureBundle& b) {
  TensorValue Tu = raise_index(raise_index(raise_index(raise_index(T, 0, b), 1, b), 2, b), 3, b);
  double s = 0;
  for (int i = 0; i < 256; ++i) s += T[i].value() * Tu[i].value();
  return std::sqrt(std::max(s, 0.0));
}

// eigenvalues of W+- on an orthonormal basis of the (A)SD 2-forms
std::array<double, 3> weyl_eigenvalues(const CurvatureBundle& b, const TensorValue& W, int sign) {
  // Gram-Schmidt frame, orientation preserved
  Eigen::Matrix4d g;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) g(a, c) = b.g[ix(a, c)].value();
  Eigen::Matrix4d e = Eigen::Matrix4d::Zero();  // rows: frame vectors (contravariant)
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d v = Eigen::Vector4d::Unit(i);
    for (int j = 0; j < i; ++j) {
      Eigen::Vector4d u = e.row(j).transpose();
      v -= (u.transpose() * g * v)(0) * u;
    }
    v /= std::sqrt((v.transpose() * g * v)(0));
    e.row(i) = v.transpose();
  }
  double Wf[256];
  for (int i = 0; i < 256; ++i) Wf[i] = 0;
  // contract slot by slot
  double tmp[256], tmp2[256];
  for (int i = 0; i < 256; ++i) tmp[i] = W[i].value();
  for (int slot = 0; slot < 4; ++slot) {
    int p = 1;
    for (int k = 0; k < 3 - slot; ++k) p *= 4;
    for (int i = 0; i < 256; ++i) {
      int d = (i / p) % 4;
      double s = 0;
      for (int a = 0; a < 4; ++a) s += e(d, a) * tmp[i - d * p + a * p];
      tmp2[i] = s;
    }
    std::copy(tmp2, tmp2 + 256, tmp);
  }
  std::copy(tmp, tmp + 256, Wf);
  double so = sign * b.orientation;
  // basis 2-forms (e^0 ^ e^k + so * e^i ^ e^j) / sqrt2, (i,j,k) cyclic
  const int pairs[3][4] = {{0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}};
  Eigen::Matrix3d M;
  auto comp = [&](int q, int a, int c) {
    double v = 0;
    const int* pr = pairs[q];
    if (a == pr[0] && c == pr[1]) v += 1;
    if (a == pr[1] && c == pr[0]) v -= 1;
    if (a == pr[2] && c == pr[3]) v += so;
    if (a == pr[3] && c == pr[2]) v -= so;
    return v / std::sqrt(2.0);
  };
  for (int qi = 0; qi < 3; ++qi)
    for (int qj = 0; qj < 3; ++qj) {
      double s = 0;
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c) {
          double pa = comp(qi, a, c);
          if (pa == 0) continue;
          for (int d = 0; d < 4; ++d)
            for (int f = 0; f < 4; ++f) {
              double pb = comp(qj, d, f);
              if (pb == 0) continue;
              s += 0.25 * Wf[ix(a, c, d, f)] * pa * pb;
            }
        }
      M(qi, qj) = s;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (M + M.transpose()));
  auto ev = es.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

}  // namespace

PetrovSide petrov_classify(const MetricModel& model, const std::vector<Point>& points, int sign) {
  PetrovSide ps;
  int si = side_index(sign);
  std::array<ErnstCalibration, 2> cal{ernst_calibrate(model, 1), ernst_calibrate(model, -1)};
  std::vector<double> s2vals;
  bool all_half_flat = true, weyl_zero = true;
  for (const auto& p : points) {
    Concomitants c = concomitants_at(model, p, 2, cal);
    double wn = norm_dddd(c.bundle.weyl, c.bundle);
    double wsn = norm_dddd(c.W(si), c.bundle);
    double riem_scale = std::max(c.bundle.christoffel.max_abs(), 1e-300);
    riem_scale *= riem_scale;
    if (wn > 1e-9 * riem_scale) weyl_zero = false;
    double ratio = wn > 0 ? wsn / wn : 0.0;
    ps.max_w_ratio = std::max(ps.max_w_ratio, ratio);
    if (ratio > 1e-8) all_half_flat = false;
    if (!c.ms_valid[si]) continue;
    ++ps.n_points;
    ps.max_s_ratio = std::max(ps.max_s_ratio, std::sqrt(std::max(c.S2[si].value(), 0.0)) / wsn);
    s2vals.push_back(c.s2[si].value());
    auto ev = weyl_eigenvalues(c.bundle, c.W(si), sign);
    double mx = std::max({std::abs(ev[0]), std::abs(ev[1]), std::abs(ev[2])});
    double gap = std::min(std::abs(ev[1] - ev[0]), std::abs(ev[2] - ev[1])) / mx;
    ps.max_eig_split = std::max(ps.max_eig_split, gap);
  }
  if (weyl_zero) {
    ps.type = "flat";
    return ps;
  }
  if (all_half_flat) {
    ps.type = "half-flat";
    return ps;
  }
  if (ps.n_points < 20) {
    std::ostringstream os;
    os << model.name << ": only " << ps.n_points << " valid points for classification";
    throw ExtractionError(os.str());
  }
  double mean = 0, var = 0;
  for (double v : s2vals) mean += v;
  mean /= s2vals.size();
  for (double v : s2vals) var += (v - mean) * (v - mean);
  var /= s2vals.size();
  ps.s2_mean = mean;
  ps.s2_rel_std = std::sqrt(var) / std::abs(mean);
  bool a = ps.max_s_ratio < 1e-7;
  bool bcrit = ps.s2_rel_std < 1e-6;
  bool ccrit = ps.max_eig_split < 1e-6;
  if (a && bcrit && ccrit)
    ps.type = "D";
  else if (!a && !bcrit && !ccrit)
    ps.type = "general";
  else {
    ps.type = "inconsistent";
    ps.diagnostics.push_back("S-criterion " + std::string(a ? "special" : "general"));
    ps.diagnostics.push_back("s2-constancy " + std::string(bcrit ? "special" : "general"));
    ps.diagnostics.push_back("eigenvalue degeneracy " + std::string(ccrit ? "special" : "general"));
  }
  return ps;
}

PetrovReport petrov_report(const MetricModel& model, int n_points, std::uint64_t seed) {
  auto pts = sample_points(model, n_points, seed, 0.05);
  PetrovReport r;
  r.plus = petrov_classify(model, pts, 1);
  r.minus = petrov_classify(model, pts, -1);
  MetricModel flipped = model;
  flipped.orientation = -model.orientation;
  r.plus_flipped = petrov_classify(flipped, pts, 1);
  r.minus_flipped = petrov_classify(flipped, pts, -1);
  return r;
}

}  // namespace alf
