#include "alf/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace alf {

namespace {

int power4(int n) {
  int p = 1;
  for (int i = 0; i < n; ++i) p *= 4;
  return p;
}

// digit k (0 = leading slot) of a flat component index
int digit(int flat, int rank, int k) { return (flat / power4(rank - 1 - k)) % 4; }

int with_digit(int flat, int rank, int k, int v) {
  int p = power4(rank - 1 - k);
  return flat - ((flat / p) % 4) * p + v * p;
}

void check_chart(const TensorValue& t, const CurvatureBundle& b) {
  if (!t.chart_id.empty() && !b.chart_id.empty() && t.chart_id != b.chart_id)
    throw ContractViolation("chart mismatch: " + t.chart_id + " vs " + b.chart_id);
}

// Gauss-Jordan inverse of a symmetric positive-definite jet matrix; returns det
JetScalar invert(const TensorValue& g, TensorValue& inv, double det_tol) {
  int K = g.order();
  std::array<std::array<JetScalar, 8>, 4> m;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 8; ++c)
      m[a][c] = c < 4 ? g[ix(a, c)] : JetScalar(c - 4 == a ? 1.0 : 0.0, K);
  double diag = 1.0;
  for (int a = 0; a < 4; ++a) diag *= std::max(std::abs(g[ix(a, a)].value()), 1e-300);
  JetScalar det(1.0, K);
  for (int p = 0; p < 4; ++p) {
    double pv = m[p][p].value();
    if (!std::isfinite(pv) || pv <= det_tol * std::pow(diag, 0.25)) {
      std::ostringstream os;
      os << "degenerate metric: pivot " << p << " = " << pv;
      throw DegenerateMetric(os.str());
    }
    det *= m[p][p];
    JetScalar ip = inverse(m[p][p]);
    for (int c = 0; c < 8; ++c) m[p][c] *= ip;
    for (int r = 0; r < 4; ++r) {
      if (r == p) continue;
      JetScalar f = m[r][p];
      if (f.value() == 0.0 && std::all_of(f.coeffs().begin(), f.coeffs().end(),
                                          [](double v) { return v == 0.0; }))
        continue;
      for (int c = 0; c < 8; ++c) m[r][c] -= f * m[p][c];
    }
  }
  if (!(det.value() > det_tol * diag)) throw DegenerateMetric("degenerate metric: det g ~ 0");
  inv = TensorValue("uu", K, g.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) inv[ix(a, c)] = m[a][c + 4];
  return det;
}

}  // namespace

CurvatureBundle connection_only(const MetricFn& metric_fn, const std::array<double, kDim>& point,
                                int order, int orientation, double det_tol) {
  if (order < 1) throw std::invalid_argument("jet order must be at least 1");
  CurvatureBundle b;
  b.order = order;
  b.orientation = orientation >= 0 ? 1 : -1;
  auto x = jet_lift(point, order);
  b.g = metric_fn(x);
  if (b.g.slots != "dd") throw ContractViolation("metric must have slots dd");
  b.chart_id = b.g.chart_id;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c)
      if (!std::isfinite(b.g[ix(a, c)].value())) throw DegenerateMetric("non-finite metric");
  JetScalar det = invert(b.g, b.ginv, det_tol);
  b.sqrt_det = sqrt(det);

  std::array<JetScalar, 64> dg;  // d_c g_ab at [ix(a,b,c)]
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c)
      for (int e = 0; e < 4; ++e) dg[ix(a, c, e)] = b.g[ix(a, c)].d(e);
  b.christoffel = TensorValue("udd", order - 1, b.chart_id);
  for (int bb = 0; bb < 4; ++bb)
    for (int c = bb; c < 4; ++c) {
      std::array<JetScalar, 4> lower;
      for (int d = 0; d < 4; ++d)
        lower[d] = 0.5 * (dg[ix(d, c, bb)] + dg[ix(d, bb, c)] - dg[ix(bb, c, d)]);
      for (int a = 0; a < 4; ++a) {
        JetScalar s(0.0, order - 1);
        for (int d = 0; d < 4; ++d) fma_into(s, b.ginv[ix(a, d)], lower[d]);
        b.christoffel[ix(a, bb, c)] = s;
        b.christoffel[ix(a, c, bb)] = s;
      }
    }

  b.eps = TensorValue("dddd", order, b.chart_id);
  b.eps_up = TensorValue("uuuu", order, b.chart_id);
  JetScalar inv_sd = inverse(b.sqrt_det);
  for (int i = 0; i < 256; ++i) {
    int s = permutation_sign(i / 64, (i / 16) % 4, (i / 4) % 4, i % 4);
    if (s == 0) continue;
    b.eps[i] = (s * b.orientation) * b.sqrt_det;
    b.eps_up[i] = (s * b.orientation) * inv_sd;
  }
  b.proj_sd = TensorValue("dddd", order, b.chart_id);
  b.proj_asd = TensorValue("dddd", order, b.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c)
      for (int d = 0; d < 4; ++d)
        for (int e = 0; e < 4; ++e) {
          JetScalar sym = b.g[ix(a, d)] * b.g[ix(c, e)] - b.g[ix(a, e)] * b.g[ix(c, d)];
          int i = ix(a, c, d, e);
          b.proj_sd[i] = 0.25 * (sym + b.eps[i]);
          b.proj_asd[i] = 0.25 * (sym - b.eps[i]);
        }
  return b;
}

CurvatureBundle curvature(const MetricFn& metric_fn, const std::array<double, kDim>& point,
                          int order, int orientation, double det_tol) {
  if (order < 2) throw std::invalid_argument("curvature needs jet order >= 2");
  CurvatureBundle b = connection_only(metric_fn, point, order, orientation, det_tol);
  const auto& G = b.christoffel;
  int ro = order - 2;

  // R_{mu nu rho}^sigma
  TensorValue rup("dddu", ro, b.chart_id);
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = mu + 1; nu < 4; ++nu)
      for (int rho = 0; rho < 4; ++rho)
        for (int sg = 0; sg < 4; ++sg) {
          JetScalar r = G[ix(sg, mu, rho)].d(nu) - G[ix(sg, nu, rho)].d(mu);
          for (int al = 0; al < 4; ++al) {
            fma_into(r, G[ix(al, mu, rho)], G[ix(sg, al, nu)]);
            fma_into(r, -G[ix(al, nu, rho)], G[ix(sg, al, mu)]);
          }
          rup[ix(mu, nu, rho, sg)] = r;
          rup[ix(nu, mu, rho, sg)] = -r;
        }
  b.riemann = TensorValue("dddd", ro, b.chart_id);
  for (int i = 0; i < 256; i += 4)
    for (int d = 0; d < 4; ++d) {
      JetScalar s(0.0, ro);
      for (int e = 0; e < 4; ++e) fma_into(s, rup[i + e], b.g[ix(e, d)]);
      b.riemann[i + d] = s;
    }
  b.ricci = TensorValue("dd", ro, b.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) {
      JetScalar s(0.0, ro);
      for (int bb = 0; bb < 4; ++bb) s += rup[ix(a, bb, c, bb)];
      b.ricci[ix(a, c)] = s;
    }
  b.scalar = JetScalar(0.0, ro);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) fma_into(b.scalar, b.ginv[ix(a, c)], b.ricci[ix(a, c)]);

  const auto& g = b.g;
  const auto& R = b.ricci;
  b.weyl = TensorValue("dddd", ro, b.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int bb = 0; bb < 4; ++bb)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          JetScalar w = b.riemann[ix(a, bb, c, d)];
          w -= 0.5 * (g[ix(a, c)] * R[ix(bb, d)] - g[ix(a, d)] * R[ix(bb, c)] -
                      g[ix(bb, c)] * R[ix(a, d)] + g[ix(bb, d)] * R[ix(a, c)]);
          w += (b.scalar / 6.0) * (g[ix(a, c)] * g[ix(bb, d)] - g[ix(a, d)] * g[ix(bb, c)]);
          b.weyl[ix(a, bb, c, d)] = w;
        }

  // W_ab^ef, then the duality on the second pair
  TensorValue wup = raise_index(raise_index(b.weyl, 2, b), 3, b);
  b.weyl_sd = TensorValue("dddd", ro, b.chart_id);
  b.weyl_asd = TensorValue("dddd", ro, b.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int bb = 0; bb < 4; ++bb)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          JetScalar dual(0.0, ro);
          for (int e = 0; e < 4; ++e)
            for (int f = e + 1; f < 4; ++f) {
              if (!permutation_sign(c, d, e, f)) continue;
              fma_into(dual, b.eps[ix(c, d, e, f)], wup[ix(a, bb, e, f)]);
            }
          int i = ix(a, bb, c, d);
          b.weyl_sd[i] = b.weyl[i] + dual;
          b.weyl_asd[i] = b.weyl[i] - dual;
        }
  return b;
}

TensorValue sd_project(const TensorValue& F, const CurvatureBundle& b, int sign) {
  if (F.slots != "dd") throw ContractViolation("sd_project expects a covariant two-form");
  check_chart(F, b);
  double scale = std::max(F.max_abs(), 1e-300);
  for (int a = 0; a < 4; ++a)
    for (int c = a; c < 4; ++c) {
      JetScalar s = F[ix(a, c)] + F[ix(c, a)];
      for (double v : s.coeffs())
        if (std::abs(v) > 1e-12 * std::max(scale, 1.0))
          throw ContractViolation("sd_project input is not antisymmetric");
    }
  TensorValue Fup = raise_index(raise_index(F, 0, b), 1, b);
  int ord = std::min(F.order(), b.order);
  TensorValue X("dd", ord, b.chart_id);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) {
      JetScalar dual(0.0, ord);
      for (int e = 0; e < 4; ++e)
        for (int f = e + 1; f < 4; ++f) {
          if (!permutation_sign(a, c, e, f)) continue;
          fma_into(dual, b.eps[ix(a, c, e, f)], Fup[ix(e, f)]);
        }
      X[ix(a, c)] = F[ix(a, c)] + (sign > 0 ? dual : -dual);
    }
  return X;
}

namespace {

TensorValue move_index(const TensorValue& t, int slot, const TensorValue& metric, char from,
                       char to) {
  if (slot < 0 || slot >= t.rank() || t.slots[slot] != from)
    throw ContractViolation("index slot has the wrong valence");
  int ord = std::min(t.order(), metric.order());
  TensorValue r(t.slots, ord, t.chart_id);
  r.slots[slot] = to;
  int n = static_cast<int>(t.comp.size());
  for (int i = 0; i < n; ++i) {
    int a = digit(i, t.rank(), slot);
    JetScalar s(0.0, ord);
    for (int e = 0; e < 4; ++e) fma_into(s, metric[ix(a, e)], t[with_digit(i, t.rank(), slot, e)]);
    r[i] = s;
  }
  return r;
}

}  // namespace

TensorValue raise_index(const TensorValue& t, int slot, const CurvatureBundle& b) {
  check_chart(t, b);
  return move_index(t, slot, b.ginv, 'd', 'u');
}

TensorValue lower_index(const TensorValue& t, int slot, const CurvatureBundle& b) {
  check_chart(t, b);
  return move_index(t, slot, b.g, 'u', 'd');
}

TensorValue covariant_derivative(const TensorValue& t, const CurvatureBundle& b) {
  check_chart(t, b);
  if (t.order() < 1) throw ContractViolation("covariant derivative of an order-0 jet");
  int rank = t.rank();
  int ord = std::min(t.order() - 1, b.order - 1);
  TensorValue r(t.slots + "d", ord, t.chart_id.empty() ? b.chart_id : t.chart_id);
  int n = static_cast<int>(t.comp.size());
  const auto& G = b.christoffel;
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 4; ++c) {
      JetScalar s = t[i].d(c).truncated(ord);
      for (int k = 0; k < rank; ++k) {
        int a = digit(i, rank, k);
        for (int e = 0; e < 4; ++e) {
          const JetScalar& te = t[with_digit(i, rank, k, e)];
          if (t.slots[k] == 'u')
            fma_into(s, G[ix(a, c, e)], te);
          else
            fma_into(s, -G[ix(e, c, a)], te);
        }
      }
      r[4 * i + c] = s;
    }
  return r;
}

TensorValue contract(const TensorValue& t, int i, int j, const CurvatureBundle& b) {
  check_chart(t, b);
  if (i == j || i < 0 || j < 0 || i >= t.rank() || j >= t.rank())
    throw ContractViolation("bad contraction slots");
  if (i > j) std::swap(i, j);
  TensorValue u = t;
  if (u.slots[i] == u.slots[j]) u = u.slots[i] == 'd' ? raise_index(u, i, b) : lower_index(u, i, b);
  int rank = u.rank();
  std::string slots;
  for (int k = 0; k < rank; ++k)
    if (k != i && k != j) slots += u.slots[k];
  TensorValue r(slots, u.order(), u.chart_id);
  int n = static_cast<int>(r.comp.size());
  for (int q = 0; q < n; ++q) {
    // spread the reduced index into the full one
    int full = 0, rr = 0;
    for (int k = 0; k < rank; ++k) {
      full *= 4;
      if (k == i || k == j) continue;
      full += digit(q, rank - 2, rr++);
    }
    JetScalar s(0.0, u.order());
    for (int e = 0; e < 4; ++e) s += u[with_digit(with_digit(full, rank, i, e), rank, j, e)];
    r[q] = s;
  }
  return r;
}

JetScalar full_contraction(const TensorValue& x, const TensorValue& y, const CurvatureBundle& b) {
  if (x.rank() != y.rank()) throw ContractViolation("rank mismatch in contraction");
  check_chart(x, b);
  check_chart(y, b);
  TensorValue z = y;
  for (int k = 0; k < z.rank(); ++k)
    if (z.slots[k] == x.slots[k]) z = z.slots[k] == 'd' ? raise_index(z, k, b) : lower_index(z, k, b);
  int ord = std::min(x.order(), z.order());
  JetScalar s(0.0, ord);
  for (std::size_t i = 0; i < x.comp.size(); ++i) fma_into(s, x[i], z[i]);
  return s;
}

TensorValue gradient(const JetScalar& f, const std::string& chart_id) {
  TensorValue r("d", f.order() - 1, chart_id);
  for (int a = 0; a < 4; ++a) r[a] = f.d(a);
  return r;
}

JetScalar divergence(const TensorValue& v, const CurvatureBundle& b) {
  if (v.slots != "u") throw ContractViolation("divergence expects a vector");
  check_chart(v, b);
  JetScalar s(0.0, std::min(v.order(), b.order) - 1);
  for (int a = 0; a < 4; ++a) s += (b.sqrt_det * v[a]).d(a);
  return s / b.sqrt_det.truncated(s.order());
}

DivergenceTerms divergence_terms(const TensorValue& v, const JetScalar& density) {
  if (v.slots != "u") throw ContractViolation("divergence expects a vector");
  int o = std::min(v.order(), density.order());
  JetScalar rho = density.truncated(o);
  JetScalar irho = inverse(rho);
  DivergenceTerms t;
  t.div = JetScalar(0.0, o - 1);
  double r0 = rho.value();
  for (int a = 0; a < 4; ++a) {
    t.div += (rho * v[a]).d(a) * irho;
    double piece = std::abs(v[a].value() * rho.gradient(a) / r0) + std::abs(v[a].gradient(a));
    t.scale = std::max(t.scale, piece);
  }
  return t;
}

JetScalar laplacian(const JetScalar& f, const CurvatureBundle& b) {
  TensorValue df = gradient(f, b.chart_id);
  return divergence(raise_index(df, 0, b), b);
}

}  // namespace alf
