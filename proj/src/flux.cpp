#include "alf/flux.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <sstream>

namespace alf {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes and weights on (0, 1)
template <int N>
void gl_fill(std::vector<double>& t, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& wt = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      t.push_back(0.5);
      w.push_back(0.5 * wt[i]);
      continue;
    }
    t.push_back(0.5 * (1 - a[i]));
    w.push_back(0.5 * wt[i]);
    t.push_back(0.5 * (1 + a[i]));
    w.push_back(0.5 * wt[i]);
  }
}

void gauss_legendre01(int n, std::vector<double>& t, std::vector<double>& w) {
  t.clear();
  w.clear();
  switch (n) {
    case 8: gl_fill<8>(t, w); break;
    case 16: gl_fill<16>(t, w); break;
    case 20: gl_fill<20>(t, w); break;
    case 24: gl_fill<24>(t, w); break;
    case 32: gl_fill<32>(t, w); break;
    case 48: gl_fill<48>(t, w); break;
    case 64: gl_fill<64>(t, w); break;
    default: throw MeshError("unsupported quadrature size " + std::to_string(n) +
                             " (8, 16, 20, 24, 32, 48, 64)");
  }
}

// lambda and its chart gradient at a point
struct LambdaJet {
  double value = 0.0;
  std::array<double, 4> grad{};
};

LambdaJet lambda_jet(const MetricModel& model, const Point& p) {
  auto x = jet_lift(p, 1);
  TensorValue g = model.metric(x);
  const JetScalar& gtt = g[ix(kTau, kTau)];
  double s2 = model.xi_scale * model.xi_scale;
  LambdaJet l;
  l.value = s2 * gtt.value();
  for (int a = 0; a < 4; ++a) l.grad[a] = s2 * gtt.gradient(a);
  return l;
}

std::array<double, 16> metric_values(const MetricModel& model, const Point& p) {
  auto x = jet_lift(p, 0);
  TensorValue g = model.metric(x);
  std::array<double, 16> out{};
  for (int i = 0; i < 16; ++i) out[i] = g[i].value();
  return out;
}

std::array<double, 16> inverse4(const std::array<double, 16>& g) {
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = g[ix(a, b)];
  Eigen::Matrix4d inv = m.inverse();
  std::array<double, 16> out{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out[ix(a, b)] = inv(a, b);
  return out;
}

double solve_root(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (!(flo < 0 && fhi > 0)) throw MeshError("level set root not bracketed");
  boost::uintmax_t it = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(std::abs(a), 1e-300); };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
  return 0.5 * (r.first + r.second);
}

// bracket [0, hi] with f(hi) > 0, growing hi geometrically
double bracket_hi(const std::function<double(double)>& f, double start, double limit) {
  double hi = start;
  while (f(hi) <= 0) {
    hi *= 2;
    if (hi > limit) throw MeshError("level set does not close around the fixed point");
  }
  return hi;
}

struct CurveNode {
  Point p;
  std::array<double, 2> tangent;  // (dx/dt, dtheta/dt)
};

// chart location of a fixed point and whether the whole x = 0 line is fixed
struct Locus {
  bool is_nut = true;
  int index = 0;
  double theta = 0.0;
  bool line = false;
};

Locus parse_locus(const MetricModel& model, const std::string& locus) {
  auto colon = locus.find(':');
  if (colon == std::string::npos) throw MeshError("locus must be nut:<i> or bolt:<i>");
  Locus l;
  std::string kind = locus.substr(0, colon);
  l.index = std::stoi(locus.substr(colon + 1));
  if (kind == "nut") {
    if (l.index < 0 || l.index >= static_cast<int>(model.fixed.nuts.size()))
      throw MeshError(model.name + ": no such nut " + locus);
    l.theta = model.fixed.nuts[l.index].theta;
  } else if (kind == "bolt") {
    if (l.index < 0 || l.index >= static_cast<int>(model.fixed.bolts.size()))
      throw MeshError(model.name + ": no such bolt " + locus);
    l.is_nut = false;
  } else {
    throw MeshError("unknown locus kind '" + kind + "'");
  }
  // fixed set covers x = 0 for bolts, and for nuts where the chart collapses the whole line
  double lam_mid = model.lambda_at({0.0, 0.0, kPi / 2, 0.0});
  l.line = !l.is_nut || std::abs(lam_mid) < 1e-14;
  return l;
}

LevelSurfaceMesh assemble(const MetricModel& model, const std::vector<CurveNode>& curve,
                          const std::vector<double>& wt, bool toward_fixed_point) {
  LevelSurfaceMesh m;
  const double circles = model.tau_period * 2 * kPi;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const Point& p = curve[i].p;
    auto g = metric_values(model, p);
    auto gi = inverse4(g);
    std::array<std::array<double, 4>, 3> e{};
    e[0] = {1, 0, 0, 0};
    e[1] = {0, curve[i].tangent[0], curve[i].tangent[1], 0};
    e[2] = {0, 0, 0, 1};
    Eigen::Matrix3d h;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double s = 0;
        for (int m1 = 0; m1 < 4; ++m1)
          for (int m2 = 0; m2 < 4; ++m2) s += g[ix(m1, m2)] * e[a][m1] * e[b][m2];
        h(a, b) = s;
      }
    double det = h.determinant();
    if (!(det > 0)) throw MeshError("degenerate induced metric on the level surface");
    // normal: the covector annihilating the three tangents
    std::array<double, 4> n{};
    if (toward_fixed_point) {
      LambdaJet lj = lambda_jet(model, p);
      for (int a = 0; a < 4; ++a) n[a] = -lj.grad[a];
    } else {
      n = {0, 2 * p[kX], 0, 0};  // d r
    }
    double nn = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) nn += gi[ix(a, b)] * n[a] * n[b];
    nn = std::sqrt(nn);
    for (auto& v : n) v /= nn;
    m.nodes.push_back(p);
    m.weights.push_back(circles * wt[i] * std::sqrt(det));
    m.normal.push_back(n);
  }
  for (double w : m.weights) m.area += w;
  return m;
}

}  // namespace

double level_scale(const MetricModel& model, const std::string& locus) {
  Locus l = parse_locus(model, locus);
  if (l.line) return 1.0;
  // isolated nuts on the x = 0 line: their level sets merge at the largest lambda along it
  double top = 0;
  for (int i = 1; i < 256; ++i) top = std::max(top, model.lambda_at({0.0, 0.0, kPi * i / 256, 0.0}));
  return std::min(1.0, top);
}

LevelSurfaceMesh level_surface(const MetricModel& model, const std::string& locus, double eps,
                               int n_nodes) {
  if (!(eps > 0 && eps < 1)) throw MeshError("level must lie in (0, 1)");
  Locus l = parse_locus(model, locus);
  if (!l.line && eps >= level_scale(model, locus))
    throw MeshError("level " + std::to_string(eps) + " merges the level sets of neighbouring nuts");
  std::vector<double> ts, wt;
  gauss_legendre01(n_nodes, ts, wt);
  std::vector<CurveNode> curve;
  const double xlim = 1e3 * std::sqrt(model.scale);
  if (l.line) {
    // x(theta) with lambda(x, theta) = eps; dx/dtheta from the implicit derivative
    for (double t : ts) {
      double th = kPi * t;
      auto f = [&](double x) { return model.lambda_at({0.0, x, th, 0.0}) - eps; };
      double hi = bracket_hi(f, 1e-3 * std::sqrt(model.scale), xlim);
      double x = solve_root(f, 0.0, hi);
      LambdaJet lj = lambda_jet(model, {0.0, x, th, 0.0});
      double dx = -lj.grad[kTheta] / lj.grad[kX];
      curve.push_back({{0.0, x, th, 0.0}, {kPi * dx, kPi}});
    }
  } else {
    // rays from the corner (0, theta0), scaled so that lambda is roughly isotropic
    double dir = l.theta < 1.0 ? 1.0 : -1.0;
    double h = 1e-3 * std::sqrt(model.scale);
    double ax = h / std::sqrt(model.lambda_at({0.0, h, l.theta, 0.0}));
    double at = h / std::sqrt(model.lambda_at({0.0, 0.0, l.theta + dir * h, 0.0}));
    for (double t : ts) {
      double psi = 0.5 * kPi * t;
      std::array<double, 2> ds{ax * std::cos(psi), dir * at * std::sin(psi)};
      std::array<double, 2> dpsi{-ax * std::sin(psi), dir * at * std::cos(psi)};
      auto at_s = [&](double s) { return Point{0.0, s * ds[0], l.theta + s * ds[1], 0.0}; };
      auto f = [&](double s) { return model.lambda_at(at_s(s)) - eps; };
      double hi = bracket_hi(f, 1e-3, 1e3);
      double s = solve_root(f, 0.0, hi);
      Point p = at_s(s);
      if (p[kTheta] <= 0.0 || p[kTheta] >= kPi) throw MeshError("level surface leaves the chart");
      LambdaJet lj = lambda_jet(model, p);
      double dl_ds = lj.grad[kX] * ds[0] + lj.grad[kTheta] * ds[1];
      double dl_dpsi = s * (lj.grad[kX] * dpsi[0] + lj.grad[kTheta] * dpsi[1]);
      double sp = -dl_dpsi / dl_ds;
      double half = 0.5 * kPi;
      curve.push_back({p, {half * (s * dpsi[0] + sp * ds[0]), half * (s * dpsi[1] + sp * ds[1])}});
    }
  }
  LevelSurfaceMesh m = assemble(model, curve, wt, true);
  m.locus = locus;
  m.level = eps;
  return m;
}

LevelSurfaceMesh sphere_at_radius(const MetricModel& model, double R, int n_nodes) {
  if (!(R > model.r_h)) throw MeshError("radius inside the chart boundary");
  std::vector<double> ts, wt;
  gauss_legendre01(n_nodes, ts, wt);
  double x = model.x_of_r(R);
  std::vector<CurveNode> curve;
  for (double t : ts) curve.push_back({{0.0, x, kPi * t, 0.0}, {0.0, kPi}});
  LevelSurfaceMesh m = assemble(model, curve, wt, false);
  m.locus = "infinity";
  m.level = R;
  return m;
}

double surface_flux(const LevelSurfaceMesh& mesh,
                    const std::function<std::array<double, 4>(const Point&)>& field) {
  double s = 0;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    auto v = field(mesh.nodes[i]);
    double vn = 0;
    for (int a = 0; a < 4; ++a) vn += v[a] * mesh.normal[i][a];
    s += mesh.weights[i] * vn;
  }
  return s;
}

double richardson_sqrt(double eps1, double v1, double eps2, double v2) {
  double a = std::sqrt(eps1), b = std::sqrt(eps2);
  return (a * v2 - b * v1) / (a - b);
}

namespace {

std::array<double, 4> raise_values(const MetricModel& model, const Point& p,
                                   const std::array<double, 4>& low) {
  auto gi = inverse4(metric_values(model, p));
  std::array<double, 4> up{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) up[a] += gi[ix(a, b)] * low[b];
  return up;
}

void finish_fixed(FluxSeries& s, double scale_floor) {
  std::size_t n = s.values.size();
  s.extrapolated = n >= 2 ? richardson_sqrt(s.levels[n - 2], s.values[n - 2], s.levels[n - 1],
                                            s.values[n - 1])
                          : s.values.back();
  double vmax = 0;
  for (double v : s.values) vmax = std::max(vmax, std::abs(v));
  double sp = 0;
  for (double a : s.values)
    for (double b : s.values) sp = std::max(sp, std::abs(a - b));
  s.spread = sp / std::max(vmax, scale_floor);
  s.abs_err = std::abs(s.extrapolated - s.target);
  s.rel_err = s.abs_err / std::max(std::abs(s.target), scale_floor);
}

std::array<ErnstCalibration, 2> calibrations(const MetricModel& model) {
  return {ernst_calibrate(model, 1), ernst_calibrate(model, -1)};
}

std::array<double, 4> psi_values(const MetricModel& model, const Point& p, int si,
                                 const std::array<ErnstCalibration, 2>& cal) {
  Concomitants c = concomitants_at(model, p, 2, cal);
  if (!c.ms_valid[si]) throw MeshError("Mars-Simon fields withheld on the surface: " + c.ms_reason[si]);
  TensorValue psi = psi_field(c, si, 1.0);
  return {psi[0].value(), psi[1].value(), psi[2].value(), psi[3].value()};
}

}  // namespace

FluxSeries charge(const MetricModel& model, const std::string& locus,
                  const std::vector<double>& eps_sequence, int n_nodes) {
  FluxSeries s;
  s.locus = locus;
  SurfaceGravity sg = surface_gravities(model, locus);
  Locus l = parse_locus(model, locus);
  if (sg.is_nut) {
    s.target = kPi / (2 * sg.kappa1 * sg.kappa2);
  } else {
    int bb = model.fixed.bolts[l.index].self_intersection;
    s.target = -kPi * bb / (2 * sg.kappa * sg.kappa) + 0.0;
  }
  auto field = [&](const Point& p) {
    auto sig = sigma_at(model, p);
    double lam = model.lambda_at(p);
    std::array<double, 4> low{};
    for (int a = 0; a < 4; ++a) low[a] = -0.5 * (sig[0][a] - sig[1][a]) / (8 * kPi * lam * lam);
    return raise_values(model, p, low);
  };
  const double unit = level_scale(model, locus);
  for (double rel : eps_sequence) {
    double eps = rel * unit;
    LevelSurfaceMesh m = level_surface(model, locus, eps, n_nodes);
    s.levels.push_back(eps);
    s.values.push_back(surface_flux(m, field));
  }
  // natural scale: the nut formula magnitude, or pi / (2 kappa^2) at a bolt
  double scale = sg.is_nut ? std::abs(s.target) : kPi / (2 * sg.kappa * sg.kappa);
  finish_fixed(s, scale);
  s.pass = sg.is_nut ? s.rel_err < 1e-4 : s.abs_err < 1e-6 * std::max(1.0, scale);
  return s;
}

FluxSeries fixed_point_boundary_term(const MetricModel& model, const std::string& locus, int sign,
                                     const std::vector<double>& eps_sequence, int n_nodes) {
  FluxSeries s;
  s.locus = locus;
  s.sign = sign;
  int si = side_index(sign);
  SurfaceGravity sg = surface_gravities(model, locus);
  Locus l = parse_locus(model, locus);
  if (sg.is_nut) {
    double k1 = sg.kappa1, k2 = sg.kappa2;
    s.target = sign * 4 * kPi * kPi * std::abs(k1 + sign * k2) / (k1 * k2);
  } else {
    s.target = 4 * kPi * kPi * model.fixed.bolts[l.index].euler_char / std::abs(sg.kappa);
  }
  auto cal = calibrations(model);
  if (cal[si].constant) throw MeshError("half-flat side: Psi is not defined");
  const double unit = level_scale(model, locus);
  for (double rel : eps_sequence) {
    double eps = rel * unit;
    LevelSurfaceMesh m = level_surface(model, locus, eps, n_nodes);
    s.levels.push_back(eps);
    s.values.push_back(surface_flux(m, [&](const Point& p) { return psi_values(model, p, si, cal); }));
  }
  double scale = sg.is_nut ? 4 * kPi * kPi / std::abs(sg.kappa1 * sg.kappa2) * std::abs(sg.kappa1)
                           : 4 * kPi * kPi / std::abs(sg.kappa);
  finish_fixed(s, scale);
  s.pass = s.abs_err < 1e-5 * std::max(std::abs(s.target), scale);
  return s;
}

FluxSeries infinity_term(const MetricModel& model, int sign, const std::vector<double>& R_sequence,
                         int n_nodes) {
  FluxSeries s;
  s.locus = "infinity";
  s.sign = sign;
  int si = side_index(sign);
  std::vector<double> Rs = R_sequence;
  if (Rs.empty())
    for (double f : {1e2, 1e3, 1e4}) Rs.push_back(f * model.scale);
  auto cal = calibrations(model);
  if (cal[si].constant) throw MeshError("half-flat side: Psi is not defined");
  LengthAtInfinity li = length_at_infinity(model);
  s.target = -2 * kPi * li.ell_inf * model.fixed.orbifold_euler;
  for (double R : Rs) {
    LevelSurfaceMesh m = sphere_at_radius(model, R, n_nodes);
    s.levels.push_back(R);
    s.values.push_back(surface_flux(m, [&](const Point& p) { return psi_values(model, p, si, cal); }));
  }
  std::size_t n = s.values.size();
  s.extrapolated = s.values.back();
  double scale = std::abs(s.target);
  if (n >= 3) {
    double d1 = s.values[n - 2] - s.values[n - 3];
    double d2 = s.values[n - 1] - s.values[n - 2];
    double q = s.levels[n - 1] / s.levels[n - 2];
    // tails below roundoff: the sequence has already converged
    if (std::abs(d1) > 1e-12 * scale && std::abs(d2) > 1e-12 * scale && d1 * d2 > 0 &&
        std::abs(d2) < std::abs(d1)) {
      s.tail_exponent = std::log(d1 / d2) / std::log(q);
      s.extrapolated = s.values[n - 1] + d2 / (std::pow(q, s.tail_exponent) - 1);
      if (s.tail_exponent < 0.5) s.warning = "slow convergence: tail exponent below 0.5";
    } else if (std::abs(d2) > 1e-8 * scale) {
      s.warning = "non-monotone tail";
    } else {
      s.tail_exponent = std::numeric_limits<double>::infinity();
    }
  }
  double sp = 0;
  for (double a : s.values)
    for (double b : s.values) sp = std::max(sp, std::abs(a - b));
  s.spread = sp / std::max(scale, 1e-300);
  s.abs_err = std::abs(s.extrapolated - s.target);
  s.rel_err = s.abs_err / std::max(scale, 1e-300);
  s.pass = s.rel_err < 1e-5;
  return s;
}

FixedPointLimits fixed_point_limits(const MetricModel& model, const std::string& locus, int sign,
                                    const std::vector<double>& eps_sequence, int n_nodes) {
  FixedPointLimits out;
  out.locus = locus;
  out.sign = sign;
  int si = side_index(sign);
  SurfaceGravity sg = surface_gravities(model, locus);
  out.calF_target = sg.is_nut ? 2 * std::abs(sg.kappa1 + sign * sg.kappa2) : 2 * std::abs(sg.kappa);
  auto cal = calibrations(model);
  if (cal[si].constant) throw MeshError("half-flat side: F vanishes identically");
  std::vector<double> dev;
  const double unit = level_scale(model, locus);
  for (double rel : eps_sequence) {
    double eps = rel * unit;
    LevelSurfaceMesh m = level_surface(model, locus, eps, n_nodes);
    double fsum = 0, wsum = 0, rest = 0, cur = 0, grd = 0;
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      Concomitants c = concomitants_at(model, m.nodes[i], 2, cal);
      if (!c.ms_valid[si]) throw MeshError("Mars-Simon fields withheld: " + c.ms_reason[si]);
      TensorValue psi = psi_field(c, si, 1.0);
      JetScalar calF = sqrt(c.F2[si]);
      double F = calF.value(), lam = c.lambda.value();
      fsum += m.weights[i] * F;
      wsum += m.weights[i];
      std::array<double, 4> t1{}, t2{}, xi{};
      for (int a = 0; a < 4; ++a) {
        t1[a] = sign * 0.5 * F * c.JT[a].value();
        double up = 0;
        for (int b = 0; b < 4; ++b) up += c.bundle.ginv[ix(a, b)].value() * calF.gradient(b);
        t2[a] = up / (2 * lam);
        xi[a] = psi[a].value() - t1[a] - t2[a];
      }
      auto norm = [&](const std::array<double, 4>& v) {
        double s = 0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) s += c.bundle.g[ix(a, b)].value() * v[a] * v[b];
        return std::sqrt(std::max(s, 0.0));
      };
      rest = std::max(rest, norm(xi));
      cur = std::max(cur, norm(t1));
      grd = std::max(grd, norm(t2));
    }
    out.levels.push_back(eps);
    out.calF_mean.push_back(fsum / wsum);
    dev.push_back(std::abs(fsum / wsum - out.calF_target));
    out.rest_max.push_back(rest);
    out.current_max.push_back(cur);
    out.gradient_max.push_back(grd);
  }
  auto slope = [&](const std::vector<double>& y) {
    double n = static_cast<double>(y.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double lx = std::log(out.levels[i]), ly = std::log(std::max(y[i], 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  out.calF_slope = slope(dev);
  out.rest_slope = slope(out.rest_max);
  out.current_slope = slope(out.current_max);
  out.gradient_slope = slope(out.gradient_max);
  bool limit_ok = std::abs(out.calF_slope - 1.0) < 0.15 ||
                  dev.back() < 1e-9 * std::max(out.calF_target, 1e-300);
  // the current term vanishes identically when xi is hypersurface orthogonal
  bool no_current = *std::max_element(out.current_max.begin(), out.current_max.end()) == 0.0;
  out.pass = limit_ok && out.rest_slope > -0.1 && (no_current || out.current_slope < -0.4) &&
             out.gradient_slope < -0.4;
  return out;
}

LengthAtInfinity length_at_infinity(const MetricModel& model) {
  LengthAtInfinity li;
  li.metadata = model.fixed.ell_inf;
  double kmax = 0;
  double G = 0;
  for (std::size_t i = 0; i < model.fixed.nuts.size(); ++i) {
    SurfaceGravity sg = surface_gravities(model, "nut:" + std::to_string(i));
    kmax = std::max({kmax, std::abs(sg.kappa1), std::abs(sg.kappa2)});
    const NutMeta& nm = model.fixed.nuts[i];
    if (nm.w1 > 0) G = std::max(G, nm.w1 / std::abs(sg.kappa1));
  }
  for (std::size_t i = 0; i < model.fixed.bolts.size(); ++i) {
    SurfaceGravity sg = surface_gravities(model, "bolt:" + std::to_string(i));
    kmax = std::max(kmax, std::abs(sg.kappa));
    G = std::max(G, 1.0 / std::abs(sg.kappa));
  }
  if (!(kmax > 0)) throw ExtractionError(model.name + ": no fixed points to fix the length at infinity");
  double Pi = 2 * kPi / kmax;
  li.ell_inf = Pi;
  li.generic = 2 * kPi * G;
  li.bound_ok = li.ell_inf >= Pi * (1 - 1e-12) && (li.generic == 0 || li.generic >= Pi * (1 - 1e-9));
  return li;
}

BalanceLedger global_balance(const MetricModel& model, int sign, int n_nodes) {
  BalanceLedger L;
  L.metric = model.name;
  L.sign = sign;
  int si = side_index(sign);
  auto cal = calibrations(model);
  std::vector<Point> pts = sample_points(model, 20, 3, 0.05);
  PetrovSide ps = petrov_classify(model, pts, sign);
  L.petrov = ps.type;
  if (cal[si].constant) {
    L.applicable = false;
    L.reason = "half-flat side";
    L.pass = false;
    return L;
  }
  LengthAtInfinity li = length_at_infinity(model);
  L.ell_inf = li.ell_inf;
  L.orbifold_euler = model.fixed.orbifold_euler;

  const std::vector<double> eps_seq{0.1, 0.05};
  std::string first = model.fixed.nuts.empty() ? "bolt:0" : "nut:0";
  const double eps_in = eps_seq.back() * level_scale(model, first);
  const double R_out = 1e2 * model.scale;
  double closed_abs = 0;
  auto add_fixed = [&](const std::string& locus) {
    FluxSeries f = fixed_point_boundary_term(model, locus, sign, eps_seq, n_nodes);
    L.fixed_points.push_back({locus, f.target, f.values.back()});
    L.closed_sum += f.target;
    closed_abs += std::abs(f.target);
  };
  for (std::size_t i = 0; i < model.fixed.nuts.size(); ++i) add_fixed("nut:" + std::to_string(i));
  for (std::size_t i = 0; i < model.fixed.bolts.size(); ++i) add_fixed("bolt:" + std::to_string(i));
  FluxSeries inf = infinity_term(model, sign, {R_out}, n_nodes);
  L.infinity = {"infinity", -2 * kPi * L.ell_inf * L.orbifold_euler, inf.values.back()};
  L.closed_sum += L.infinity.closed_form;
  closed_abs += std::abs(L.infinity.closed_form);
  L.closed_scale = closed_abs;
  L.closed_imbalance = std::abs(L.closed_sum) / closed_abs;

  // bulk: int div Psi over {lambda > eps_in, r < R_out}, masked tensor Gauss-Legendre in (x, theta)
  std::vector<double> ts, wt;
  gauss_legendre01(20, ts, wt);
  double xR = model.x_of_r(R_out);
  double bulk = 0, bulk_scale = 0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < ts.size(); ++j) {
      Point p{0.0, xR * ts[i], kPi * ts[j], 0.0};
      if (model.lambda_at(p) <= eps_in) continue;
      Concomitants c = concomitants_at(model, p, 3, cal);
      if (!c.ms_valid[si]) continue;
      TensorValue psi = psi_field(c, si, 1.0);
      DivergenceTerms dt = divergence_terms(psi, c.bundle.sqrt_det);
      double vol = model.tau_period * 2 * kPi * xR * kPi * wt[i] * wt[j] * c.bundle.sqrt_det.value();
      bulk += vol * dt.div.value();
      bulk_scale += vol * dt.scale;
      ++L.bulk_nodes;
    }
  L.bulk = bulk;
  L.numeric_sum = L.infinity.numeric;
  double num_abs = std::abs(L.infinity.numeric);
  for (const auto& e : L.fixed_points) {
    L.numeric_sum += e.numeric;
    num_abs += std::abs(e.numeric);
  }
  L.numeric_scale = num_abs;
  L.numeric_imbalance = std::abs(L.numeric_sum - L.bulk) / num_abs;
  (void)bulk_scale;
  L.pass = L.closed_imbalance < L.tolerance && L.numeric_imbalance < L.tolerance;
  return L;
}

}  // namespace alf
