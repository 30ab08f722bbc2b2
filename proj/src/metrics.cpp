#include "alf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <numbers>
#include <random>
#include <sstream>

namespace alf {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double param(const std::map<std::string, double>& p, const std::string& k, double def) {
  auto it = p.find(k);
  return it == p.end() ? def : it->second;
}

void check_known(const std::map<std::string, double>& p, std::initializer_list<const char*> keys,
                 const std::string& model) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* q : keys) ok = ok || k == q;
    if (!ok) throw CatalogueError(model + ": unknown parameter '" + k + "'");
  }
}

// sets g(tau,tau), g(tau,phi), g(phi,phi), g(x,x), g(theta,theta) from jets
TensorValue fill(int K, const std::string& chart, const JetScalar& gtt, const JetScalar& gtp,
                 const JetScalar& gpp, const JetScalar& gxx, const JetScalar& gqq) {
  TensorValue g("dd", K, chart);
  g[ix(kTau, kTau)] = gtt;
  g[ix(kTau, kPhi)] = gtp;
  g[ix(kPhi, kTau)] = gtp;
  g[ix(kPhi, kPhi)] = gpp;
  g[ix(kX, kX)] = gxx;
  g[ix(kTheta, kTheta)] = gqq;
  return g;
}

MetricModel flat_model(const std::map<std::string, double>& p) {
  check_known(p, {"L"}, "flat");
  MetricModel m;
  m.name = "flat";
  double L = param(p, "L", 1.0);
  if (!(L > 0)) throw CatalogueError("flat: L must be positive");
  m.params = {{"L", L}};
  m.chart_id = "flat(tau,x,theta,phi)";
  m.r_h = 0.0;
  m.scale = 1.0;
  m.tau_period = 2 * kPi * L;
  m.flat = true;
  m.hypersurface_orthogonal = true;
  m.declared_petrov_plus = m.declared_petrov_minus = "flat";
  m.fixed.ell_inf = m.tau_period;
  m.fixed.euler_char = 0;
  std::string chart = m.chart_id;
  m.metric = [chart](const ChartJets& c) {
    int K = c[0].order();
    JetScalar x = c[kX], r = c[kX] * c[kX];
    JetScalar s = sin(c[kTheta]);
    JetScalar r2 = r * r;
    return fill(K, chart, JetScalar(1.0, K), JetScalar(0.0, K), r2 * s * s, 4.0 * x * x, r2);
  };
  return m;
}

MetricModel schwarzschild_model(const std::map<std::string, double>& p) {
  check_known(p, {"m"}, "schwarzschild");
  double M = param(p, "m", 1.0);
  if (!(M > 0)) throw CatalogueError("schwarzschild: m must be positive");
  MetricModel m;
  m.name = "schwarzschild";
  m.params = {{"m", M}};
  m.chart_id = "schwarzschild(tau,x,theta,phi)";
  m.r_h = 2 * M;
  m.scale = M;
  m.tau_period = 8 * kPi * M;
  m.hypersurface_orthogonal = true;
  m.declared_petrov_plus = m.declared_petrov_minus = "D";
  m.fixed.bolts.push_back({2, 0, 1.0 / (4 * M)});
  m.fixed.ell_inf = 8 * kPi * M;
  m.fixed.euler_char = 2;
  m.fixed.signature = 0;
  std::string chart = m.chart_id;
  double rh = m.r_h;
  m.metric = [chart, rh](const ChartJets& c) {
    int K = c[0].order();
    JetScalar x2 = c[kX] * c[kX];
    JetScalar r = x2 + rh;
    JetScalar s = sin(c[kTheta]);
    JetScalar r2 = r * r;
    // V = 1 - 2m/r = x^2 / r
    return fill(K, chart, x2 / r, JetScalar(0.0, K), r2 * s * s, 4.0 * r, r2);
  };
  return m;
}

MetricModel kerr_model(const std::map<std::string, double>& p) {
  check_known(p, {"m", "a"}, "kerr");
  double M = param(p, "m", 1.0);
  double A = param(p, "a", 0.3);
  if (!(M > 0)) throw CatalogueError("kerr: m must be positive");
  if (!(std::abs(A) < M)) throw CatalogueError("kerr: need |a| < m");
  if (A == 0.0) throw CatalogueError("kerr: a = 0 has a bolt, use schwarzschild");
  MetricModel m;
  m.name = "kerr";
  m.params = {{"m", M}, {"a", A}};
  m.chart_id = "kerr(tau,x,theta,phi)";
  double rp = M + std::sqrt(M * M + A * A);
  double rm = M - std::sqrt(M * M + A * A);
  m.r_h = rp;
  m.scale = M;
  double kh = std::sqrt(M * M + A * A) / (2 * M * rp);
  double om = A / (2 * M * rp);
  m.tau_period = 2 * kPi / kh;
  m.declared_petrov_plus = m.declared_petrov_minus = "D";
  // nut orientation signs under the chart orientation, fixed by the nu-limit
  int sgn_a = A >= 0 ? 1 : -1;
  NutMeta north{sgn_a, 0, 0, 0.0, kh, sgn_a * std::abs(om)};
  NutMeta south{-sgn_a, 0, 0, kPi, kh, -sgn_a * std::abs(om)};
  // weights when the period ratio is rational (small denominators only)
  double ratio = std::abs(om) / kh;
  for (int q = 1; q <= 12 && A != 0.0; ++q) {
    double pnum = ratio * q;
    int pi_ = static_cast<int>(std::lround(pnum));
    if (pi_ >= 1 && std::abs(pnum - pi_) < 1e-12 && std::gcd(pi_, q) == 1) {
      north.w1 = south.w1 = q;
      north.w2 = south.w2 = pi_;
      break;
    }
  }
  m.fixed.nuts = {north, south};
  m.fixed.ell_inf = 2 * kPi / kh;  // shortest orbit length near the fixed points
  m.fixed.euler_char = 2;
  m.fixed.signature = 0;
  std::string chart = m.chart_id;
  m.metric = [chart, M, A, rp, rm](const ChartJets& c) {
    int K = c[0].order();
    JetScalar x2 = c[kX] * c[kX];
    JetScalar r = x2 + rp;
    JetScalar s = sin(c[kTheta]), co = cos(c[kTheta]);
    JetScalar s2 = s * s;
    JetScalar Sig = r * r - A * A * (co * co);
    JetScalar Delta = x2 * (r - rm);
    JetScalar iS = inverse(Sig);
    JetScalar q = r * r - A * A;
    JetScalar gtt = 1.0 - 2.0 * M * r * iS;
    JetScalar gtp = -2.0 * M * A * r * s2 * iS;
    JetScalar gpp = (Delta * A * A * s2 * s2 + s2 * q * q) * iS;
    JetScalar gxx = 4.0 * Sig / (r - rm);
    return fill(K, chart, gtt, gtp, gpp, gxx, Sig);
  };
  return m;
}

TensorValue taub_metric(const ChartJets& c, const std::string& chart, double n,
                        const JetScalar& V, const JetScalar& gxx, const JetScalar& r) {
  int K = c[0].order();
  JetScalar s = sin(c[kTheta]), co = cos(c[kTheta]);
  JetScalar R2 = r * r - n * n;
  JetScalar gtp = 2.0 * n * V * co;
  JetScalar gpp = 4.0 * n * n * V * co * co + R2 * s * s;
  return fill(K, chart, V, gtp, gpp, gxx, R2);
}

MetricModel taub_nut_model(const std::map<std::string, double>& p) {
  check_known(p, {"n"}, "taub-nut");
  double n = param(p, "n", 1.0);
  if (!(n > 0)) throw CatalogueError("taub-nut: n must be positive");
  MetricModel m;
  m.name = "taub-nut";
  m.params = {{"n", n}};
  m.chart_id = "taub-nut(tau,x,theta,phi)";
  m.r_h = n;
  m.scale = n;
  m.tau_period = 8 * kPi * n;
  m.declared_petrov_plus = m.declared_petrov_minus = "detect";
  double k = 1.0 / (4 * n);
  m.fixed.nuts.push_back({1, 1, 1, 0.0, k, k});
  m.fixed.euler_number = -1;
  m.fixed.ell_inf = 8 * kPi * n;
  m.fixed.euler_char = 1;
  m.fixed.signature = 0;
  std::string chart = m.chart_id;
  m.metric = [chart, n](const ChartJets& c) {
    JetScalar x2 = c[kX] * c[kX];
    JetScalar r = x2 + n;
    JetScalar V = x2 / (r + n);
    return taub_metric(c, chart, n, V, 4.0 * (r + n), r);
  };
  return m;
}

MetricModel taub_bolt_model(const std::map<std::string, double>& p) {
  check_known(p, {"n"}, "taub-bolt");
  double n = param(p, "n", 1.0);
  if (!(n > 0)) throw CatalogueError("taub-bolt: n must be positive");
  MetricModel m;
  m.name = "taub-bolt";
  m.params = {{"n", n}};
  m.chart_id = "taub-bolt(tau,x,theta,phi)";
  m.r_h = 2 * n;
  m.scale = n;
  m.tau_period = 8 * kPi * n;
  m.declared_petrov_plus = m.declared_petrov_minus = "D";
  // metadata (B.B = e = +1) holds for the orientation opposite to the chart one
  m.orientation = -1;
  m.fixed.bolts.push_back({2, 1, 1.0 / (4 * n)});
  m.fixed.euler_number = 1;
  m.fixed.ell_inf = 8 * kPi * n;
  m.fixed.euler_char = 2;
  m.fixed.signature = 1;
  std::string chart = m.chart_id;
  m.metric = [chart, n](const ChartJets& c) {
    JetScalar x2 = c[kX] * c[kX];
    JetScalar r = x2 + 2.0 * n;
    JetScalar R2 = r * r - n * n;
    JetScalar h = r - 0.5 * n;  // r^2 - 2mr + n^2 = x^2 (r - n/2), m = 5n/4
    JetScalar V = x2 * h / R2;
    return taub_metric(c, chart, n, V, 4.0 * R2 / h, r);
  };
  return m;
}

}  // namespace

double MetricModel::x_of_r(double r) const {
  if (r < r_h) throw std::domain_error("radius inside the chart boundary");
  return std::sqrt(r - r_h);
}

TensorValue MetricModel::killing_jet(int order) const {
  TensorValue v("u", order, chart_id);
  v[0] = JetScalar(xi_scale, order);
  return v;
}

double MetricModel::lambda_at(const Point& p) const {
  auto x = jet_lift(p, 0);
  TensorValue g = metric(x);
  return xi_scale * xi_scale * g[ix(kTau, kTau)].value();
}

std::vector<std::string> metric_names() {
  return {"flat", "schwarzschild", "kerr", "taub-nut", "taub-bolt"};
}

MetricModel make_model(const std::string& name, const std::map<std::string, double>& params,
                       bool validate) {
  MetricModel m;
  if (name == "flat")
    m = flat_model(params);
  else if (name == "schwarzschild")
    m = schwarzschild_model(params);
  else if (name == "kerr")
    m = kerr_model(params);
  else if (name == "taub-nut")
    m = taub_nut_model(params);
  else if (name == "taub-bolt")
    m = taub_bolt_model(params);
  else
    throw CatalogueError("unknown metric '" + name + "'");
  if (validate) {
    GateResult gate = validate_model(m);
    if (!gate.pass) {
      std::ostringstream os;
      os << "validation gate failed for " << name << ": ricci_rel=" << gate.ricci_rel
         << " killing_rel=" << gate.killing_rel << " lambda_max=" << gate.lambda_max
         << " monotone=" << gate.lambda_monotone;
      throw CatalogueError(os.str());
    }
  }
  return m;
}

std::vector<MetricModel> catalogue() {
  std::vector<MetricModel> out;
  for (const auto& n : metric_names()) out.push_back(make_model(n));
  return out;
}

GateResult validate_model(const MetricModel& model, int n_points, std::uint64_t seed) {
  GateResult res;
  auto pts = sample_points(model, n_points, seed, 1e-3);
  TensorValue xi = model.killing_jet(2);
  for (const auto& p : pts) {
    CurvatureBundle b = curvature(model.metric, p, 2, model.orientation);
    double riem = b.riemann.max_abs();
    double ric = b.ricci.max_abs();
    double gam = b.christoffel.max_abs();
    double scale = std::max(riem, gam * gam);
    res.ricci_rel = std::max(res.ricci_rel, ric / scale);
    TensorValue xi_low = lower_index(xi, 0, b);
    TensorValue dxi = covariant_derivative(xi_low, b);
    double kil = 0.0, mag = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 4; ++c) {
        kil = std::max(kil, std::abs(dxi[ix(a, c)].value() + dxi[ix(c, a)].value()));
        mag = std::max(mag, std::abs(dxi[ix(a, c)].value()));
      }
    res.killing_rel = std::max(res.killing_rel, kil / std::max(mag, 1e-12));
    res.lambda_max = std::max(res.lambda_max, model.lambda_at(p));
  }
  double prev = -1.0;
  for (double f : {10.0, 1e2, 1e3, 1e4}) {
    double r = f * model.scale + model.r_h;
    double lam = model.lambda_at({0.0, model.x_of_r(r), kPi / 2, 0.0});
    res.ray_lambda.push_back(lam);
    if (!(lam >= prev)) res.lambda_monotone = false;
    prev = lam;
  }
  double tail = 1.0 - res.ray_lambda.back();
  bool tends_to_one = std::abs(tail) < 1e-3;
  bool below_one = model.flat ? res.lambda_max <= 1.0 + 1e-14 : res.lambda_max < 1.0;
  res.pass = res.ricci_rel < 1e-9 && res.killing_rel < 1e-9 && below_one && res.lambda_monotone &&
             tends_to_one;
  return res;
}

MetricModel perturbed(const MetricModel& model, double amp) {
  MetricModel m = model;
  m.name = model.name + "+perturbed";
  m.hypersurface_orthogonal = false;
  m.flat = false;
  m.declared_petrov_plus = m.declared_petrov_minus = "detect";
  auto base = model.metric;
  double rh = model.r_h, sc = model.scale;
  m.metric = [base, amp, rh, sc](const ChartJets& c) {
    TensorValue g = base(c);
    JetScalar r = c[kX] * c[kX] + rh;
    JetScalar decay = sc * inverse(r + sc);
    JetScalar conf = 1.0 + amp * decay * (1.0 + 0.5 * cos(c[kTheta]));
    for (auto& v : g.comp) v = v * conf;
    // a decaying twist so that static models acquire omega != 0
    JetScalar s = sin(c[kTheta]);
    JetScalar tw = amp * sc * decay * s * s;
    g[ix(kTau, kPhi)] = g[ix(kTau, kPhi)] + tw;
    g[ix(kPhi, kTau)] = g[ix(kPhi, kTau)] + tw;
    return g;
  };
  return m;
}

std::vector<Point> sample_points(const MetricModel& model, int count, std::uint64_t seed,
                                 double lambda_min, double margin, double r_max) {
  if (!(lambda_min > 0.0 && lambda_min < 1.0))
    throw SamplingError("lambda_min must lie in (0,1)");
  std::vector<Point> out;
  if (count <= 0) return out;
  std::mt19937_64 rng(seed);
  double r_lo = model.r_h + margin * margin;
  double r_hi = r_max > 0.0 ? r_max : model.r_h + 40.0 * model.scale;
  if (!(r_hi > r_lo)) throw SamplingError("empty radial range");
  double l0 = std::log(r_lo), l1 = std::log(r_hi);
  double th0 = margin, th1 = kPi - margin;
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 400 && !placed; ++attempt) {
      // after repeated rejection inside a stratum, fall back to the full range
      double u = attempt < 200 ? (i + uniform01(rng)) / count : uniform01(rng);
      double r = std::exp(l0 + (l1 - l0) * u);
      Point p{uniform01(rng) * model.tau_period, model.x_of_r(r),
              th0 + (th1 - th0) * uniform01(rng), 2 * kPi * uniform01(rng)};
      if (model.lambda_at(p) >= lambda_min) {
        out.push_back(p);
        placed = true;
      }
    }
    if (!placed) throw SamplingError("no admissible point: lambda_min too large for the domain");
  }
  return out;
}

namespace {

// mu and nu from nabla xi at a chart point
std::pair<double, double> mu_nu_at(const MetricModel& model, const Point& p) {
  CurvatureBundle b = connection_only(model.metric, p, 1, model.orientation);
  TensorValue xi_low = lower_index(model.killing_jet(1), 0, b);
  TensorValue F = covariant_derivative(xi_low, b);  // F_ab = nabla_a xi_b at [b][a]
  TensorValue Fup = raise_index(raise_index(F, 0, b), 1, b);
  double mu = 0.0, nu = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) mu += 0.5 * F[ix(a, c)].value() * Fup[ix(a, c)].value();
  for (int i = 0; i < 256; ++i) {
    double e = b.eps_up[i].value();
    if (e == 0.0) continue;
    int a = i / 64, c = (i / 16) % 4, d = (i / 4) % 4, f = i % 4;
    nu += 0.25 * e * F[ix(a, c)].value() * F[ix(d, f)].value();
  }
  return {mu, nu};
}

// polynomial extrapolation to t = 0 (Neville); returns value and last correction
std::pair<double, double> extrapolate_zero(const std::vector<double>& t, std::vector<double> y) {
  int n = static_cast<int>(t.size());
  double last = 0.0;
  for (int k = 1; k < n; ++k)
    for (int i = n - 1; i >= k; --i) {
      double nv = (t[i] * y[i - 1] - t[i - k] * y[i]) / (t[i] - t[i - k]);
      if (i == n - 1) last = nv - y[i];
      y[i] = nv;
    }
  return {y[n - 1], last};
}

}  // namespace

SurfaceGravity surface_gravities(const MetricModel& model, const std::string& locus) {
  auto colon = locus.find(':');
  if (colon == std::string::npos) throw ExtractionError("locus must be nut:<i> or bolt:<i>");
  std::string kind = locus.substr(0, colon);
  int idx = std::stoi(locus.substr(colon + 1));
  SurfaceGravity sg;
  std::vector<Point> ray;
  double h = 0.02 * std::sqrt(model.scale);
  std::vector<double> ts;
  for (int k = 0; k < 5; ++k) ts.push_back(h / (1 << k));
  if (kind == "nut") {
    if (idx < 0 || idx >= static_cast<int>(model.fixed.nuts.size()))
      throw ExtractionError(model.name + ": no such nut " + locus);
    const NutMeta& nm = model.fixed.nuts[idx];
    double dir = nm.theta < 1.0 ? 1.0 : -1.0;
    for (double t : ts) ray.push_back({0.0, t, nm.theta + dir * t, 0.0});
  } else if (kind == "bolt") {
    if (idx < 0 || idx >= static_cast<int>(model.fixed.bolts.size()))
      throw ExtractionError(model.name + ": no such bolt " + locus);
    sg.is_nut = false;
    for (double t : ts) ray.push_back({0.0, t, kPi / 2, 0.0});
  } else {
    throw ExtractionError("unknown locus kind '" + kind + "'");
  }
  // mu, nu are smooth and even in the chart distance; extrapolate in t^2
  std::vector<double> t2;
  for (std::size_t i = 0; i < ray.size(); ++i) {
    auto [mu, nu] = mu_nu_at(model, ray[i]);
    sg.eps_trace.push_back(ts[i]);
    sg.mu_trace.push_back(mu);
    sg.nu_trace.push_back(nu);
    t2.push_back(ts[i] * ts[i]);
  }
  auto [mu0, dmu] = extrapolate_zero(t2, sg.mu_trace);
  auto [nu0, dnu] = extrapolate_zero(t2, sg.nu_trace);
  if (!(std::abs(dmu) < 1e-8 * std::max(std::abs(mu0), 1e-300)) ||
      !(std::abs(dnu) < 1e-8 * std::max(std::abs(mu0), 1e-300))) {
    std::ostringstream os;
    os << "non-convergent extrapolation at " << locus << ": mu corrections " << dmu
       << ", nu corrections " << dnu;
    throw ExtractionError(os.str());
  }
  if (sg.is_nut) {
    // (k1 -+ k2)^2 below the roundoff of the traces is zero; the square root would amplify it
    double noise = 10.0 * (std::abs(dmu) + std::abs(dnu)) + 1e-9 * std::abs(mu0);
    auto root = [noise](double v) { return std::abs(v) <= noise ? 0.0 : std::sqrt(std::max(v, 0.0)); };
    double sp = root(mu0 + nu0), sm = root(mu0 - nu0);
    sg.kappa1 = 0.5 * (sp + sm);
    sg.kappa2 = 0.5 * (sp - sm);
    const NutMeta& nm = model.fixed.nuts[idx];
    double e1 = std::abs(std::abs(sg.kappa1) - std::abs(nm.kappa1)) / std::abs(nm.kappa1);
    double e2 = std::abs(std::abs(sg.kappa2) - std::abs(nm.kappa2)) / std::abs(nm.kappa1);
    int sgn = nu0 > 0 ? 1 : (nu0 < 0 ? -1 : 0);
    sg.metadata_rel_err = std::max(e1, e2);
    if (sgn != 0 && sgn != nm.eps) sg.metadata_rel_err = std::max(sg.metadata_rel_err, 1.0);
  } else {
    sg.kappa = std::sqrt(std::max(mu0, 0.0));
    sg.nu_over_mu = std::abs(nu0) / mu0;
    const BoltMeta& bm = model.fixed.bolts[idx];
    sg.metadata_rel_err = std::abs(sg.kappa - std::abs(bm.kappa)) / std::abs(bm.kappa);
  }
  if (sg.metadata_rel_err > 1e-6 && !std::getenv("ALF_DEBUG_EXTRACT")) {
    std::ostringstream os;
    os << "extracted surface gravity disagrees with metadata at " << locus
       << " (rel err " << sg.metadata_rel_err << ")";
    throw ExtractionError(os.str());
  }
  return sg;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace alf
