#include "alf/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alf {

namespace {

int degree_of(const MultiIndex& a) {
  int d = 0;
  for (auto v : a) d += v;
  return d;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

MonomialTable::MonomialTable() {
  for (int d = 0; d <= kMaxOrder; ++d) {
    // lexicographic (descending in the first slot) within each degree
    for (int a0 = d; a0 >= 0; --a0)
      for (int a1 = d - a0; a1 >= 0; --a1)
        for (int a2 = d - a0 - a1; a2 >= 0; --a2) {
          int a3 = d - a0 - a1 - a2;
          exps_.push_back({static_cast<std::uint8_t>(a0), static_cast<std::uint8_t>(a1),
                           static_cast<std::uint8_t>(a2), static_cast<std::uint8_t>(a3)});
          deg_.push_back(d);
        }
    prefix_[d] = static_cast<int>(exps_.size());
  }
  up_.resize(exps_.size());
  for (std::size_t i = 0; i < exps_.size(); ++i)
    for (int mu = 0; mu < kDim; ++mu) {
      MultiIndex b = exps_[i];
      b[mu]++;
      up_[i][mu] = degree_of(b) > kMaxOrder ? -1 : index(b);
    }
  for (std::size_t i = 0; i < exps_.size(); ++i)
    for (std::size_t j = 0; j < exps_.size(); ++j) {
      if (deg_[i] + deg_[j] > kMaxOrder) continue;
      MultiIndex s;
      for (int mu = 0; mu < kDim; ++mu) s[mu] = exps_[i][mu] + exps_[j][mu];
      triples_.push_back({static_cast<int>(i), static_cast<int>(j), index(s)});
    }
  std::sort(triples_.begin(), triples_.end(), [](const Triple& a, const Triple& b) {
    return a.k != b.k ? a.k < b.k : (a.i != b.i ? a.i < b.i : a.j < b.j);
  });
  for (int d = 0; d <= kMaxOrder; ++d) {
    auto it = std::lower_bound(triples_.begin(), triples_.end(), prefix_[d],
                               [](const Triple& t, int k) { return t.k < k; });
    tri_prefix_[d] = static_cast<std::size_t>(it - triples_.begin());
  }
}

const MonomialTable& MonomialTable::instance() {
  static const MonomialTable table;
  return table;
}

int MonomialTable::index(const MultiIndex& a) const {
  int d = degree_of(a);
  if (d > kMaxOrder) return -1;
  int lo = d == 0 ? 0 : prefix_[d - 1];
  for (int i = lo; i < prefix_[d]; ++i)
    if (exps_[i] == a) return i;
  return -1;
}

JetScalar::JetScalar(double v, int order) : order_(order) {
  if (order < 0 || order > kMaxOrder) throw std::invalid_argument("jet order out of range");
  c_.assign(MonomialTable::instance().count(order), 0.0);
  c_[0] = v;
}

JetScalar JetScalar::variable(int mu, double at, int order) {
  JetScalar j(at, order);
  if (order >= 1) j.c_[1 + mu] = 1.0;
  return j;
}

double JetScalar::coeff(const MultiIndex& a) const {
  int i = MonomialTable::instance().index(a);
  if (i < 0 || i >= size()) return 0.0;
  return c_[i];
}

double JetScalar::derivative(const MultiIndex& a) const {
  double f = 1.0;
  for (auto v : a) f *= factorial(v);
  return coeff(a) * f;
}

double JetScalar::gradient(int mu) const {
  if (order_ < 1) throw std::logic_error("jet order too low for gradient");
  return c_[1 + mu];
}

JetScalar JetScalar::truncated(int order) const {
  if (order >= order_) return *this;
  JetScalar r;
  r.order_ = order;
  r.c_.assign(c_.begin(), c_.begin() + MonomialTable::instance().count(order));
  return r;
}

JetScalar JetScalar::d(int mu) const {
  if (order_ < 1) throw std::logic_error("jet order too low for derivative");
  const auto& t = MonomialTable::instance();
  JetScalar r(0.0, order_ - 1);
  for (int i = 0; i < r.size(); ++i) {
    int j = t.raise(i, mu);
    r.c_[i] = c_[j] * (t.exponent(j)[mu]);
  }
  return r;
}

JetScalar& JetScalar::operator+=(const JetScalar& o) {
  if (o.order_ < order_) *this = truncated(o.order_);
  for (int i = 0; i < size(); ++i) c_[i] += o.c_[i];
  return *this;
}

JetScalar& JetScalar::operator-=(const JetScalar& o) {
  if (o.order_ < order_) *this = truncated(o.order_);
  for (int i = 0; i < size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

JetScalar& JetScalar::operator*=(const JetScalar& o) {
  *this = *this * o;
  return *this;
}

JetScalar& JetScalar::operator/=(const JetScalar& o) {
  *this = *this / o;
  return *this;
}

JetScalar& JetScalar::operator*=(double v) {
  for (auto& x : c_) x *= v;
  return *this;
}

JetScalar JetScalar::operator-() const {
  JetScalar r = *this;
  for (auto& x : r.c_) x = -x;
  return r;
}

JetScalar JetScalar::compose(const std::vector<double>& taylor) const {
  // Horner in the nilpotent part h = u - u0
  JetScalar h = *this;
  h.c_[0] = 0.0;
  int n = std::min<int>(order_, static_cast<int>(taylor.size()) - 1);
  JetScalar acc(taylor[n], order_);
  for (int k = n - 1; k >= 0; --k) {
    acc = acc * h;
    acc.c_[0] += taylor[k];
  }
  return acc;
}

void fma_into(JetScalar& acc, const JetScalar& a, const JetScalar& b) {
  const auto& t = MonomialTable::instance();
  int ord = std::min({acc.order(), a.order(), b.order()});
  if (ord < acc.order()) acc = acc.truncated(ord);
  std::size_t n = t.products_upto(ord);
  const auto& tr = t.products();
  for (std::size_t q = 0; q < n; ++q) acc[tr[q].k] += a[tr[q].i] * b[tr[q].j];
}

JetScalar operator+(JetScalar a, const JetScalar& b) { return a += b; }
JetScalar operator-(JetScalar a, const JetScalar& b) { return a -= b; }

JetScalar operator*(const JetScalar& a, const JetScalar& b) {
  JetScalar r(0.0, std::min(a.order(), b.order()));
  fma_into(r, a, b);
  return r;
}

JetScalar operator/(const JetScalar& a, const JetScalar& b) { return a * inverse(b); }
JetScalar operator+(JetScalar a, double b) { return a += b; }
JetScalar operator+(double a, JetScalar b) { return b += a; }
JetScalar operator-(JetScalar a, double b) { return a -= b; }
JetScalar operator-(double a, const JetScalar& b) { return (-b) + a; }
JetScalar operator*(JetScalar a, double b) { return a *= b; }
JetScalar operator*(double a, JetScalar b) { return b *= a; }
JetScalar operator/(JetScalar a, double b) { return a /= b; }
JetScalar operator/(double a, const JetScalar& b) { return inverse(b) * a; }

JetScalar inverse(const JetScalar& u) {
  double u0 = u.value();
  if (u0 == 0.0) throw std::domain_error("jet division by zero");
  std::vector<double> t(u.order() + 1);
  double p = 1.0 / u0;
  for (int k = 0; k <= u.order(); ++k) {
    t[k] = p;
    p *= -1.0 / u0;
  }
  return u.compose(t);
}

JetScalar exp(const JetScalar& u) {
  std::vector<double> t(u.order() + 1);
  double e = std::exp(u.value());
  for (int k = 0; k <= u.order(); ++k) t[k] = e / factorial(k);
  return u.compose(t);
}

JetScalar log(const JetScalar& u) {
  double u0 = u.value();
  if (u0 <= 0.0) throw std::domain_error("jet log of non-positive value");
  std::vector<double> t(u.order() + 1);
  t[0] = std::log(u0);
  double p = 1.0 / u0;
  for (int k = 1; k <= u.order(); ++k) {
    t[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
    p /= u0;
  }
  return u.compose(t);
}

JetScalar pow(const JetScalar& u, double p) {
  double u0 = u.value();
  if (u0 <= 0.0) throw std::domain_error("jet power of non-positive value");
  std::vector<double> t(u.order() + 1);
  double binom = 1.0;
  double base = std::pow(u0, p);
  for (int k = 0; k <= u.order(); ++k) {
    t[k] = binom * base;
    binom *= (p - k) / (k + 1);
    base /= u0;
  }
  return u.compose(t);
}

JetScalar sqrt(const JetScalar& u) { return pow(u, 0.5); }

JetScalar sin(const JetScalar& u) {
  std::vector<double> t(u.order() + 1);
  double s = std::sin(u.value()), c = std::cos(u.value());
  const double cyc[4] = {s, c, -s, -c};
  for (int k = 0; k <= u.order(); ++k) t[k] = cyc[k % 4] / factorial(k);
  return u.compose(t);
}

JetScalar cos(const JetScalar& u) {
  std::vector<double> t(u.order() + 1);
  double s = std::sin(u.value()), c = std::cos(u.value());
  const double cyc[4] = {c, -s, -c, s};
  for (int k = 0; k <= u.order(); ++k) t[k] = cyc[k % 4] / factorial(k);
  return u.compose(t);
}

JetScalar atan(const JetScalar& u) {
  // atan(u) = atan(u0) + atan(z), z = (u - u0) / (1 + u0 u), z nilpotent
  double u0 = u.value();
  JetScalar h = u - u0;
  JetScalar z = h / (1.0 + u0 * u);
  std::vector<double> t(u.order() + 1, 0.0);
  for (int k = 1; k <= u.order(); k += 2) t[k] = ((k / 2) % 2 ? -1.0 : 1.0) / k;
  JetScalar r = z.compose(t);
  r += std::atan(u0);
  return r;
}

std::array<JetScalar, kDim> jet_lift(const std::array<double, kDim>& point, int order) {
  if (order < 0) throw std::invalid_argument("jet order must be non-negative");
  std::array<JetScalar, kDim> x;
  for (int mu = 0; mu < kDim; ++mu) x[mu] = JetScalar::variable(mu, point[mu], order);
  return x;
}

}  // namespace alf
