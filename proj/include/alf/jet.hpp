#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace alf {

constexpr int kDim = 4;
constexpr int kMaxOrder = 8;

using MultiIndex = std::array<std::uint8_t, kDim>;

// Graded monomial ordering shared by every jet. Monomials of degree <= k form
// a prefix of length count(k), so truncation is a resize.
class MonomialTable {
 public:
  static const MonomialTable& instance();

  int count(int order) const { return prefix_[order]; }
  const MultiIndex& exponent(int i) const { return exps_[i]; }
  int degree(int i) const { return deg_[i]; }
  int index(const MultiIndex& a) const;
  // index of a + e_mu, or -1 when the degree exceeds kMaxOrder
  int raise(int i, int mu) const { return up_[i][mu]; }

  struct Triple {
    int i, j, k;
  };
  // products sorted by k; products_upto(order) entries have k < count(order)
  const std::vector<Triple>& products() const { return triples_; }
  std::size_t products_upto(int order) const { return tri_prefix_[order]; }

 private:
  MonomialTable();
  std::vector<MultiIndex> exps_;
  std::vector<int> deg_;
  std::array<int, kMaxOrder + 1> prefix_{};
  std::vector<std::array<int, kDim>> up_;
  std::vector<Triple> triples_;
  std::array<std::size_t, kMaxOrder + 1> tri_prefix_{};
};

// Truncated Taylor expansion of a scalar field around a chart point.
// coeff(a) is the normalized Taylor coefficient d^a f / a!.
class JetScalar {
 public:
  JetScalar() : order_(0), c_(1, 0.0) {}
  JetScalar(double v, int order);

  static JetScalar constant(double v, int order) { return JetScalar(v, order); }
  static JetScalar variable(int mu, double at, int order);

  int order() const { return order_; }
  int size() const { return static_cast<int>(c_.size()); }
  double value() const { return c_[0]; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }
  double coeff(const MultiIndex& a) const;
  // partial derivative d^a f at the point (coefficient times a!)
  double derivative(const MultiIndex& a) const;
  double gradient(int mu) const;
  const std::vector<double>& coeffs() const { return c_; }

  JetScalar truncated(int order) const;
  // exact partial derivative; result has order - 1
  JetScalar d(int mu) const;

  JetScalar& operator+=(const JetScalar& o);
  JetScalar& operator-=(const JetScalar& o);
  JetScalar& operator*=(const JetScalar& o);
  JetScalar& operator/=(const JetScalar& o);
  JetScalar& operator+=(double v) {
    c_[0] += v;
    return *this;
  }
  JetScalar& operator-=(double v) {
    c_[0] -= v;
    return *this;
  }
  JetScalar& operator*=(double v);
  JetScalar& operator/=(double v) { return *this *= (1.0 / v); }
  JetScalar operator-() const;

  // f(u) = sum_k taylor[k] * (u - u0)^k for analytic f with given Taylor
  // coefficients at u0 = value()
  JetScalar compose(const std::vector<double>& taylor) const;

 private:
  int order_;
  std::vector<double> c_;
};

JetScalar operator+(JetScalar a, const JetScalar& b);
JetScalar operator-(JetScalar a, const JetScalar& b);
JetScalar operator*(const JetScalar& a, const JetScalar& b);
JetScalar operator/(const JetScalar& a, const JetScalar& b);
JetScalar operator+(JetScalar a, double b);
JetScalar operator+(double a, JetScalar b);
JetScalar operator-(JetScalar a, double b);
JetScalar operator-(double a, const JetScalar& b);
JetScalar operator*(JetScalar a, double b);
JetScalar operator*(double a, JetScalar b);
JetScalar operator/(JetScalar a, double b);
JetScalar operator/(double a, const JetScalar& b);

JetScalar inverse(const JetScalar& u);
JetScalar exp(const JetScalar& u);
JetScalar log(const JetScalar& u);
JetScalar sqrt(const JetScalar& u);
JetScalar pow(const JetScalar& u, double p);
JetScalar sin(const JetScalar& u);
JetScalar cos(const JetScalar& u);
JetScalar atan(const JetScalar& u);

// multiply-accumulate: acc += a * b (truncated to acc's order)
void fma_into(JetScalar& acc, const JetScalar& a, const JetScalar& b);

// coordinate jets x^mu at a chart point
std::array<JetScalar, kDim> jet_lift(const std::array<double, kDim>& point, int order);

}  // namespace alf
