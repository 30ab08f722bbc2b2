#include "alf/intpoly.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace alf {

IntPolynomial::IntPolynomial(std::vector<BigInt> coeffs) : c_(std::move(coeffs)) { trim(); }

IntPolynomial::IntPolynomial(long long c) {
  if (c != 0) c_.push_back(BigInt(c));
}

IntPolynomial IntPolynomial::monomial(int degree, const BigInt& c) {
  std::vector<BigInt> v(degree + 1);
  v[degree] = c;
  return IntPolynomial(std::move(v));
}

IntPolynomial IntPolynomial::binomial(int k, int sign) {
  std::vector<BigInt> v(k + 1);
  v[k] = 1;
  v[0] += sign;
  return IntPolynomial(std::move(v));
}

void IntPolynomial::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

BigInt IntPolynomial::coeff(int k) const {
  if (k < 0 || k >= static_cast<int>(c_.size())) return 0;
  return c_[k];
}

IntPolynomial& IntPolynomial::operator+=(const IntPolynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
  trim();
  return *this;
}

IntPolynomial& IntPolynomial::operator-=(const IntPolynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
  trim();
  return *this;
}

IntPolynomial& IntPolynomial::operator*=(const BigInt& s) {
  if (s == 0) {
    c_.clear();
    return *this;
  }
  for (auto& x : c_) x *= s;
  return *this;
}

IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<BigInt> v(a.c_.size() + b.c_.size() - 1);
  for (size_t i = 0; i < a.c_.size(); ++i) {
    if (a.c_[i] == 0) continue;
    for (size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
  }
  return IntPolynomial(std::move(v));
}

IntPolynomial IntPolynomial::operator-() const {
  IntPolynomial r = *this;
  for (auto& x : r.c_) x = -x;
  return r;
}

BigInt IntPolynomial::content() const {
  BigInt g = 0;
  for (const auto& x : c_) {
    g = boost::multiprecision::gcd(g, x);
    if (g == 1) break;
  }
  return boost::multiprecision::abs(g);
}

IntPolynomial IntPolynomial::primitive() const {
  if (is_zero()) return {};
  BigInt g = content();
  if (leading() < 0) g = -g;
  IntPolynomial r = *this;
  for (auto& x : r.c_) x /= g;
  return r;
}

Rational IntPolynomial::eval(const Rational& g) const {
  Rational acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * g + Rational(*it);
  return acc;
}

unsigned long long IntPolynomial::eval_mod(unsigned long long g, unsigned long long p) const {
  unsigned __int128 acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    BigInt r = *it % p;
    if (r < 0) r += p;
    acc = (acc * g + static_cast<unsigned long long>(r)) % p;
  }
  return static_cast<unsigned long long>(acc);
}

std::string IntPolynomial::str(const std::string& var) const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int k = degree(); k >= 0; --k) {
    const BigInt& c = c_[k];
    if (c == 0) continue;
    BigInt a = boost::multiprecision::abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (k == 0 || a != 1) os << a;
    if (k > 0) os << var;
    if (k > 1) os << "^" << k;
  }
  return os.str();
}

IntPolynomial pseudo_remainder(const IntPolynomial& a, const IntPolynomial& b) {
  if (b.is_zero()) throw std::domain_error("pseudo_remainder by zero");
  std::vector<BigInt> r = a.coeffs();
  int db = b.degree();
  const BigInt& lb = b.leading();
  const auto& bc = b.coeffs();
  int e = std::max(a.degree() - db + 1, 0);
  while (static_cast<int>(r.size()) - 1 >= db && !r.empty()) {
    int dr = static_cast<int>(r.size()) - 1;
    BigInt lr = r.back();
    for (auto& x : r) x *= lb;
    for (int j = 0; j <= db; ++j) r[dr - db + j] -= lr * bc[j];
    --e;
    while (!r.empty() && r.back() == 0) r.pop_back();
  }
  IntPolynomial out(std::move(r));
  BigInt scale = boost::multiprecision::pow(lb, static_cast<unsigned>(std::max(e, 0)));
  return out * scale;
}

IntPolynomial exact_div(const IntPolynomial& a, const IntPolynomial& b) {
  if (b.is_zero()) throw std::domain_error("exact_div by zero");
  if (a.is_zero()) return {};
  int da = a.degree(), db = b.degree();
  if (da < db) throw std::domain_error("exact_div: not divisible");
  std::vector<BigInt> r = a.coeffs();
  std::vector<BigInt> q(da - db + 1);
  const auto& bc = b.coeffs();
  for (int k = da - db; k >= 0; --k) {
    BigInt num = r[k + db];
    if (num % b.leading() != 0) throw std::domain_error("exact_div: not divisible");
    q[k] = num / b.leading();
    for (int j = 0; j <= db; ++j) r[k + j] -= q[k] * bc[j];
  }
  for (const auto& x : r)
    if (x != 0) throw std::domain_error("exact_div: not divisible");
  return IntPolynomial(std::move(q));
}

IntPolynomial gcd(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.is_zero()) return b.primitive() * b.content();
  if (b.is_zero()) return a.primitive() * a.content();
  BigInt c = boost::multiprecision::gcd(a.content(), b.content());
  IntPolynomial x = a.primitive(), y = b.primitive();
  if (x.degree() < y.degree()) std::swap(x, y);
  while (!y.is_zero()) {
    IntPolynomial r = pseudo_remainder(x, y);
    x = std::move(y);
    y = r.primitive();
  }
  return x.primitive() * c;
}

IntRationalFunction::IntRationalFunction(IntPolynomial num, IntPolynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw std::domain_error("rational function with zero denominator");
  canonicalize();
}

void IntRationalFunction::canonicalize() {
  if (num_.is_zero()) {
    den_ = IntPolynomial(1);
    return;
  }
  IntPolynomial g = gcd(num_, den_).primitive();
  if (g.degree() > 0) {
    num_ = exact_div(num_, g);
    den_ = exact_div(den_, g);
  }
  BigInt c = boost::multiprecision::gcd(num_.content(), den_.content());
  if (den_.leading() < 0) c = -c;
  if (c != 1) {
    num_ = exact_div(num_, IntPolynomial(std::vector<BigInt>{c}));
    den_ = exact_div(den_, IntPolynomial(std::vector<BigInt>{c}));
  }
}

Rational IntRationalFunction::constant_value() const {
  return Rational(num_.coeff(0), den_.coeff(0));
}

IntRationalFunction operator+(const IntRationalFunction& a, const IntRationalFunction& b) {
  if (a.den_ == b.den_) return {a.num_ + b.num_, a.den_};
  return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
}

IntRationalFunction operator-(const IntRationalFunction& a, const IntRationalFunction& b) {
  if (a.den_ == b.den_) return {a.num_ - b.num_, a.den_};
  return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
}

IntRationalFunction operator*(const IntRationalFunction& a, const IntRationalFunction& b) {
  return {a.num_ * b.num_, a.den_ * b.den_};
}

Rational IntRationalFunction::eval(const Rational& g) const {
  Rational d = den_.eval(g);
  if (d == 0) throw std::domain_error("rational function evaluated at a pole");
  return num_.eval(g) / d;
}

std::string IntRationalFunction::str(const std::string& var) const {
  if (den_.degree() == 0 && den_.leading() == 1) return num_.str(var);
  return "(" + num_.str(var) + ") / (" + den_.str(var) + ")";
}

}  // namespace alf
