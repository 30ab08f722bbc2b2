#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace alf {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Dense integer polynomial in one variable, coefficients low to high, no trailing zeros.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<BigInt> coeffs);
  IntPolynomial(long long c);  // NOLINT: constant polynomial

  static IntPolynomial monomial(int degree, const BigInt& c = 1);
  // g^k - 1 and g^k + 1
  static IntPolynomial binomial(int k, int sign);

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return c_.empty(); }
  const std::vector<BigInt>& coeffs() const { return c_; }
  BigInt coeff(int k) const;
  const BigInt& leading() const { return c_.back(); }

  IntPolynomial& operator+=(const IntPolynomial& o);
  IntPolynomial& operator-=(const IntPolynomial& o);
  IntPolynomial& operator*=(const BigInt& s);
  friend IntPolynomial operator+(IntPolynomial a, const IntPolynomial& b) { return a += b; }
  friend IntPolynomial operator-(IntPolynomial a, const IntPolynomial& b) { return a -= b; }
  friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator*(IntPolynomial a, const BigInt& s) { return a *= s; }
  IntPolynomial operator-() const;
  bool operator==(const IntPolynomial& o) const { return c_ == o.c_; }

  BigInt content() const;           // nonnegative gcd of coefficients
  IntPolynomial primitive() const;  // divided by content, leading coefficient positive
  Rational eval(const Rational& g) const;
  // value mod p (p < 2^62)
  unsigned long long eval_mod(unsigned long long g, unsigned long long p) const;

  std::string str(const std::string& var = "g") const;

 private:
  void trim();
  std::vector<BigInt> c_;
};

// pseudo-remainder: lc(b)^(deg a - deg b + 1) a mod b
IntPolynomial pseudo_remainder(const IntPolynomial& a, const IntPolynomial& b);
// exact quotient a / b over Z; throws std::domain_error when b does not divide a
IntPolynomial exact_div(const IntPolynomial& a, const IntPolynomial& b);
// primitive gcd (leading coefficient positive) times the gcd of the contents
IntPolynomial gcd(const IntPolynomial& a, const IntPolynomial& b);

// num / den, reduced: gcd(num, den) = 1, combined content 1, lc(den) > 0.
class IntRationalFunction {
 public:
  IntRationalFunction() : num_(0), den_(1) {}
  IntRationalFunction(IntPolynomial num, IntPolynomial den);
  IntRationalFunction(long long c) : num_(c), den_(1) {}  // NOLINT

  const IntPolynomial& num() const { return num_; }
  const IntPolynomial& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  // constant value when the function is a constant, otherwise false
  bool is_constant() const { return den_.degree() == 0 && num_.degree() <= 0; }
  Rational constant_value() const;

  friend IntRationalFunction operator+(const IntRationalFunction& a, const IntRationalFunction& b);
  friend IntRationalFunction operator-(const IntRationalFunction& a, const IntRationalFunction& b);
  friend IntRationalFunction operator*(const IntRationalFunction& a, const IntRationalFunction& b);
  bool operator==(const IntRationalFunction& o) const { return num_ == o.num_ && den_ == o.den_; }

  // throws std::domain_error at a pole
  Rational eval(const Rational& g) const;
  std::string str(const std::string& var = "g") const;

 private:
  void canonicalize();
  IntPolynomial num_, den_;
};

}  // namespace alf
