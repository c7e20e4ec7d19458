#pragma once

#include <gmpxx.h>

#include <memory>
#include <string>
#include <vector>

namespace gibbslab {

using Rational = mpq_class;

// Parses "3", "-1/3", "0.25", "2.5e-3" into an exact rational.
Rational parse_rational(const std::string& text);

// Ring Q[t]/(m(t)) for a monic m, or the polynomial ring Q[t] when no
// modulus is given. `value` is the real number t stands for; it is only used
// when converting to double.
class AlgebraicContext {
 public:
  static std::shared_ptr<const AlgebraicContext> quotient(
      std::vector<Rational> monic_low_to_high, double value, std::string label);
  static std::shared_ptr<const AlgebraicContext> polynomial(double value,
                                                            std::string label);

  bool has_modulus() const { return !modulus_.empty(); }
  int degree() const { return static_cast<int>(modulus_.size()) - 1; }
  const std::vector<Rational>& modulus() const { return modulus_; }
  double value() const { return value_; }
  const std::string& label() const { return label_; }

 private:
  std::vector<Rational> modulus_;
  double value_ = 0.0;
  std::string label_;
};

using ContextPtr = std::shared_ptr<const AlgebraicContext>;

// An element of an AlgebraicContext, kept reduced modulo m. Elements without a
// context are rational constants and combine with any context.
class Algebraic {
 public:
  Algebraic() = default;
  Algebraic(long v) : coeffs_{Rational(v)} { trim(); }  // NOLINT
  Algebraic(const Rational& v) : coeffs_{v} { trim(); }  // NOLINT
  Algebraic(ContextPtr ctx, std::vector<Rational> coeffs);

  static Algebraic generator(ContextPtr ctx);

  const ContextPtr& context() const { return ctx_; }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  bool is_constant() const { return coeffs_.size() <= 1; }

  Algebraic& operator+=(const Algebraic& o);
  Algebraic& operator-=(const Algebraic& o);
  Algebraic& operator*=(const Algebraic& o);
  Algebraic& operator/=(const Algebraic& o) { return *this *= o.inverse(); }
  Algebraic operator-() const;

  // Throws std::domain_error when the element is not a unit of the ring.
  Algebraic inverse() const;

  double to_double() const;
  std::string to_string() const;

  friend Algebraic operator+(Algebraic a, const Algebraic& b) { return a += b; }
  friend Algebraic operator-(Algebraic a, const Algebraic& b) { return a -= b; }
  friend Algebraic operator*(Algebraic a, const Algebraic& b) { return a *= b; }
  friend Algebraic operator/(Algebraic a, const Algebraic& b) { return a /= b; }
  friend bool operator==(const Algebraic& a, const Algebraic& b);
  friend bool operator!=(const Algebraic& a, const Algebraic& b) { return !(a == b); }

 private:
  void adopt(const Algebraic& o);
  void trim();
  void reduce();

  ContextPtr ctx_;
  std::vector<Rational> coeffs_;  // low to high degree
};

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.get_d(); }
inline double to_double(const Algebraic& v) { return v.to_double(); }

std::string to_string(double v);
std::string to_string(const Rational& v);
inline std::string to_string(const Algebraic& v) { return v.to_string(); }

// Conversions used to instantiate oracle templates from exact inputs.
template <class S>
S scalar_from_rational(const Rational& r);
template <>
inline double scalar_from_rational<double>(const Rational& r) { return r.get_d(); }
template <>
inline Rational scalar_from_rational<Rational>(const Rational& r) { return r; }
template <>
inline Algebraic scalar_from_rational<Algebraic>(const Rational& r) { return Algebraic(r); }

template <class S>
S ipow(const S& base, int exponent) {
  S result = S(1);
  S b = base;
  while (exponent > 0) {
    if (exponent & 1) result = result * b;
    exponent >>= 1;
    if (exponent) b = b * b;
  }
  return result;
}

// Table of base^0 .. base^max.
template <class S>
std::vector<S> power_table(const S& base, int max) {
  std::vector<S> out;
  out.reserve(max + 1);
  out.push_back(S(1));
  for (int i = 1; i <= max; ++i) out.push_back(out.back() * base);
  return out;
}

}  // namespace gibbslab
