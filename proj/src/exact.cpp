#include "gibbslab/exact.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace gibbslab {

namespace {

using Poly = std::vector<Rational>;

void trim_poly(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, Rational(0));
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  trim_poly(out);
  return out;
}

Poly poly_sub(Poly a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), Rational(0));
  for (size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  trim_poly(a);
  return a;
}

// Division with remainder by a nonzero divisor (not necessarily monic).
void poly_divmod(const Poly& num, const Poly& den, Poly& quot, Poly& rem) {
  rem = num;
  trim_poly(rem);
  quot.clear();
  if (rem.size() < den.size()) return;
  quot.assign(rem.size() - den.size() + 1, Rational(0));
  const Rational lead = den.back();
  while (!rem.empty() && rem.size() >= den.size()) {
    const size_t shift = rem.size() - den.size();
    const Rational factor = rem.back() / lead;
    quot[shift] = factor;
    for (size_t i = 0; i < den.size(); ++i) rem[i + shift] -= factor * den[i];
    rem.pop_back();
    trim_poly(rem);
  }
  trim_poly(quot);
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw std::invalid_argument("empty number");
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    Rational out = num / den;
    out.canonicalize();
    return out;
  }
  size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  mpz_class digits = 0;
  long frac_digits = 0;
  bool seen_digit = false;
  bool in_fraction = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (in_fraction) ++frac_digits;
      seen_digit = true;
    } else if (c == '.' && !in_fraction) {
      in_fraction = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw std::invalid_argument("not a number: '" + text + "'");
  long exponent = 0;
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw std::invalid_argument("not a number: '" + text + "'");
    const std::string rest = s.substr(pos + 1);
    size_t used = 0;
    try {
      exponent = std::stol(rest, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad exponent in '" + text + "'");
    }
    if (used != rest.size()) throw std::invalid_argument("bad exponent in '" + text + "'");
  }
  exponent -= frac_digits;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rational out = exponent >= 0 ? Rational(digits * scale) : Rational(digits, scale);
  out.canonicalize();
  return negative ? Rational(-out) : out;
}

std::shared_ptr<const AlgebraicContext> AlgebraicContext::quotient(std::vector<Rational> monic,
                                                                   double value,
                                                                   std::string label) {
  trim_poly(monic);
  if (monic.size() < 2 || monic.back() != 1)
    throw std::invalid_argument("modulus must be monic of degree >= 1");
  auto ctx = std::make_shared<AlgebraicContext>();
  ctx->modulus_ = std::move(monic);
  ctx->value_ = value;
  ctx->label_ = std::move(label);
  return ctx;
}

std::shared_ptr<const AlgebraicContext> AlgebraicContext::polynomial(double value,
                                                                     std::string label) {
  auto ctx = std::make_shared<AlgebraicContext>();
  ctx->value_ = value;
  ctx->label_ = std::move(label);
  return ctx;
}

Algebraic::Algebraic(ContextPtr ctx, std::vector<Rational> coeffs)
    : ctx_(std::move(ctx)), coeffs_(std::move(coeffs)) {
  reduce();
}

Algebraic Algebraic::generator(ContextPtr ctx) {
  return Algebraic(std::move(ctx), {Rational(0), Rational(1)});
}

void Algebraic::trim() { trim_poly(coeffs_); }

void Algebraic::reduce() {
  trim();
  if (!ctx_ || !ctx_->has_modulus()) return;
  const Poly& m = ctx_->modulus();
  if (coeffs_.size() < m.size()) return;
  Poly q, r;
  poly_divmod(coeffs_, m, q, r);
  coeffs_ = std::move(r);
}

void Algebraic::adopt(const Algebraic& o) {
  if (!o.ctx_) return;
  if (!ctx_) {
    ctx_ = o.ctx_;
    return;
  }
  if (ctx_ != o.ctx_) throw std::invalid_argument("mixing elements of different algebraic contexts");
}

Algebraic& Algebraic::operator+=(const Algebraic& o) {
  adopt(o);
  if (coeffs_.size() < o.coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  trim();
  return *this;
}

Algebraic& Algebraic::operator-=(const Algebraic& o) {
  adopt(o);
  coeffs_ = poly_sub(std::move(coeffs_), o.coeffs_);
  return *this;
}

Algebraic& Algebraic::operator*=(const Algebraic& o) {
  adopt(o);
  coeffs_ = poly_mul(coeffs_, o.coeffs_);
  reduce();
  return *this;
}

Algebraic Algebraic::operator-() const {
  Algebraic out = *this;
  for (auto& c : out.coeffs_) c = -c;
  return out;
}

Algebraic Algebraic::inverse() const {
  if (is_zero()) throw std::domain_error("division by zero");
  if (is_constant()) {
    Algebraic out(Rational(1) / coeffs_[0]);
    out.ctx_ = ctx_;
    return out;
  }
  if (!ctx_ || !ctx_->has_modulus())
    throw std::domain_error("non-constant polynomial has no inverse in Q[t]");
  // Extended Euclid: track s with s*a == r (mod m).
  Poly r0 = ctx_->modulus(), r1 = coeffs_;
  Poly s0, s1{Rational(1)};
  while (!r1.empty()) {
    Poly q, rem;
    poly_divmod(r0, r1, q, rem);
    Poly s2 = poly_sub(s0, poly_mul(q, s1));
    r0 = std::move(r1);
    r1 = std::move(rem);
    s0 = std::move(s1);
    s1 = std::move(s2);
  }
  if (r0.size() != 1) throw std::domain_error("element is a zero divisor of " + ctx_->label());
  const Rational lead = r0[0];
  for (auto& c : s0) c /= lead;
  return Algebraic(ctx_, s0);
}

bool operator==(const Algebraic& a, const Algebraic& b) {
  if (a.ctx_ && b.ctx_ && a.ctx_ != b.ctx_)
    throw std::invalid_argument("comparing elements of different algebraic contexts");
  return a.coeffs_ == b.coeffs_;
}

double Algebraic::to_double() const {
  const double t = ctx_ ? ctx_->value() : 0.0;
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + it->get_d();
  return acc;
}

std::string Algebraic::to_string() const {
  if (coeffs_.empty()) return "0";
  const std::string var = ctx_ ? ctx_->label() : "t";
  std::ostringstream os;
  bool first = true;
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    if (!first) os << " + ";
    first = false;
    os << coeffs_[i].get_str();
    if (i >= 1) os << "*" << var;
    if (i >= 2) os << "^" << i;
  }
  return os.str();
}

std::string to_string(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(const Rational& v) { return v.get_str(); }

}  // namespace gibbslab
