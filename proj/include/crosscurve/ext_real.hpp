#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>

#include "crosscurve/errors.hpp"

namespace crosscurve {

// Extended scalars over [-inf,+inf]. Addition and subtraction follow the
// totally-ordered-set rules; the four ill-posed combinations produce a
// distinct Undefined state whose resolution to +inf or -inf is supplied by
// the call site.
enum class XKind : std::uint8_t { Finite, PosInf, NegInf, Undefined };

template <class T>
class Ext {
 public:
  Ext() : kind_(XKind::Finite), v_(T(0)) {}
  Ext(T v) : kind_(XKind::Finite), v_(v) {}  // NOLINT(google-explicit-constructor)

  static Ext pos_inf() { return Ext(XKind::PosInf); }
  static Ext neg_inf() { return Ext(XKind::NegInf); }
  static Ext undefined() { return Ext(XKind::Undefined); }

  XKind kind() const { return kind_; }
  bool finite() const { return kind_ == XKind::Finite; }
  bool is_pos_inf() const { return kind_ == XKind::PosInf; }
  bool is_neg_inf() const { return kind_ == XKind::NegInf; }
  bool is_undefined() const { return kind_ == XKind::Undefined; }

  T value() const {
    if (!finite()) throw NumericError("Ext::value on non-finite scalar");
    return v_;
  }

  Ext operator-() const {
    switch (kind_) {
      case XKind::Finite: return Ext(-v_);
      case XKind::PosInf: return neg_inf();
      case XKind::NegInf: return pos_inf();
      default: return undefined();
    }
  }

  friend Ext operator+(const Ext& a, const Ext& b) {
    if (a.is_undefined() || b.is_undefined()) return undefined();
    if (a.finite() && b.finite()) return Ext(a.v_ + b.v_);
    if (a.is_pos_inf()) return b.is_neg_inf() ? undefined() : pos_inf();
    if (a.is_neg_inf()) return b.is_pos_inf() ? undefined() : neg_inf();
    return b;  // a finite, b infinite
  }

  friend Ext operator-(const Ext& a, const Ext& b) { return a + (-b); }

  /// Multiply by a nonnegative coefficient. scale(0) of an infinity is 0,
  /// which only ever occurs at chord endpoints where the other term carries
  /// the whole combination.
  Ext scale(T s) const {
    if (is_undefined()) return undefined();
    if (s == T(0)) return Ext(T(0));
    if (finite()) return Ext(v_ * s);
    if (T(0) < s) return *this;
    return pos_inf_flag() ? neg_inf() : pos_inf();
  }

  /// Replace an Undefined value by the stated resolution; other values pass.
  Ext resolve(XKind to) const {
    if (!is_undefined()) return *this;
    return Ext(to);
  }

  friend bool operator==(const Ext& a, const Ext& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == XKind::Finite) return a.v_ == b.v_;
    return a.kind_ != XKind::Undefined;  // Undefined compares unequal to itself
  }

  // Total order on [-inf,+inf]; comparing an Undefined value is an error.
  friend bool operator<(const Ext& a, const Ext& b) {
    if (a.is_undefined() || b.is_undefined()) throw NumericError("ordering an undefined combination");
    if (a.kind_ == b.kind_) return a.finite() && a.v_ < b.v_;
    if (a.is_neg_inf() || b.is_pos_inf()) return true;
    return false;
  }
  friend bool operator<=(const Ext& a, const Ext& b) { return a < b || a == b; }

 private:
  explicit Ext(XKind k) : kind_(k), v_(T(0)) {}
  bool pos_inf_flag() const { return kind_ == XKind::PosInf; }

  XKind kind_;
  T v_;
};

using ExtReal = Ext<double>;

/// Convex combination (1-s)a + s b with undefined combinations resolved per
/// context: +inf for the NNCC right-hand side, -inf for phi_s.
template <class T>
Ext<T> chord_combination(const Ext<T>& a, const Ext<T>& b, T s, XKind undefined_to) {
  return (a.scale(T(1) - s) + b.scale(s)).resolve(undefined_to);
}

// Exact rational scalar for the finite-table operations. Small numerators and
// denominators only; intermediate products go through __int128.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT
  Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational::from128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational::from128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }

  friend Rational operator*(const Rational& a, long long k) { return a * Rational(k); }
  double to_double() const { return double(num_) / double(den_); }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.num_ << "/" << r.den_;
  }

 private:
  using i128 = __int128;
  static Rational from128(i128 n, i128 d) {
    if (d < 0) { n = -n; d = -d; }
    i128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    Rational r;
    r.num_ = static_cast<long long>(n);
    r.den_ = static_cast<long long>(d);
    return r;
  }
  static i128 gcd128(i128 a, i128 b) { while (b) { i128 t = a % b; a = b; b = t; } return a ? a : 1; }
  void normalize() {
    if (den_ == 0) throw NumericError("rational with zero denominator");
    *this = from128(num_, den_);
  }

  long long num_, den_;
};

using ExtRational = Ext<Rational>;

}  // namespace crosscurve
