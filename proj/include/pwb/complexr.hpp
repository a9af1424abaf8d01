#pragma once

#include "pwb/precision.hpp"

namespace pwb {

// Complex number over the arbitrary-precision Real. std::complex is UB for
// non-builtin scalars, so this carries the handful of operations the
// workbench needs.
struct Complex {
  Real re{0};
  Real im{0};

  Complex() = default;
  Complex(Real r) : re(std::move(r)) {}  // NOLINT: implicit on purpose
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  Complex(int r) : re(r) {}  // NOLINT
  Complex(long r) : re(r) {}  // NOLINT

  bool is_real() const { return im == 0; }
};

inline Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
inline Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
inline Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
inline Complex operator*(const Complex& a, const Complex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Complex operator*(const Real& s, const Complex& a) { return {s * a.re, s * a.im}; }
inline Complex operator*(const Complex& a, const Real& s) { return {a.re * s, a.im * s}; }
inline Complex operator/(const Complex& a, const Complex& b) {
  Real d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline Complex operator/(const Complex& a, const Real& s) { return {a.re / s, a.im / s}; }
inline Complex& operator+=(Complex& a, const Complex& b) { a = a + b; return a; }
inline Complex& operator-=(Complex& a, const Complex& b) { a = a - b; return a; }
inline Complex& operator*=(Complex& a, const Complex& b) { a = a * b; return a; }
inline bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }
inline bool operator!=(const Complex& a, const Complex& b) { return !(a == b); }

inline Complex conj(const Complex& a) { return {a.re, -a.im}; }
inline Real norm2(const Complex& a) { return a.re * a.re + a.im * a.im; }
inline Real abs(const Complex& a) { return sqrt(norm2(a)); }
inline Real arg(const Complex& a) { return atan2(a.im, a.re); }

inline Complex polar(const Real& r, const Real& theta) { return {r * cos(theta), r * sin(theta)}; }

inline Complex exp(const Complex& a) {
  Real m = exp(a.re);
  return {m * cos(a.im), m * sin(a.im)};
}

inline Complex pow_uint(Complex base, unsigned e) {
  Complex acc{Real(1)};
  while (e) {
    if (e & 1u) acc *= base;
    base *= base;
    e >>= 1u;
  }
  return acc;
}

inline std::string dec(const Complex& z, unsigned digits = 0) {
  return "(" + dec(z.re, digits) + ", " + dec(z.im, digits) + ")";
}

}  // namespace pwb
