#pragma once

#include <vector>

#include "pwb/precision.hpp"

namespace pwb {

// Truncated Taylor expansion around a point: coeffs[m] = f^{(m)}/m!.
// Carries derivative bookkeeping for the piecewise constructions.
struct Jet {
  std::vector<Real> coeffs;

  explicit Jet(unsigned order = 0) : coeffs(order + 1) {}

  static Jet constant(const Real& v, unsigned order) {
    Jet j(order);
    j.coeffs[0] = v;
    return j;
  }
  static Jet variable(const Real& x0, unsigned order) {
    Jet j(order);
    j.coeffs[0] = x0;
    if (order >= 1) j.coeffs[1] = 1;
    return j;
  }

  unsigned order() const { return static_cast<unsigned>(coeffs.size()) - 1; }
  const Real& value() const { return coeffs[0]; }
  Real derivative(unsigned m) const {
    if (m >= coeffs.size()) return Real(0);
    Real f{1};
    for (unsigned i = 2; i <= m; ++i) f *= i;
    return coeffs[m] * f;
  }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r(std::max(a.order(), b.order()));
  for (unsigned m = 0; m < r.coeffs.size(); ++m) {
    if (m < a.coeffs.size()) r.coeffs[m] += a.coeffs[m];
    if (m < b.coeffs.size()) r.coeffs[m] += b.coeffs[m];
  }
  return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r(std::max(a.order(), b.order()));
  for (unsigned m = 0; m < r.coeffs.size(); ++m) {
    if (m < a.coeffs.size()) r.coeffs[m] += a.coeffs[m];
    if (m < b.coeffs.size()) r.coeffs[m] -= b.coeffs[m];
  }
  return r;
}

inline Jet operator*(const Real& s, const Jet& a) {
  Jet r = a;
  for (auto& c : r.coeffs) c *= s;
  return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r(std::max(a.order(), b.order()));
  for (unsigned m = 0; m < r.coeffs.size(); ++m) {
    Real acc{0};
    for (unsigned i = 0; i <= m; ++i) {
      if (i >= a.coeffs.size() || m - i >= b.coeffs.size()) continue;
      acc += a.coeffs[i] * b.coeffs[m - i];
    }
    r.coeffs[m] = acc;
  }
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  Jet r(std::max(a.order(), b.order()));
  for (unsigned m = 0; m < r.coeffs.size(); ++m) {
    Real acc = m < a.coeffs.size() ? a.coeffs[m] : Real(0);
    for (unsigned i = 1; i <= m; ++i) {
      if (i >= b.coeffs.size()) continue;
      acc -= b.coeffs[i] * r.coeffs[m - i];
    }
    r.coeffs[m] = acc / b.coeffs[0];
  }
  return r;
}

inline Jet exp(const Jet& a) {
  Jet r(a.order());
  r.coeffs[0] = exp(a.coeffs[0]);
  for (unsigned m = 1; m < r.coeffs.size(); ++m) {
    Real acc{0};
    for (unsigned i = 1; i <= m; ++i) {
      if (i >= a.coeffs.size()) continue;
      acc += Real(static_cast<int>(i)) * a.coeffs[i] * r.coeffs[m - i];
    }
    r.coeffs[m] = acc / static_cast<int>(m);
  }
  return r;
}

inline void sincos(const Jet& a, Jet& s, Jet& c) {
  s = Jet(a.order());
  c = Jet(a.order());
  s.coeffs[0] = sin(a.coeffs[0]);
  c.coeffs[0] = cos(a.coeffs[0]);
  for (unsigned m = 1; m <= a.order(); ++m) {
    Real ss{0}, cc{0};
    for (unsigned i = 1; i <= m; ++i) {
      if (i >= a.coeffs.size()) continue;
      ss += Real(static_cast<int>(i)) * a.coeffs[i] * c.coeffs[m - i];
      cc += Real(static_cast<int>(i)) * a.coeffs[i] * s.coeffs[m - i];
    }
    s.coeffs[m] = ss / static_cast<int>(m);
    c.coeffs[m] = -cc / static_cast<int>(m);
  }
}

inline Jet sin(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return s;
}

inline Jet cos(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return c;
}

}  // namespace pwb
