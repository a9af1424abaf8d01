#include "pwb/expsum.hpp"

namespace pwb {

namespace {

// Series of int u^p e^{-su} du for |s|*max|u| small: sum_m (-s)^m/m! *
// (u1^{p+m+1}-u0^{p+m+1})/(p+m+1). Terms decay factorially in this regime.
Complex segment_series(unsigned p, const Complex& s, const Real& u0, const Real& u1) {
  Real cutoff = working_eps();
  Complex acc{};
  Complex spow{Real(1)};
  Real fact{1};
  Real p0 = pow(u0, static_cast<int>(p) + 1);
  Real p1 = pow(u1, static_cast<int>(p) + 1);
  for (unsigned m = 0; m < 4 * current_precision() + 64; ++m) {
    Complex term = spow * ((p1 - p0) / Real(static_cast<int>(p + m + 1)) / fact);
    acc += term;
    if (abs(term) <= cutoff * (1 + abs(acc)) && m > 2) return acc;
    spow *= -s;
    fact *= static_cast<int>(m + 1);
    p0 *= u0;
    p1 *= u1;
  }
  return acc;
}

}  // namespace

Complex poly_exp_integral(unsigned p, const Complex& s, const Real& u0, const Real& u1) {
  Real umax = std::max(abs(u0), abs(u1));
  if (abs(s) * umax < Real(1) / 4) return segment_series(p, s, u0, u1);
  Complex e0 = exp(-s * u0);
  Complex e1 = exp(-s * u1);
  Complex j = (e0 - e1) / s;
  Real pw0 = Real(1), pw1 = Real(1);
  for (unsigned q = 1; q <= p; ++q) {
    pw0 *= u0;
    pw1 *= u1;
    j = (pw0 * e0 - pw1 * e1 + Real(static_cast<int>(q)) * j) / s;
  }
  return j;
}

Complex ExpSum::eval(const Real& u) const {
  Complex acc{};
  for (const auto& t : terms) {
    Real up = t.degree == 0 ? Real(1) : pow(u, static_cast<int>(t.degree));
    acc += t.coeff * up * exp(-t.rate * u);
  }
  return acc;
}

ExpSum ExpSum::conjugated() const {
  ExpSum r;
  r.terms.reserve(terms.size());
  for (const auto& t : terms) r.terms.push_back({conj(t.coeff), conj(t.rate), t.degree});
  return r;
}

ExpSum ExpSum::scaled(const Complex& s) const {
  ExpSum r;
  r.terms.reserve(terms.size());
  for (const auto& t : terms) r.terms.push_back({s * t.coeff, t.rate, t.degree});
  return r;
}

Complex ExpSum::integral(const Real& u0, const Real& u1) const {
  Complex acc{};
  for (const auto& t : terms) acc += t.coeff * poly_exp_integral(t.degree, t.rate, u0, u1);
  return acc;
}

ExpSum operator+(const ExpSum& a, const ExpSum& b) {
  ExpSum r = a;
  r.terms.insert(r.terms.end(), b.terms.begin(), b.terms.end());
  return r;
}

ExpSum operator*(const ExpSum& a, const ExpSum& b) {
  ExpSum r;
  r.terms.reserve(a.terms.size() * b.terms.size());
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms)
      r.terms.push_back({ta.coeff * tb.coeff, ta.rate + tb.rate, ta.degree + tb.degree});
  return r;
}

Complex inner_product(const ExpSum& a, const ExpSum& b, const Real& u0, const Real& u1) {
  return (a * b.conjugated()).integral(u0, u1);
}

Real l2_norm(const ExpSum& a, const Real& u0, const Real& u1) {
  Real v = inner_product(a, a, u0, u1).re;
  if (v < 0) v = 0;
  return sqrt(v);
}

}  // namespace pwb
