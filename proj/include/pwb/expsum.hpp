#pragma once

#include <vector>

#include "pwb/complexr.hpp"

namespace pwb {

// Closed form of the segment moment integral
//   J_p(s; u0, u1) = int_{u0}^{u1} u^p e^{-s u} du.
// Upward recurrence in p away from s ~ 0, power series near it.
Complex poly_exp_integral(unsigned p, const Complex& s, const Real& u0, const Real& u1);

// int_0^T u^p e^{-s u} du.
inline Complex moment_integral(unsigned p, const Complex& s, const Real& T) {
  return poly_exp_integral(p, s, Real(0), T);
}

// Finite sum of terms c * u^degree * e^{-rate u}. The algebra is closed
// under products and conjugation, and integrals are exact, which is what the
// moment bookkeeping needs end to end.
struct ExpTerm {
  Complex coeff;
  Complex rate;
  unsigned degree = 0;
};

struct ExpSum {
  std::vector<ExpTerm> terms;

  Complex eval(const Real& u) const;
  ExpSum conjugated() const;
  ExpSum scaled(const Complex& s) const;
  Complex integral(const Real& u0, const Real& u1) const;
};

ExpSum operator+(const ExpSum& a, const ExpSum& b);
ExpSum operator*(const ExpSum& a, const ExpSum& b);

// int_{u0}^{u1} a(u) conj(b(u)) du.
Complex inner_product(const ExpSum& a, const ExpSum& b, const Real& u0, const Real& u1);

// ( int_{u0}^{u1} |a(u)|^2 du )^{1/2}.
Real l2_norm(const ExpSum& a, const Real& u0, const Real& u1);

}  // namespace pwb
