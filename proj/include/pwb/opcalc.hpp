#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pwb/precision.hpp"

namespace pwb::opcalc {

// ---- coefficient ring -------------------------------------------------
//
// Coefficients live in the fraction field generated by the jet symbols
// q0 = q, q1 = q_x, q2 = q_xx, ... with derivation d/dx(q_i) = q_{i+1}.
// Every denominator arising in the construction is a monomial in the jets,
// so a coefficient is kept as polynomial / monomial in canonical form.

using Mono = std::vector<unsigned>;  // exponent per jet symbol, trailing zeros trimmed

struct Poly {
  std::map<Mono, Rat> terms;  // monomial -> rational coefficient

  static Poly zero();
  static Poly constant(const Rat& c);
  static Poly symbol(unsigned jet_order);

  bool is_zero() const { return terms.empty(); }
  Poly derivative_x() const;  // jet derivation
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator-(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
Poly operator*(const Rat& c, const Poly& a);
bool operator==(const Poly& a, const Poly& b);

struct Coeff {
  Poly num;
  Mono den;  // monomial with unit coefficient

  static Coeff zero();
  static Coeff constant(const Rat& c);
  static Coeff symbol(unsigned jet_order);
  // c * q_{j0}^{e0} ... in the denominator: num / (c_den * mono).
  static Coeff fraction(const Poly& num, const Rat& c_den, const Mono& mono);

  bool is_zero() const { return num.is_zero(); }
  bool is_one() const;
  Coeff derivative_x() const;
  void normalize();
};

Coeff operator+(const Coeff& a, const Coeff& b);
Coeff operator-(const Coeff& a, const Coeff& b);
Coeff operator*(const Coeff& a, const Coeff& b);
bool operator==(const Coeff& a, const Coeff& b);

// ---- matrix differential operators -------------------------------------

struct TermKey {
  unsigned dt = 0;
  unsigned dx = 0;
  bool operator<(const TermKey& o) const { return dt != o.dt ? dt < o.dt : dx < o.dx; }
  bool operator==(const TermKey& o) const { return dt == o.dt && dx == o.dx; }
};

using OpEntry = std::map<TermKey, Coeff>;  // sum coeff * dt^a dx^b, canonical

struct DiffOp {
  size_t rows = 0, cols = 0;
  std::vector<OpEntry> entries;

  DiffOp() = default;
  DiffOp(size_t r, size_t c) : rows(r), cols(c), entries(r * c) {}

  static DiffOp identity(size_t n);

  OpEntry& at(size_t i, size_t j) { return entries[i * cols + j]; }
  const OpEntry& at(size_t i, size_t j) const { return entries[i * cols + j]; }

  bool is_zero() const;
  bool is_identity() const;
  unsigned max_dt() const;
  unsigned max_dx() const;
  unsigned max_jet_order() const;  // highest q_i appearing
};

DiffOp operator+(const DiffOp& a, const DiffOp& b);
DiffOp operator-(const DiffOp& a, const DiffOp& b);
bool operator==(const DiffOp& a, const DiffOp& b);

// Leibniz-expanded composition (P after Q).
DiffOp compose(const DiffOp& p, const DiffOp& q);

// Left multiplication by a coefficient function.
DiffOp scale(const Coeff& c, const DiffOp& p);

// Formal adjoint: coeff dt^a dx^b -> (-1)^{a+b} dt^a dx^b \circ coeff,
// entries transposed.
DiffOp formal_adjoint(const DiffOp& p);

// Scalar building block c * dt^a dx^b as a 1x1 operator.
DiffOp scalar_op(const Coeff& c, unsigned dt, unsigned dx);

std::string to_string(const Coeff& c);
std::string to_string(const DiffOp& p);

// ---- the resolvability chain -------------------------------------------

DiffOp build_L();      // 2x3 forward operator
DiffOp build_Lstar();  // 3x2 adjoint operator

struct MstarChain {
  DiffOp M1, M2, M3, M4, M5, M6;  // 1x3 rows
  DiffOp Mstar;                   // 2x3
};

MstarChain build_Mstar_chain();

struct IdentityCheck {
  bool ok = false;
  DiffOp residual;  // composition minus identity
};

IdentityCheck verify_identity_MstarLstar();
IdentityCheck verify_identity_LM();

// ---- polynomial substitution oracle (q(x) = x) ---------------------------

struct BivarPoly {
  std::map<std::pair<unsigned, unsigned>, Rat> terms;  // t^a x^b -> coeff

  static BivarPoly monomial(unsigned a, unsigned b, const Rat& c);
  bool is_zero() const { return terms.empty(); }
  BivarPoly dt() const;
  BivarPoly dx() const;
};

BivarPoly operator+(const BivarPoly& a, const BivarPoly& b);
BivarPoly operator-(const BivarPoly& a, const BivarPoly& b);
BivarPoly operator*(const BivarPoly& a, const BivarPoly& b);
bool operator==(const BivarPoly& a, const BivarPoly& b);

// num / x^xpow, canonical (x does not divide num unless xpow == 0).
struct XRat {
  BivarPoly num;
  unsigned xpow = 0;

  static XRat poly(BivarPoly p);
  void normalize();
  XRat dt() const;
  XRat dx() const;
  bool is_zero() const { return num.is_zero(); }
};

XRat operator+(const XRat& a, const XRat& b);
bool operator==(const XRat& a, const XRat& b);

// Apply the operator with q(x) = x substituted (q0 = x, q1 = 1, rest 0).
std::vector<XRat> apply_subst_x(const DiffOp& op, const std::vector<XRat>& comps);

// ---- numeric application ---------------------------------------------

// Finite-difference weights for the m-th derivative at 0 on the given
// offsets (classic divided-difference recursion).
std::vector<Real> fd_weights(const std::vector<Real>& offsets, unsigned m);

// Evaluate a coefficient given numeric jet values (q0(x), q1(x), ...).
Real eval_coeff(const Coeff& c, const std::vector<Real>& jets);

using Field2 = std::function<Real(const Real& t, const Real& x)>;

// Apply op to the component functions by centered finite differences of the
// given accuracy order, with exact coefficient evaluation from the jets.
std::vector<Real> apply_numeric(const DiffOp& op, const std::vector<Field2>& comps,
                                const std::function<std::vector<Real>(const Real&)>& q_jets,
                                const Real& t, const Real& x, const Real& h, unsigned accuracy = 4);

}  // namespace pwb::opcalc
