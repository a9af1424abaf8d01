#include "pwb/opcalc.hpp"

#include <algorithm>
#include <sstream>

#include "pwb/errors.hpp"

namespace pwb::opcalc {

namespace {

void trim(Mono& m) {
  while (!m.empty() && m.back() == 0) m.pop_back();
}

Mono mono_mul(const Mono& a, const Mono& b) {
  Mono r(std::max(a.size(), b.size()), 0);
  for (size_t i = 0; i < r.size(); ++i) {
    if (i < a.size()) r[i] += a[i];
    if (i < b.size()) r[i] += b[i];
  }
  return r;
}

// d/dx of a monomial, by the jet derivation, as a polynomial.
Poly mono_derivative(const Mono& m) {
  Poly out;
  for (size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    Mono d = m;
    d[i] -= 1;
    if (d.size() <= i + 1) d.resize(i + 2, 0);
    d[i + 1] += 1;
    trim(d);
    out.terms[d] += Rat(static_cast<long>(m[i]));
    if (out.terms[d] == 0) out.terms.erase(d);
  }
  return out;
}

Rat binom(unsigned n, unsigned k) {
  Rat r{1};
  for (unsigned i = 0; i < k; ++i) r = r * Rat(static_cast<long>(n - i)) / Rat(static_cast<long>(i + 1));
  return r;
}

}  // namespace

Poly Poly::zero() { return Poly{}; }

Poly Poly::constant(const Rat& c) {
  Poly p;
  if (c != 0) p.terms[{}] = c;
  return p;
}

Poly Poly::symbol(unsigned jet_order) {
  Poly p;
  Mono m(jet_order + 1, 0);
  m[jet_order] = 1;
  p.terms[m] = 1;
  return p;
}

Poly Poly::derivative_x() const {
  Poly out;
  for (const auto& [m, c] : terms) {
    Poly dm = mono_derivative(m);
    for (const auto& [m2, c2] : dm.terms) {
      out.terms[m2] += c * c2;
      if (out.terms[m2] == 0) out.terms.erase(m2);
    }
  }
  return out;
}

Poly operator+(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b.terms) {
    r.terms[m] += c;
    if (r.terms[m] == 0) r.terms.erase(m);
  }
  return r;
}

Poly operator-(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b.terms) {
    r.terms[m] -= c;
    if (r.terms[m] == 0) r.terms.erase(m);
  }
  return r;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) {
      Mono m = mono_mul(ma, mb);
      r.terms[m] += ca * cb;
      if (r.terms[m] == 0) r.terms.erase(m);
    }
  return r;
}

Poly operator*(const Rat& c, const Poly& a) {
  Poly r;
  if (c == 0) return r;
  for (const auto& [m, v] : a.terms) r.terms[m] = c * v;
  return r;
}

bool operator==(const Poly& a, const Poly& b) { return a.terms == b.terms; }

Coeff Coeff::zero() { return {Poly::zero(), {}}; }
Coeff Coeff::constant(const Rat& c) { return {Poly::constant(c), {}}; }
Coeff Coeff::symbol(unsigned jet_order) { return {Poly::symbol(jet_order), {}}; }

Coeff Coeff::fraction(const Poly& num, const Rat& c_den, const Mono& mono) {
  if (c_den == 0) fail(Errc::BadInput, "zero denominator");
  Coeff c{Rat(1) / c_den * num, mono};
  c.normalize();
  return c;
}

bool Coeff::is_one() const {
  return den.empty() && num.terms.size() == 1 && num.terms.begin()->first.empty() &&
         num.terms.begin()->second == 1;
}

void Coeff::normalize() {
  trim(den);
  if (num.is_zero()) {
    den.clear();
    return;
  }
  // Cancel the variable-wise common part of the denominator monomial with
  // the monomial content of every numerator term.
  for (size_t v = 0; v < den.size(); ++v) {
    if (den[v] == 0) continue;
    unsigned common = den[v];
    for (const auto& [m, c] : num.terms) {
      unsigned e = v < m.size() ? m[v] : 0;
      common = std::min(common, e);
      if (common == 0) break;
    }
    if (common == 0) continue;
    den[v] -= common;
    Poly reduced;
    for (const auto& [m, c] : num.terms) {
      Mono mm = m;
      mm[v] -= common;
      trim(mm);
      reduced.terms[mm] = c;
    }
    num = reduced;
  }
  trim(den);
}

Coeff operator+(const Coeff& a, const Coeff& b) {
  // Common denominator is the variable-wise max of the two monomials.
  Mono lcm(std::max(a.den.size(), b.den.size()), 0);
  for (size_t i = 0; i < lcm.size(); ++i) {
    unsigned ea = i < a.den.size() ? a.den[i] : 0;
    unsigned eb = i < b.den.size() ? b.den[i] : 0;
    lcm[i] = std::max(ea, eb);
  }
  auto lift = [&lcm](const Coeff& c) {
    Mono extra = lcm;
    for (size_t i = 0; i < extra.size(); ++i) extra[i] -= i < c.den.size() ? c.den[i] : 0;
    trim(extra);
    Poly mult;
    mult.terms[extra] = 1;
    return c.num * mult;
  };
  Coeff r{lift(a) + lift(b), lcm};
  r.normalize();
  return r;
}

Coeff operator-(const Coeff& a, const Coeff& b) {
  Coeff nb{Rat(-1) * b.num, b.den};
  return a + nb;
}

Coeff operator*(const Coeff& a, const Coeff& b) {
  Coeff r{a.num * b.num, mono_mul(a.den, b.den)};
  r.normalize();
  return r;
}

bool operator==(const Coeff& a, const Coeff& b) {
  Coeff d = a - b;
  return d.is_zero();
}

Coeff Coeff::derivative_x() const {
  // (num / den)' = (num' den - num den') / den^2 with monomial den.
  Poly den_poly;
  den_poly.terms[den] = 1;
  Poly num2 = num.derivative_x() * den_poly - num * mono_derivative(den);
  Coeff r{num2, mono_mul(den, den)};
  r.normalize();
  return r;
}

DiffOp DiffOp::identity(size_t n) {
  DiffOp p(n, n);
  for (size_t i = 0; i < n; ++i) p.at(i, i)[TermKey{0, 0}] = Coeff::constant(1);
  return p;
}

bool DiffOp::is_zero() const {
  for (const auto& e : entries)
    for (const auto& [k, c] : e)
      if (!c.is_zero()) return false;
  return true;
}

bool DiffOp::is_identity() const {
  if (rows != cols) return false;
  return (*this - DiffOp::identity(rows)).is_zero();
}

unsigned DiffOp::max_dt() const {
  unsigned m = 0;
  for (const auto& e : entries)
    for (const auto& [k, c] : e)
      if (!c.is_zero()) m = std::max(m, k.dt);
  return m;
}

unsigned DiffOp::max_dx() const {
  unsigned m = 0;
  for (const auto& e : entries)
    for (const auto& [k, c] : e)
      if (!c.is_zero()) m = std::max(m, k.dx);
  return m;
}

unsigned DiffOp::max_jet_order() const {
  size_t m = 0;
  for (const auto& e : entries)
    for (const auto& [k, c] : e) {
      for (const auto& [mono, coeff] : c.num.terms) m = std::max(m, mono.size());
      m = std::max(m, c.den.size());
    }
  return m == 0 ? 0 : static_cast<unsigned>(m - 1);
}

namespace {

void entry_add(OpEntry& dst, const TermKey& k, const Coeff& c) {
  auto it = dst.find(k);
  if (it == dst.end()) {
    if (!c.is_zero()) dst[k] = c;
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) dst.erase(it);
}

OpEntry entry_sum(const OpEntry& a, const OpEntry& b, int sign_b) {
  OpEntry r = a;
  for (const auto& [k, c] : b) {
    Coeff cc = sign_b < 0 ? Coeff::constant(-1) * c : c;
    entry_add(r, k, cc);
  }
  return r;
}

// (c1 dt^{a1} dx^{b1}) after (c2 dt^{a2} dx^{b2}): push dx^{b1} through c2.
void entry_compose_into(OpEntry& dst, const TermKey& k1, const Coeff& c1, const TermKey& k2,
                        const Coeff& c2) {
  std::vector<Coeff> dlevels{c2};
  for (unsigned i = 1; i <= k1.dx; ++i) dlevels.push_back(dlevels.back().derivative_x());
  for (unsigned i = 0; i <= k1.dx; ++i) {
    Coeff c = c1 * (Coeff::constant(binom(k1.dx, i)) * dlevels[i]);
    if (c.is_zero()) continue;
    entry_add(dst, TermKey{k1.dt + k2.dt, k1.dx - i + k2.dx}, c);
  }
}

}  // namespace

DiffOp operator+(const DiffOp& a, const DiffOp& b) {
  if (a.rows != b.rows || a.cols != b.cols) fail(Errc::DimensionMismatch, "operator sum");
  DiffOp r(a.rows, a.cols);
  for (size_t i = 0; i < a.entries.size(); ++i) r.entries[i] = entry_sum(a.entries[i], b.entries[i], +1);
  return r;
}

DiffOp operator-(const DiffOp& a, const DiffOp& b) {
  if (a.rows != b.rows || a.cols != b.cols) fail(Errc::DimensionMismatch, "operator difference");
  DiffOp r(a.rows, a.cols);
  for (size_t i = 0; i < a.entries.size(); ++i) r.entries[i] = entry_sum(a.entries[i], b.entries[i], -1);
  return r;
}

bool operator==(const DiffOp& a, const DiffOp& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  return (a - b).is_zero();
}

DiffOp compose(const DiffOp& p, const DiffOp& q) {
  if (p.cols != q.rows) fail(Errc::DimensionMismatch, "operator composition");
  DiffOp r(p.rows, q.cols);
  for (size_t i = 0; i < p.rows; ++i)
    for (size_t j = 0; j < q.cols; ++j) {
      OpEntry& dst = r.at(i, j);
      for (size_t k = 0; k < p.cols; ++k)
        for (const auto& [k1, c1] : p.at(i, k))
          for (const auto& [k2, c2] : q.at(k, j)) entry_compose_into(dst, k1, c1, k2, c2);
    }
  return r;
}

DiffOp scale(const Coeff& c, const DiffOp& p) {
  DiffOp r(p.rows, p.cols);
  for (size_t i = 0; i < p.entries.size(); ++i)
    for (const auto& [k, c2] : p.entries[i]) entry_add(r.entries[i], k, c * c2);
  return r;
}

DiffOp formal_adjoint(const DiffOp& p) {
  DiffOp r(p.cols, p.rows);
  for (size_t i = 0; i < p.rows; ++i)
    for (size_t j = 0; j < p.cols; ++j) {
      OpEntry& dst = r.at(j, i);
      for (const auto& [k, c] : p.at(i, j)) {
        int sign = (k.dt + k.dx) % 2 == 0 ? 1 : -1;
        std::vector<Coeff> dlevels{c};
        for (unsigned q = 1; q <= k.dx; ++q) dlevels.push_back(dlevels.back().derivative_x());
        for (unsigned q = 0; q <= k.dx; ++q) {
          Coeff cc = Coeff::constant(Rat(sign) * binom(k.dx, q)) * dlevels[q];
          if (!cc.is_zero()) entry_add(dst, TermKey{k.dt, k.dx - q}, cc);
        }
      }
    }
  return r;
}

DiffOp scalar_op(const Coeff& c, unsigned dt, unsigned dx) {
  DiffOp p(1, 1);
  if (!c.is_zero()) p.at(0, 0)[TermKey{dt, dx}] = c;
  return p;
}

std::string to_string(const Coeff& c) {
  if (c.is_zero()) return "0";
  std::ostringstream os;
  auto mono_str = [](const Mono& m) {
    std::string s;
    for (size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (!s.empty()) s += "*";
      s += "q" + std::to_string(i);
      if (m[i] > 1) s += "^" + std::to_string(m[i]);
    }
    return s;
  };
  bool first = true;
  os << "(";
  for (const auto& [m, v] : c.num.terms) {
    std::string ms = mono_str(m);
    if (!first) os << " + ";
    first = false;
    os << v.str();
    if (!ms.empty()) os << "*" << ms;
  }
  os << ")";
  std::string ds = mono_str(c.den);
  if (!ds.empty()) os << "/(" << ds << ")";
  return os.str();
}

std::string to_string(const DiffOp& p) {
  std::ostringstream os;
  for (size_t i = 0; i < p.rows; ++i) {
    os << "[ ";
    for (size_t j = 0; j < p.cols; ++j) {
      const OpEntry& e = p.at(i, j);
      if (e.empty()) {
        os << "0";
      } else {
        bool first = true;
        for (const auto& [k, c] : e) {
          if (!first) os << " + ";
          first = false;
          os << to_string(c);
          for (unsigned q = 0; q < k.dt; ++q) os << "*Dt";
          for (unsigned q = 0; q < k.dx; ++q) os << "*Dx";
        }
      }
      if (j + 1 < p.cols) os << " | ";
    }
    os << " ]\n";
  }
  return os.str();
}

DiffOp build_L() {
  DiffOp L(2, 3);
  L.at(0, 0)[TermKey{1, 0}] = Coeff::constant(1);
  L.at(0, 0)[TermKey{0, 2}] = Coeff::constant(-1);
  entry_add(L.at(0, 0), TermKey{0, 0}, Coeff::symbol(0));
  L.at(0, 1)[TermKey{0, 2}] = Coeff::constant(-1);
  L.at(1, 1)[TermKey{1, 0}] = Coeff::constant(1);
  L.at(1, 1)[TermKey{0, 2}] = Coeff::constant(-1);
  L.at(1, 2)[TermKey{0, 0}] = Coeff::constant(-1);
  return L;
}

DiffOp build_Lstar() {
  DiffOp Ls(3, 2);
  Ls.at(0, 0)[TermKey{1, 0}] = Coeff::constant(-1);
  Ls.at(0, 0)[TermKey{0, 2}] = Coeff::constant(-1);
  entry_add(Ls.at(0, 0), TermKey{0, 0}, Coeff::symbol(0));
  Ls.at(1, 0)[TermKey{0, 2}] = Coeff::constant(-1);
  Ls.at(1, 1)[TermKey{1, 0}] = Coeff::constant(-1);
  Ls.at(1, 1)[TermKey{0, 2}] = Coeff::constant(-1);
  Ls.at(2, 1)[TermKey{0, 0}] = Coeff::constant(-1);
  return Ls;
}

MstarChain build_Mstar_chain() {
  MstarChain ch;

  // M1 = (0, -1, dt + dxx).
  ch.M1 = DiffOp(1, 3);
  ch.M1.at(0, 1)[TermKey{0, 0}] = Coeff::constant(-1);
  ch.M1.at(0, 2)[TermKey{1, 0}] = Coeff::constant(1);
  ch.M1.at(0, 2)[TermKey{0, 2}] = Coeff::constant(1);

  // M2 = -M1 - (1, 0, 0).
  DiffOp row100(1, 3);
  row100.at(0, 0)[TermKey{0, 0}] = Coeff::constant(1);
  ch.M2 = scale(Coeff::constant(-1), ch.M1) - row100;

  // M3 = (-2 q1)^{-1} [ (-dt + q0) o M1 + dxx o M2 ].
  DiffOp dtq = scalar_op(Coeff::constant(-1), 1, 0) + scalar_op(Coeff::symbol(0), 0, 0);
  DiffOp inner = compose(dtq, ch.M1) + compose(scalar_op(Coeff::constant(1), 0, 2), ch.M2);
  Mono q1mono{0, 1};
  Coeff inv_m2q1 = Coeff::fraction(Poly::constant(1), Rat(-2), q1mono);
  ch.M3 = scale(inv_m2q1, inner);

  // M4 = dx o M2 - dt o M3.
  ch.M4 = compose(scalar_op(Coeff::constant(1), 0, 1), ch.M2) -
          compose(scalar_op(Coeff::constant(1), 1, 0), ch.M3);

  // M5 = -(q0)^{-1} [ M4 + (q2 / (2 q1)) M2 ] - M3.
  Coeff q2_over_2q1 = Coeff::fraction(Poly::symbol(2), Rat(2), q1mono);
  Mono q0mono{1};
  Coeff inv_mq0 = Coeff::fraction(Poly::constant(1), Rat(-1), q0mono);
  ch.M5 = scale(inv_mq0, ch.M4 + scale(q2_over_2q1, ch.M2)) - ch.M3;

  // M6 = (0, 0, -1).
  ch.M6 = DiffOp(1, 3);
  ch.M6.at(0, 2)[TermKey{0, 0}] = Coeff::constant(-1);

  // Mstar rows: (q0/q1) M5 and M6.
  Coeff q0_over_q1 = Coeff::fraction(Poly::symbol(0), Rat(1), q1mono);
  DiffOp top = scale(q0_over_q1, ch.M5);
  ch.Mstar = DiffOp(2, 3);
  for (size_t j = 0; j < 3; ++j) {
    ch.Mstar.at(0, j) = top.at(0, j);
    ch.Mstar.at(1, j) = ch.M6.at(0, j);
  }
  return ch;
}

IdentityCheck verify_identity_MstarLstar() {
  MstarChain ch = build_Mstar_chain();
  DiffOp comp = compose(ch.Mstar, build_Lstar());
  IdentityCheck out;
  out.residual = comp - DiffOp::identity(2);
  out.ok = out.residual.is_zero();
  return out;
}

IdentityCheck verify_identity_LM() {
  MstarChain ch = build_Mstar_chain();
  DiffOp M = formal_adjoint(ch.Mstar);
  DiffOp comp = compose(build_L(), M);
  IdentityCheck out;
  out.residual = comp - DiffOp::identity(2);
  out.ok = out.residual.is_zero();
  return out;
}

// ---- polynomial substitution ------------------------------------------

BivarPoly BivarPoly::monomial(unsigned a, unsigned b, const Rat& c) {
  BivarPoly p;
  if (c != 0) p.terms[{a, b}] = c;
  return p;
}

BivarPoly BivarPoly::dt() const {
  BivarPoly p;
  for (const auto& [k, c] : terms)
    if (k.first > 0) p.terms[{k.first - 1, k.second}] = c * Rat(static_cast<long>(k.first));
  return p;
}

BivarPoly BivarPoly::dx() const {
  BivarPoly p;
  for (const auto& [k, c] : terms)
    if (k.second > 0) p.terms[{k.first, k.second - 1}] = c * Rat(static_cast<long>(k.second));
  return p;
}

BivarPoly operator+(const BivarPoly& a, const BivarPoly& b) {
  BivarPoly r = a;
  for (const auto& [k, c] : b.terms) {
    r.terms[k] += c;
    if (r.terms[k] == 0) r.terms.erase(k);
  }
  return r;
}

BivarPoly operator-(const BivarPoly& a, const BivarPoly& b) {
  BivarPoly r = a;
  for (const auto& [k, c] : b.terms) {
    r.terms[k] -= c;
    if (r.terms[k] == 0) r.terms.erase(k);
  }
  return r;
}

BivarPoly operator*(const BivarPoly& a, const BivarPoly& b) {
  BivarPoly r;
  for (const auto& [ka, ca] : a.terms)
    for (const auto& [kb, cb] : b.terms) {
      auto key = std::make_pair(ka.first + kb.first, ka.second + kb.second);
      r.terms[key] += ca * cb;
      if (r.terms[key] == 0) r.terms.erase(key);
    }
  return r;
}

bool operator==(const BivarPoly& a, const BivarPoly& b) { return a.terms == b.terms; }

XRat XRat::poly(BivarPoly p) {
  XRat r;
  r.num = std::move(p);
  return r;
}

void XRat::normalize() {
  if (num.is_zero()) {
    xpow = 0;
    return;
  }
  unsigned minx = ~0u;
  for (const auto& [k, c] : num.terms) minx = std::min(minx, k.second);
  unsigned cancel = std::min(minx, xpow);
  if (cancel == 0) return;
  BivarPoly reduced;
  for (const auto& [k, c] : num.terms) reduced.terms[{k.first, k.second - cancel}] = c;
  num = std::move(reduced);
  xpow -= cancel;
}

XRat XRat::dt() const {
  XRat r{num.dt(), xpow};
  r.normalize();
  return r;
}

XRat XRat::dx() const {
  // (num / x^p)' = (num' x - p num) / x^{p+1}.
  XRat r;
  if (xpow == 0) {
    r.num = num.dx();
    r.xpow = 0;
    return r;
  }
  BivarPoly x1 = BivarPoly::monomial(0, 1, Rat(1));
  BivarPoly pnum;
  for (const auto& [k, c] : num.terms) pnum.terms[k] = c * Rat(static_cast<long>(xpow));
  r.num = num.dx() * x1 - pnum;
  r.xpow = xpow + 1;
  r.normalize();
  return r;
}

XRat operator+(const XRat& a, const XRat& b) {
  unsigned p = std::max(a.xpow, b.xpow);
  auto lift = [&p](const XRat& v) {
    BivarPoly shift = BivarPoly::monomial(0, p - v.xpow, Rat(1));
    return v.num * shift;
  };
  XRat r{lift(a) + lift(b), p};
  r.normalize();
  return r;
}

bool operator==(const XRat& a, const XRat& b) {
  BivarPoly xa = BivarPoly::monomial(0, b.xpow, Rat(1));
  BivarPoly xb = BivarPoly::monomial(0, a.xpow, Rat(1));
  return a.num * xa == b.num * xb;
}

namespace {

// q0 -> x, q1 -> 1, higher jets -> 0.
bool subst_mono(const Mono& m, unsigned& xpow) {
  xpow = 0;
  for (size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (i == 0)
      xpow += m[i];
    else if (i == 1)
      ;  // q1 = 1
    else
      return false;  // higher jet vanishes
  }
  return true;
}

XRat subst_coeff(const Coeff& c) {
  unsigned den_pow = 0;
  if (!subst_mono(c.den, den_pow))
    fail(Errc::BadInput, "denominator vanishes under the substitution q(x) = x");
  BivarPoly num;
  for (const auto& [m, v] : c.num.terms) {
    unsigned xp = 0;
    if (!subst_mono(m, xp)) continue;
    num = num + BivarPoly::monomial(0, xp, v);
  }
  XRat r{num, den_pow};
  r.normalize();
  return r;
}

}  // namespace

std::vector<XRat> apply_subst_x(const DiffOp& op, const std::vector<XRat>& comps) {
  if (comps.size() != op.cols) fail(Errc::DimensionMismatch, "component count");
  std::vector<XRat> out(op.rows);
  for (size_t i = 0; i < op.rows; ++i) {
    XRat acc;
    for (size_t j = 0; j < op.cols; ++j) {
      for (const auto& [k, c] : op.at(i, j)) {
        XRat d = comps[j];
        for (unsigned q = 0; q < k.dt; ++q) d = d.dt();
        for (unsigned q = 0; q < k.dx; ++q) d = d.dx();
        XRat cf = subst_coeff(c);
        XRat prod{cf.num * d.num, cf.xpow + d.xpow};
        prod.normalize();
        acc = acc + prod;
      }
    }
    out[i] = acc;
  }
  return out;
}

// ---- numeric application ------------------------------------------------

std::vector<Real> fd_weights(const std::vector<Real>& offsets, unsigned m) {
  // Fornberg's recursion for derivative weights at 0.
  size_t n = offsets.size();
  std::vector<std::vector<Real>> w(m + 1, std::vector<Real>(n));
  Real c1{1};
  w[0][0] = 1;
  for (size_t i = 1; i < n; ++i) {
    Real c2{1};
    for (size_t j = 0; j < i; ++j) {
      Real c3 = offsets[i] - offsets[j];
      c2 *= c3;
      if (j == i - 1) {
        for (unsigned k = std::min<unsigned>(m, static_cast<unsigned>(i)); k >= 1; --k)
          w[k][i] = c1 * (k * w[k - 1][i - 1] - offsets[i - 1] * w[k][i - 1]) / c2;
        w[0][i] = -c1 * offsets[i - 1] * w[0][i - 1] / c2;
      }
      for (unsigned k = std::min<unsigned>(m, static_cast<unsigned>(i)); k >= 1; --k)
        w[k][j] = (offsets[i] * w[k][j] - k * w[k - 1][j]) / c3;
      w[0][j] = offsets[i] * w[0][j] / c3;
    }
    c1 = c2;
  }
  return w[m];
}

Real eval_coeff(const Coeff& c, const std::vector<Real>& jets) {
  auto mono_val = [&jets](const Mono& m) {
    Real v{1};
    for (size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      if (i >= jets.size()) fail(Errc::BadInput, "not enough jet values");
      v *= pow(jets[i], static_cast<int>(m[i]));
    }
    return v;
  };
  Real num{0};
  for (const auto& [m, v] : c.num.terms) num += Real(v) * mono_val(m);
  return num / mono_val(c.den);
}

std::vector<Real> apply_numeric(const DiffOp& op, const std::vector<Field2>& comps,
                                const std::function<std::vector<Real>(const Real&)>& q_jets,
                                const Real& t, const Real& x, const Real& h, unsigned accuracy) {
  if (comps.size() != op.cols) fail(Errc::DimensionMismatch, "component count");
  std::vector<Real> jets = q_jets(x);
  std::vector<Real> out(op.rows, Real(0));
  for (size_t i = 0; i < op.rows; ++i) {
    for (size_t j = 0; j < op.cols; ++j) {
      for (const auto& [k, c] : op.at(i, j)) {
        // Centered stencils in each variable, sized for the accuracy order.
        auto stencil = [&](unsigned m) {
          unsigned pts = m + accuracy;
          if (pts % 2 == 0) ++pts;
          std::vector<Real> offs(pts);
          int half = static_cast<int>(pts / 2);
          for (unsigned s = 0; s < pts; ++s) offs[s] = Real(static_cast<int>(s) - half);
          return offs;
        };
        std::vector<Real> offs_t = stencil(k.dt);
        std::vector<Real> offs_x = stencil(k.dx);
        std::vector<Real> wt = fd_weights(offs_t, k.dt);
        std::vector<Real> wx = fd_weights(offs_x, k.dx);
        Real acc{0};
        for (size_t a = 0; a < offs_t.size(); ++a) {
          if (wt[a] == 0 && k.dt > 0) continue;
          for (size_t b = 0; b < offs_x.size(); ++b) {
            Real val = comps[j](t + offs_t[a] * h, x + offs_x[b] * h);
            acc += wt[a] * wx[b] * val;
          }
        }
        Real hpow = pow(h, static_cast<int>(k.dt + k.dx));
        out[i] += eval_coeff(c, jets) * acc / hpow;
      }
    }
  }
  return out;
}

}  // namespace pwb::opcalc
