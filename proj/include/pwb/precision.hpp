#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <optional>
#include <string>

#include "pwb/errors.hpp"

namespace pwb {

namespace mp = boost::multiprecision;

// Arbitrary-precision real with a runtime-selected number of decimal digits.
// Expression templates are off so values compose cleanly inside Complex and
// the dense containers.
using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;
using Int = mp::mpz_int;
using Rat = mp::mpq_rational;

inline unsigned current_precision() { return Real::default_precision(); }

// Scopes the working precision (decimal digits) to a block. Every module
// entry point installs one from its parameter set before touching numbers.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned digits10) : saved_(Real::default_precision()) {
    if (digits10 < 16) fail(Errc::BadInput, "precision must be at least 16 digits");
    Real::default_precision(digits10);
  }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;
  ~PrecisionGuard() { Real::default_precision(saved_); }

 private:
  unsigned saved_;
};

inline Real pi() {
  Real x;
  mpfr_const_pi(x.backend().data(), MPFR_RNDN);
  return x;
}

inline Real ten_pow(long e) { return pow(Real(10), e); }

// Unit roundoff at the current working precision.
inline Real working_eps() { return ten_pow(-static_cast<long>(current_precision())); }

inline Real parse_real(const std::string& s) {
  try {
    return Real(s);
  } catch (const std::exception&) {
    fail(Errc::BadInput, "cannot parse real number '" + s + "'");
  }
}

// Decimal-string form used by every on-disk record; digits defaults to the
// working precision so round-trips lose nothing.
inline std::string dec(const Real& x, unsigned digits = 0) {
  if (digits == 0) digits = current_precision();
  return x.str(digits, std::ios_base::scientific);
}

inline Real real_from_rat(const Rat& q) { return Real(q); }

// Exact rational from a plain decimal or "p/q" literal; rejects anything a
// finite decimal cannot represent.
inline std::optional<Rat> parse_exact_rational(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      Int num(s.substr(0, slash));
      Int den(s.substr(slash + 1));
      if (den == 0) return std::nullopt;
      return Rat(num, den);
    }
    std::string t = s;
    bool neg = false;
    if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
      neg = t[0] == '-';
      t = t.substr(1);
    }
    long exp10 = 0;
    auto epos = t.find_first_of("eE");
    if (epos != std::string::npos) {
      exp10 = std::stol(t.substr(epos + 1));
      t = t.substr(0, epos);
    }
    auto dot = t.find('.');
    std::string digits = t;
    if (dot != std::string::npos) {
      digits = t.substr(0, dot) + t.substr(dot + 1);
      exp10 -= static_cast<long>(t.size() - dot - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      return std::nullopt;
    // Leading zeros would read as an octal literal.
    auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    Rat r{Int(digits), 1};
    Int p10 = pow(Int(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
    if (exp10 < 0)
      r /= Rat(p10);
    else
      r *= Rat(p10);
    if (neg) r = -r;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline bool is_integer(const Rat& q) { return denominator(q) == 1; }

// m with m*m == v, when v is a perfect square.
inline std::optional<Int> perfect_square_root(const Int& v) {
  if (v < 0) return std::nullopt;
  Int r = sqrt(v);
  if (r * r == v) return r;
  return std::nullopt;
}

// m in N* with ratio == m^2, for exact resonance tests.
inline std::optional<Int> sqrt_as_positive_integer(const Rat& ratio) {
  if (ratio <= 0 || !is_integer(ratio)) return std::nullopt;
  auto root = perfect_square_root(numerator(ratio));
  if (!root || *root == 0) return std::nullopt;
  return root;
}

}  // namespace pwb
