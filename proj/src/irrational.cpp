#include "pwb/irrational.hpp"

#include "pwb/errors.hpp"

namespace pwb {

Irrational Irrational::surd(long a, long b, long c, long e) {
  if (c < 2 || perfect_square_root(Int(c))) fail(Errc::BadInput, "surd radicand must be a non-square >= 2");
  if (b == 0 || e == 0) fail(Errc::BadInput, "surd needs b != 0 and e != 0");
  Irrational x;
  x.kind_ = Kind::Surd;
  x.a_ = a;
  x.b_ = b;
  x.c_ = c;
  x.e_ = e;
  return x;
}

Irrational Irrational::continued_fraction(std::vector<Int> terms) {
  if (terms.empty()) fail(Errc::BadInput, "continued fraction needs at least one term");
  for (size_t i = 1; i < terms.size(); ++i)
    if (terms[i] < 1) fail(Errc::BadInput, "partial quotients must be positive");
  Irrational x;
  x.kind_ = Kind::ContinuedFraction;
  x.cf_ = std::move(terms);
  return x;
}

Irrational Irrational::literal(const std::string& decimal, unsigned claimed_digits) {
  Irrational x;
  x.kind_ = Kind::Literal;
  x.literal_ = decimal;
  x.literal_digits_ = claimed_digits;
  return x;
}

unsigned Irrational::max_digits() const {
  return kind_ == Kind::Literal ? literal_digits_ : ~0u;
}

Real Irrational::value(unsigned digits) const {
  switch (kind_) {
    case Kind::Surd: {
      PrecisionGuard guard(std::max(digits + 10, 26u));
      Real v = (Real(a_) + Real(b_) * sqrt(Real(c_))) / Real(e_);
      return v;
    }
    case Kind::Literal: {
      if (digits > literal_digits_)
        fail(Errc::InsufficientPrecision,
             "literal carries " + std::to_string(literal_digits_) + " digits, " +
                 std::to_string(digits) + " required");
      PrecisionGuard guard(std::max(digits + 10, 26u));
      return parse_real(literal_);
    }
    case Kind::ContinuedFraction: {
      // Extend with ones until the convergent denominator certifies the
      // requested accuracy: |x - p/q| <= 1/q^2.
      PrecisionGuard guard(std::max(digits + 10, 26u));
      Int p0{1}, q0{0};          // h_{-1}, k_{-1}
      Int p1 = cf_[0], q1{1};    // h_0, k_0
      Int bound = pow(Int(10), digits / 2 + 2);
      size_t i = 1;
      while (q1 < bound || i <= cf_.size()) {
        Int a = i < cf_.size() ? cf_[i] : Int(1);
        Int p2 = a * p1 + p0;
        Int q2 = a * q1 + q0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        ++i;
        if (i > cf_.size() + 8 * digits + 64) break;
      }
      // Value between consecutive convergents; average for an extra digit.
      Real v = (Real(p1) / Real(q1) + Real(p0) / Real(q0)) / 2;
      return v;
    }
  }
  fail(Errc::BadInput, "unreachable irrational kind");
}

std::vector<std::pair<Int, Int>> Irrational::convergents(size_t count) const {
  if (kind_ != Kind::ContinuedFraction)
    fail(Errc::BadInput, "convergents are only defined for continued-fraction inputs");
  std::vector<std::pair<Int, Int>> out;
  Int p0{1}, q0{0};
  Int p1 = cf_[0], q1{1};
  out.emplace_back(p1, q1);
  for (size_t i = 1; i < count; ++i) {
    Int a = i < cf_.size() ? cf_[i] : Int(1);
    Int p2 = a * p1 + p0;
    Int q2 = a * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    out.emplace_back(p1, q1);
  }
  return out;
}

std::string Irrational::describe() const {
  switch (kind_) {
    case Kind::Surd:
      return "(" + std::to_string(a_) + " + " + std::to_string(b_) + "*sqrt(" +
             std::to_string(c_) + "))/" + std::to_string(e_);
    case Kind::ContinuedFraction: {
      std::string s = "[" + cf_[0].str();
      for (size_t i = 1; i < cf_.size(); ++i) s += (i == 1 ? "; " : ", ") + cf_[i].str();
      return s + ", 1, 1, ...]";
    }
    case Kind::Literal:
      return literal_ + " (" + std::to_string(literal_digits_) + " digits)";
  }
  return "";
}

}  // namespace pwb
