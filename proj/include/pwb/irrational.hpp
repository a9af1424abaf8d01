#pragma once

#include <string>
#include <vector>

#include "pwb/precision.hpp"

namespace pwb {

// Irrationality is an input contract: values enter as surds or continued
// fractions (irrational by construction) and are re-evaluated at whatever
// precision a computation needs. A plain decimal literal is accepted but
// carries a hard precision ceiling.
class Irrational {
 public:
  // (a + b*sqrt(c)) / e with c >= 2 not a perfect square and b != 0.
  static Irrational surd(long a, long b, long c, long e);

  // [a0; a1, a2, ...] extended by an implicit all-ones tail.
  static Irrational continued_fraction(std::vector<Int> terms);

  static Irrational literal(const std::string& decimal, unsigned claimed_digits);

  // Value at >= digits decimal digits; InsufficientPrecision when a literal
  // cannot honor the request.
  Real value(unsigned digits) const;

  unsigned max_digits() const;

  // Convergent (p_i, q_i) pairs; continued-fraction inputs only.
  std::vector<std::pair<Int, Int>> convergents(size_t count) const;

  bool has_convergents() const { return kind_ == Kind::ContinuedFraction; }

  std::string describe() const;

 private:
  enum class Kind { Surd, ContinuedFraction, Literal };
  Kind kind_ = Kind::Surd;
  long a_ = 0, b_ = 1, c_ = 2, e_ = 1;
  std::vector<Int> cf_;
  std::string literal_;
  unsigned literal_digits_ = 0;
};

}  // namespace pwb
