#pragma once

#include <vector>

#include "pwb/expsum.hpp"
#include "pwb/linalg.hpp"
#include "pwb/model.hpp"

namespace pwb {

// Family {t^j e^{-Lambda_k t}}, j < degrees[k], on (0, T). Plain exponential
// families have all degrees equal to 1.
struct ExponentFamily {
  std::vector<Complex> exponents;
  std::vector<unsigned> degrees;
  Real T{1};
  unsigned precision = 50;

  static ExponentFamily plain(std::vector<Complex> lambdas, Real T, unsigned precision);
  static ExponentFamily generalized(std::vector<Complex> lambdas, std::vector<unsigned> degrees,
                                    Real T, unsigned precision);

  size_t size() const;  // total number of functions
  // Flattened order: all degrees of exponent 0, then exponent 1, ...
  std::pair<size_t, unsigned> unflatten(size_t idx) const;
  ExpSum basis_function(size_t idx) const;  // t^j e^{-Lambda t} as an ExpSum in t

  void validate() const;
};

// G[a,b] = int_0^T p_a(t) conj(p_b(t)) dt, Hermitian positive definite.
CMat gram_matrix(const ExponentFamily& family);

struct BiorthogonalFamily {
  ExponentFamily family;
  CMat coeffs;          // q_m = sum_i coeffs[i][m] p_i
  Real gram_condition;  // infinity-norm condition estimate
  Real residual;        // max | <p_a, q_b> - delta_ab |

  ExpSum q(size_t m) const;  // q_m as an ExpSum in t
};

// Minimal-L2-norm biorthogonal family (the solution in the span of the p's).
BiorthogonalFamily biortho(const ExponentFamily& family);

// ||q_m||_{L2(0,T)} via the Gram form.
std::vector<Real> norm_profile(const BiorthogonalFamily& bio);

// log||q_m|| / Re(Lambda_m) growth diagnostics; entries with Re <= 0 are skipped.
std::vector<Real> norm_growth_exponents(const BiorthogonalFamily& bio);

// Lower-bidiagonal reduction of the coupled generalized moments when the
// diffusion has a single Jordan chain (alpha = 0): returns A_k^{-1} m_tilde by
// forward substitution. The matrix has diagonal d k^{2j}/j! and subdiagonal
// -k^{2(j-1)}/(j-1)!.
CVec triangular_reduce(const SystemParams& params, int k, const CVec& m_tilde);

// The reduction matrix itself (for independent dense-solve cross-checks).
CMat jordan_moment_matrix(const SystemParams& params, int k);

}  // namespace pwb
