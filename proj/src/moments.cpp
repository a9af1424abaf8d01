#include "pwb/moments.hpp"

#include "pwb/errors.hpp"

namespace pwb {

ExponentFamily ExponentFamily::plain(std::vector<Complex> lambdas, Real T, unsigned precision) {
  ExponentFamily f;
  f.exponents = std::move(lambdas);
  f.degrees.assign(f.exponents.size(), 1u);
  f.T = std::move(T);
  f.precision = precision;
  f.validate();
  return f;
}

ExponentFamily ExponentFamily::generalized(std::vector<Complex> lambdas,
                                           std::vector<unsigned> degrees, Real T,
                                           unsigned precision) {
  ExponentFamily f;
  f.exponents = std::move(lambdas);
  f.degrees = std::move(degrees);
  f.T = std::move(T);
  f.precision = precision;
  f.validate();
  return f;
}

size_t ExponentFamily::size() const {
  size_t s = 0;
  for (unsigned d : degrees) s += d;
  return s;
}

std::pair<size_t, unsigned> ExponentFamily::unflatten(size_t idx) const {
  for (size_t k = 0; k < degrees.size(); ++k) {
    if (idx < degrees[k]) return {k, static_cast<unsigned>(idx)};
    idx -= degrees[k];
  }
  fail(Errc::IndexMismatch, "flattened index out of range");
}

ExpSum ExponentFamily::basis_function(size_t idx) const {
  auto [k, j] = unflatten(idx);
  ExpSum s;
  s.terms.push_back({Complex{Real(1)}, exponents[k], j});
  return s;
}

void ExponentFamily::validate() const {
  if (exponents.size() != degrees.size()) fail(Errc::IndexMismatch, "degrees/exponents mismatch");
  if (exponents.empty()) fail(Errc::BadInput, "empty exponent family");
  if (!(T > 0)) fail(Errc::BadInput, "horizon T must be positive");
  for (unsigned d : degrees)
    if (d < 1) fail(Errc::BadInput, "polynomial degree count must be >= 1");
  bool plain = true;
  for (unsigned d : degrees) plain = plain && d == 1;
  PrecisionGuard guard(precision);
  Real tol = ten_pow(-static_cast<long>(precision) + 8);
  for (size_t i = 0; i < exponents.size(); ++i) {
    if (!(exponents[i].re > 0))
      fail(Errc::BadInput, "exponent " + std::to_string(i) + " must have positive real part");
    if (plain)
      for (size_t j = i + 1; j < exponents.size(); ++j)
        if (abs(exponents[i] - exponents[j]) <= tol * (1 + abs(exponents[i])))
          fail(Errc::DegenerateExponents,
               "exponents " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
  }
}

CMat gram_matrix(const ExponentFamily& family) {
  family.validate();
  PrecisionGuard guard(family.precision);
  size_t n = family.size();
  CMat g(n, n);
  for (size_t a = 0; a < n; ++a) {
    auto [ka, ja] = family.unflatten(a);
    for (size_t b = 0; b <= a; ++b) {
      auto [kb, jb] = family.unflatten(b);
      Complex s = family.exponents[ka] + conj(family.exponents[kb]);
      if (abs(s) == 0) fail(Errc::DegenerateExponents, "Lambda_a + conj(Lambda_b) = 0");
      Complex val = moment_integral(ja + jb, s, family.T);
      g(a, b) = val;
      g(b, a) = conj(val);
    }
  }
  return g;
}

BiorthogonalFamily biortho(const ExponentFamily& family) {
  PrecisionGuard guard(family.precision);
  CMat g = gram_matrix(family);
  size_t n = family.size();

  CMat lower;
  if (!cholesky(g, lower))
    fail(Errc::IllConditioned, "Gram matrix is not numerically positive definite; raise precision");

  // Infinity-norm condition estimate from the explicit inverse columns.
  CMat ginv(n, n);
  CVec e(n);
  for (size_t m = 0; m < n; ++m) {
    for (size_t i = 0; i < n; ++i) e[i] = Complex{};
    e[m] = Complex{Real(1)};
    ginv.set_col(m, cholesky_solve(lower, e));
  }
  Real cond = inf_norm(g) * inf_norm(ginv);
  if (cond > ten_pow(static_cast<long>(family.precision) - 10))
    fail(Errc::IllConditioned,
         "Gram condition estimate " + dec(cond, 5) + " exceeds the precision budget; raise precision");

  BiorthogonalFamily bio;
  bio.family = family;
  bio.gram_condition = cond;
  bio.coeffs = CMat(n, n);
  for (size_t m = 0; m < n; ++m) {
    for (size_t i = 0; i < n; ++i) e[i] = Complex{};
    e[m] = Complex{Real(1)};
    CVec x = cholesky_solve(lower, e);
    // One refinement pass keeps the biorthogonality defect near roundoff
    // even when the Gram matrix is strongly ill-conditioned.
    for (int pass = 0; pass < 2; ++pass) {
      CVec r = g * x;
      r[m] -= Complex{Real(1)};
      CVec dx = cholesky_solve(lower, r);
      for (size_t i = 0; i < n; ++i) x[i] -= dx[i];
    }
    for (size_t i = 0; i < n; ++i) bio.coeffs(i, m) = conj(x[i]);
  }

  // Defect recomputed from closed-form integrals of p_a q_b*, not from the
  // solve: <p_a, q_b> = sum_i conj(C[i,b]) G[a,i].
  Real defect{0};
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b) {
      Complex s{};
      for (size_t i = 0; i < n; ++i) s += conj(bio.coeffs(i, b)) * g(a, i);
      if (a == b) s -= Complex{Real(1)};
      Real v = abs(s);
      if (v > defect) defect = v;
    }
  bio.residual = defect;
  if (defect > ten_pow(-static_cast<long>(family.precision) / 2))
    fail(Errc::IllConditioned, "biorthogonality defect " + dec(defect, 5) + "; raise precision");
  return bio;
}

ExpSum BiorthogonalFamily::q(size_t m) const {
  ExpSum s;
  for (size_t i = 0; i < family.size(); ++i) {
    auto [k, j] = family.unflatten(i);
    const Complex& c = coeffs(i, m);
    if (c.re == 0 && c.im == 0) continue;
    s.terms.push_back({c, family.exponents[k], j});
  }
  return s;
}

std::vector<Real> norm_profile(const BiorthogonalFamily& bio) {
  PrecisionGuard guard(bio.family.precision);
  CMat g = gram_matrix(bio.family);
  size_t n = bio.family.size();
  std::vector<Real> norms(n);
  for (size_t m = 0; m < n; ++m) {
    Complex acc{};
    for (size_t i = 0; i < n; ++i) {
      Complex gc{};
      for (size_t j = 0; j < n; ++j) gc += g(i, j) * bio.coeffs(j, m);
      acc += conj(bio.coeffs(i, m)) * gc;
    }
    norms[m] = sqrt(acc.re < 0 ? Real(0) : acc.re);
  }
  return norms;
}

std::vector<Real> norm_growth_exponents(const BiorthogonalFamily& bio) {
  std::vector<Real> norms = norm_profile(bio);
  std::vector<Real> out;
  for (size_t m = 0; m < norms.size(); ++m) {
    auto [k, j] = bio.family.unflatten(m);
    const Complex& lam = bio.family.exponents[k];
    if (lam.re > 0) out.push_back(log(norms[m]) / lam.re);
  }
  return out;
}

CMat jordan_moment_matrix(const SystemParams& params, int k) {
  params.validate();
  if (params.alpha != 0) fail(Errc::BadInput, "reduction defined for the single-chain case alpha = 0");
  PrecisionGuard guard(params.precision);
  int n = params.n;
  CMat a(n, n);
  Real k2 = Real(k) * k;
  Real fact{1};  // j!
  Real kpow{1};  // k^{2j}
  for (int j = 0; j < n; ++j) {
    if (j > 0) {
      a(j, j - 1) = Complex{-kpow / fact};  // -k^{2(j-1)}/(j-1)! with previous values
      fact *= j;
      kpow *= k2;
    }
    a(j, j) = Complex{params.d * kpow / fact};
  }
  return a;
}

CVec triangular_reduce(const SystemParams& params, int k, const CVec& m_tilde) {
  params.validate();
  if (params.alpha != 0) fail(Errc::BadInput, "reduction defined for the single-chain case alpha = 0");
  if (static_cast<int>(m_tilde.size()) != params.n) fail(Errc::DimensionMismatch, "m_tilde size");
  PrecisionGuard guard(params.precision);
  int n = params.n;
  Real k2 = Real(k) * k;
  CVec m(n);
  Real fact{1};
  Real kpow{1};
  Complex prev{};
  for (int j = 0; j < n; ++j) {
    Complex rhs = m_tilde[j];
    if (j > 0) {
      rhs += (kpow / fact) * prev;  // subdiagonal entry is negative
      fact *= j;
      kpow *= k2;
    }
    m[j] = rhs / (params.d * kpow / fact);
    prev = m[j];
  }
  return m;
}

}  // namespace pwb
