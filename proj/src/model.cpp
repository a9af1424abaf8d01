#include "pwb/model.hpp"

#include <algorithm>

#include "pwb/errors.hpp"

namespace pwb {

void SystemParams::validate() const {
  if (n < 2) fail(Errc::InvalidDimension, "n must be at least 2");
  if (d < 1) fail(Errc::BadInput, "diffusion constant d must satisfy d >= 1");
  if (precision < 16) fail(Errc::BadInput, "precision must be at least 16 digits");
}

SystemParams SystemParams::make(int n, const std::string& d_str, const std::string& alpha_str,
                                unsigned precision) {
  SystemParams p;
  p.n = n;
  p.precision = precision;
  PrecisionGuard guard(precision);
  p.d_exact = parse_exact_rational(d_str);
  p.alpha_exact = parse_exact_rational(alpha_str);
  p.d = p.d_exact ? Real(*p.d_exact) : parse_real(d_str);
  p.alpha = p.alpha_exact ? Real(*p.alpha_exact) : parse_real(alpha_str);
  p.validate();
  return p;
}

Matrices build_matrices(const SystemParams& params) {
  params.validate();
  PrecisionGuard guard(params.precision);
  int n = params.n;
  Matrices m;
  m.D = CMat(n, n);
  m.A = CMat(n, n);
  m.B = CVec(n);
  for (int i = 0; i < n; ++i) {
    m.D(i, i) = Complex{params.d};
    if (i + 1 < n) m.D(i, i + 1) = Complex{Real(1)};
  }
  m.A(n - 1, 0) = Complex{params.alpha};
  m.B[n - 1] = Complex{Real(1)};
  // Smallest eigenvalue of the symmetric part: tridiagonal Toeplitz with d on
  // the diagonal and 1/2 off it, so beta = d - cos(pi/(n+1)).
  m.beta = params.d - cos(pi() / (n + 1));
  if (m.beta <= 0) fail(Errc::NonElliptic, "symmetric part of D is not positive definite");
  return m;
}

Complex eigenvalue(const SystemParams& params, int j, int k) {
  Real k2 = Real(k) * k;
  if (params.alpha == 0) return Complex{params.d * k2};
  Real absa = abs(Real(params.alpha));
  Real radial = pow(absa, Real(1) / params.n) * pow(Real(k), 2 - Real(2) / params.n);
  Real phase = params.alpha > 0 ? (2 * pi() * j) / params.n : ((2 * j + 1) * pi()) / params.n;
  return Complex{params.d * k2} + polar(radial, phase);
}

CVec eigenvector_coords(const SystemParams& params, int j, int k) {
  if (params.alpha == 0) fail(Errc::AlphaZero, "eigenvector coordinates need alpha != 0");
  Real absa = abs(Real(params.alpha));
  Real radial = pow(absa, -Real(1) / params.n) * pow(Real(k), Real(2) / params.n);
  Real phase = params.alpha > 0 ? -(2 * pi() * j) / params.n : -((2 * j + 1) * pi()) / params.n;
  Complex base = polar(radial, phase);
  CVec c(params.n);
  c[0] = Complex{Real(1)};
  for (int l = 1; l < params.n; ++l) c[l] = c[l - 1] * base;
  return c;
}

namespace {

// Unit norm with the first nonzero component rotated to the positive real
// axis, so serialized spectra are reproducible.
CVec normalize_vector(CVec v) {
  Real n = vec_norm(v);
  Complex phase{Real(1)};
  for (const auto& z : v) {
    Real a = abs(z);
    if (a > 0) {
      phase = conj(z) / a;
      break;
    }
  }
  for (auto& z : v) z = phase * z / n;
  return v;
}

void detect_collisions(Spectrum& spec) {
  const SystemParams& p = spec.params;
  std::vector<std::pair<ModeIndex, ModeIndex>> found;

  auto add = [&found](ModeIndex a, ModeIndex b) {
    if (std::make_pair(a.second, a.first) > std::make_pair(b.second, b.first)) std::swap(a, b);
    found.emplace_back(a, b);
  };

  // Exact shortcut for n = 2, alpha = (d m)^2: lambda_{0,k} = lambda_{1,k+m}
  // and lambda_{1,k} = lambda_{1,m-k}.
  bool exact_res = false;
  if (p.n == 2 && p.alpha > 0 && p.d_exact && p.alpha_exact) {
    Rat ratio = *p.alpha_exact / (*p.d_exact * *p.d_exact);
    if (auto m = sqrt_as_positive_integer(ratio)) {
      exact_res = true;
      long mi = m->convert_to<long>();
      for (long k = 1; k + mi <= spec.k_max; ++k)
        add({0, static_cast<int>(k)}, {1, static_cast<int>(k + mi)});
      for (long k = 1; 2 * k < mi; ++k)
        if (mi - k <= spec.k_max) add({1, static_cast<int>(k)}, {1, static_cast<int>(mi - k)});
    }
  }

  if (!exact_res && p.alpha != 0) {
    Real tol = ten_pow(-static_cast<long>(p.precision) + 8);
    for (size_t a = 0; a < spec.pairs.size(); ++a) {
      for (size_t b = a + 1; b < spec.pairs.size(); ++b) {
        const EigenPair& pa = spec.pairs[a];
        const EigenPair& pb = spec.pairs[b];
        Real scale = std::max(Real(1), std::max(abs(pa.lambda), abs(pb.lambda)));
        if (abs(pa.lambda - pb.lambda) <= tol * scale)
          add({pa.j, pa.k}, {pb.j, pb.k});
      }
    }
  }

  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
    auto key = [](const std::pair<ModeIndex, ModeIndex>& e) {
      return std::make_tuple(e.first.second, e.first.first, e.second.second, e.second.first);
    };
    return key(x) < key(y);
  });
  found.erase(std::unique(found.begin(), found.end()), found.end());

  spec.collisions.clear();
  for (const auto& e : found) {
    spec.collisions.push_back(e);
    spec.collisions.emplace_back(e.second, e.first);
  }
}

}  // namespace

Spectrum compute_spectrum(const SystemParams& params, int k_max) {
  params.validate();
  if (k_max < 1) fail(Errc::BadInput, "k_max must be at least 1");
  PrecisionGuard guard(params.precision);
  Spectrum spec;
  spec.params = params;
  spec.k_max = k_max;
  int n = params.n;
  for (int k = 1; k <= k_max; ++k) {
    if (params.alpha == 0) {
      EigenPair pair;
      pair.j = 0;
      pair.k = k;
      pair.lambda = Complex{params.d * k * k};
      pair.V = CVec(n);
      pair.V[n - 1] = Complex{Real(1)};
      // chain[i] = e_{n-i} / k^{2i}: (k^2 D^T + A^T - lambda) chain[i] = chain[i-1].
      Real scale{1};
      for (int i = 0; i < n; ++i) {
        CVec gen(n);
        gen[n - 1 - i] = Complex{scale};
        pair.chain.push_back(std::move(gen));
        scale /= Real(k) * k;
      }
      spec.pairs.push_back(std::move(pair));
    } else {
      for (int j = 0; j < n; ++j) {
        EigenPair pair;
        pair.j = j;
        pair.k = k;
        pair.lambda = eigenvalue(params, j, k);
        pair.V = normalize_vector(eigenvector_coords(params, j, k));
        spec.pairs.push_back(std::move(pair));
      }
    }
  }
  detect_collisions(spec);
  return spec;
}

const EigenPair& Spectrum::at(int j, int k) const {
  if (k < 1 || k > k_max) fail(Errc::IndexMismatch, "mode index k out of range");
  size_t per_k = params.alpha == 0 ? 1 : static_cast<size_t>(params.n);
  if (j < 0 || static_cast<size_t>(j) >= per_k) fail(Errc::IndexMismatch, "branch index j out of range");
  return pairs[static_cast<size_t>(k - 1) * per_k + static_cast<size_t>(j)];
}

bool Spectrum::collides(int j, int k, int j2, int k2) const {
  for (const auto& c : collisions)
    if (c.first == ModeIndex{j, k} && c.second == ModeIndex{j2, k2}) return true;
  return false;
}

Real eigen_residual(const SystemParams& params, const EigenPair& pair) {
  PrecisionGuard guard(params.precision);
  Matrices m = build_matrices(params);
  int n = params.n;
  Real k2 = Real(pair.k) * pair.k;
  CMat op(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) op(i, j) = k2 * conj(m.D(j, i)) + conj(m.A(j, i));
  CVec r = op * pair.V;
  for (int i = 0; i < n; ++i) r[i] -= pair.lambda * pair.V[i];
  return vec_norm(r);
}

KalmanResult kalman_matrix(const SystemParams& params, int k) {
  params.validate();
  if (k < 1) fail(Errc::BadInput, "k must be at least 1");
  PrecisionGuard guard(params.precision);
  Matrices mats = build_matrices(params);
  int n = params.n;
  Real k2 = Real(k) * k;
  CMat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = k2 * mats.D(i, j) + mats.A(i, j);

  KalmanResult res;
  res.matrix = CMat(n, n);
  CVec col = mats.B;
  res.matrix.set_col(0, col);
  for (int j = 1; j < n; ++j) {
    col = M * col;
    res.matrix.set_col(static_cast<size_t>(j), col);
  }
  res.abs_det = abs(lu_det(lu_factor(res.matrix)));
  res.rank = matrix_rank(res.matrix, ten_pow(-static_cast<long>(params.precision) + 10));

  res.closed_form = Real(1);
  for (int l = 1; l < n; ++l) res.closed_form *= pow(k2, l);
  Real rel = abs(res.abs_det - res.closed_form) / res.closed_form;
  if (rel > ten_pow(-10))
    fail(Errc::BadInput, "controllability determinant deviates from its product form");
  return res;
}

ModalBasis modal_change_of_basis(const SystemParams& params, int k) {
  params.validate();
  if (params.alpha == 0) fail(Errc::AlphaZero, "modal basis change needs alpha != 0");
  PrecisionGuard guard(params.precision);
  int n = params.n;
  ModalBasis basis;
  basis.V = CMat(n, n);
  for (int j = 0; j < n; ++j) basis.V.set_col(static_cast<size_t>(j), eigenvector_coords(params, j, k));
  basis.Vinv = inverse(basis.V);
  basis.identity_defect = max_abs(basis.V * basis.Vinv - CMat::identity(n));
  if (basis.identity_defect > ten_pow(-static_cast<long>(params.precision) + 10))
    fail(Errc::IllConditioned, "modal basis inverse defect too large at k=" + std::to_string(k));
  return basis;
}

Complex bdv_value(const SystemParams& params, const EigenPair& pair) {
  PrecisionGuard guard(params.precision);
  // B^* D^* = (0, ..., 0, 1, d).
  int n = params.n;
  Complex v = pair.V[n - 1] * params.d;
  if (n >= 2) v += pair.V[n - 2];
  return v;
}

}  // namespace pwb
