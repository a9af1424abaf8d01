#include "pwb/synth.hpp"

#include <algorithm>

#include "pwb/errors.hpp"

namespace pwb {

void InitialState::validate() const {
  if (n < 2) fail(Errc::InvalidDimension, "state dimension must be >= 2");
  for (const auto& [k, v] : coeffs) {
    if (k < 1) fail(Errc::IndexMismatch, "mode indices start at 1");
    if (static_cast<int>(v.size()) != n) fail(Errc::DimensionMismatch, "coefficient vector size");
  }
}

Real InitialState::norm() const {
  Real s{0};
  for (const auto& [k, v] : coeffs) {
    Real m{0};
    for (const auto& z : v) m += norm2(z);
    if (space == Space::Hminus1) m /= Real(k) * k;
    s += m;
  }
  return sqrt(s);
}

int InitialState::max_mode() const {
  int m = 0;
  for (const auto& [k, v] : coeffs) m = std::max(m, k);
  return m;
}

bool InitialState::is_real() const {
  for (const auto& [k, v] : coeffs)
    for (const auto& z : v)
      if (z.im != 0) return false;
  return true;
}

Complex ControlSignal::eval(const Real& t) const {
  Real u = T - t;
  Complex acc{};
  for (const auto& term : terms) {
    Real up = term.degree == 0 ? Real(1) : pow(u, static_cast<int>(term.degree));
    acc += term.coeff * up * exp(-term.lambda * u);
  }
  return exp(Complex{shift * t}) * acc;
}

ExpSum ControlSignal::reversed() const {
  // v(T-t) = e^{shift (T-t)} sum c_i t^{d_i} e^{-lambda_i t}
  //        = sum (c_i e^{shift T}) t^{d_i} e^{-(lambda_i + shift) t}.
  ExpSum s;
  Real eshift = exp(shift * T);
  for (const auto& term : terms)
    s.terms.push_back({term.coeff * eshift, term.lambda + Complex{shift}, term.degree});
  return s;
}

void ControlSignal::resample(size_t count) {
  if (count < 2) fail(Errc::BadInput, "need at least two samples");
  std::vector<std::pair<Real, Complex>> grid;
  grid.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    Real t = T * static_cast<int>(i) / static_cast<int>(count - 1);
    grid.emplace_back(t, eval(t));
  }
  samples = std::move(grid);
}

Real spectral_shift_amount(const std::vector<Complex>& lambdas) {
  if (lambdas.empty()) return Real(0);
  Real min_re = lambdas.front().re;
  for (const auto& l : lambdas) min_re = std::min(min_re, l.re);
  Real m = 1 - min_re;
  return m > 0 ? m : Real(0);
}

ShiftedSpectrum spectral_shift(const SystemParams& params, const Spectrum& spectrum) {
  PrecisionGuard guard(params.precision);
  std::vector<Complex> lambdas;
  for (const auto& p : spectrum.pairs) lambdas.push_back(p.lambda);
  ShiftedSpectrum out;
  out.M_shift = spectral_shift_amount(lambdas);
  out.spectrum = spectrum;
  for (auto& p : out.spectrum.pairs) p.lambda = p.lambda + Complex{out.M_shift};
  return out;
}

namespace {

Real half_pi_factor() { return sqrt(pi() / 2); }  // sqrt(pi/2)

CVec mode_or_zero(const InitialState& y0, int k, int n) {
  auto it = y0.coeffs.find(k);
  if (it != y0.coeffs.end()) return it->second;
  return CVec(static_cast<size_t>(n));
}

// Unnormalized 2-vector eigencoordinates for the resonant case, real.
CVec resonant_vtilde(const SystemParams& params, int j, int k) {
  Real inv_sqrt_alpha = 1 / sqrt(params.alpha);
  CVec v(2);
  v[0] = Complex{Real(1)};
  v[1] = Complex{(j == 0 ? inv_sqrt_alpha : -inv_sqrt_alpha) * k};
  return v;
}

std::optional<long> exact_resonance_m(const SystemParams& params) {
  if (params.n != 2 || !(params.alpha > 0)) return std::nullopt;
  if (!params.d_exact || !params.alpha_exact) return std::nullopt;
  Rat ratio = *params.alpha_exact / (*params.d_exact * *params.d_exact);
  if (auto m = sqrt_as_positive_integer(ratio)) return m->convert_to<long>();
  return std::nullopt;
}

}  // namespace

TargetMap moment_targets_boundary(const SystemParams& params, const Spectrum& spectrum,
                                  const InitialState& y0, int K) {
  params.validate();
  y0.validate();
  if (params.alpha == 0) fail(Errc::AlphaZero, "use the single-chain target assembly for alpha = 0");
  if (K < 1 || K > spectrum.k_max) fail(Errc::IndexMismatch, "K outside the computed spectrum");
  PrecisionGuard guard(params.precision);

  Real tol = ten_pow(-static_cast<long>(params.precision) + 10);
  TargetMap targets;
  Real pref = half_pi_factor();
  for (int k = 1; k <= K; ++k) {
    CVec yk = mode_or_zero(y0, k, params.n);
    for (int j = 0; j < params.n; ++j) {
      const EigenPair& pair = spectrum.at(j, k);
      Complex denom = conj(bdv_value(params, pair));  // V* D B
      if (abs(denom) <= tol)
        fail(Errc::NonControllableMode, "observation coefficient vanishes at (j,k)=(" +
                                            std::to_string(j) + "," + std::to_string(k) + ")");
      Complex pairing = dot_herm(yk, pair.V);
      targets[{j, k}] = Complex{-pref / k} * pairing / denom;
    }
  }
  return targets;
}

TargetMap moment_targets_alpha0(const SystemParams& params, const InitialState& y0, int K,
                                const Real& T) {
  params.validate();
  y0.validate();
  if (params.alpha != 0) fail(Errc::BadInput, "single-chain target assembly needs alpha = 0");
  PrecisionGuard guard(params.precision);

  int n = params.n;
  Real pref = half_pi_factor();
  TargetMap targets;
  for (int k = 1; k <= K; ++k) {
    CVec yk = mode_or_zero(y0, k, n);
    Real k2T = Real(k) * k * T;
    CVec m_tilde(n);
    for (int j = 0; j < n; ++j) {
      Complex acc{};
      Real sign{1};
      for (int l = 0; l <= j; ++l) {
        // (-1)^l (k^2 T)^{j-l} / (j-l)! * <y0, e_{n-l} w_k>
        Real fact{1};
        for (int q = 2; q <= j - l; ++q) fact *= q;
        Complex coef{sign * pow(k2T, j - l) / fact};
        acc += coef * yk[static_cast<size_t>(n - 1 - l)];
        sign = -sign;
      }
      m_tilde[static_cast<size_t>(j)] = Complex{-pref / k} * acc;
    }
    CVec reduced = triangular_reduce(params, k, m_tilde);
    for (int j = 0; j < n; ++j) targets[{j, k}] = reduced[static_cast<size_t>(j)];
  }
  return targets;
}

TargetMap moment_targets_pointwise(const SystemParams& params, const Spectrum& spectrum,
                                   const InitialState& y0, const Irrational& theta, int K) {
  params.validate();
  y0.validate();
  if (params.alpha == 0) fail(Errc::AlphaZero, "pointwise target assembly needs alpha != 0");
  if (y0.space != InitialState::Space::L2) fail(Errc::BadInput, "pointwise data lives in L2");
  if (K < 1 || K > spectrum.k_max) fail(Errc::IndexMismatch, "K outside the computed spectrum");
  PrecisionGuard guard(params.precision);

  Real theta_pi = theta.value(params.precision) * pi();
  Real tol = ten_pow(-static_cast<long>(params.precision) + 10);
  Real pref = half_pi_factor();
  TargetMap targets;
  for (int k = 1; k <= K; ++k) {
    Real s = sin(Real(k) * theta_pi);
    if (abs(s) <= tol) fail(Errc::VanishingSine, "sin(k theta pi) = 0 at k=" + std::to_string(k));
    CVec yk = mode_or_zero(y0, k, params.n);
    for (int j = 0; j < params.n; ++j) {
      const EigenPair& pair = spectrum.at(j, k);
      Complex vb = conj(pair.V[static_cast<size_t>(params.n - 1)]);  // V* B
      if (abs(vb) <= tol)
        fail(Errc::VanishingVB, "V* B vanishes at (j,k)=(" + std::to_string(j) + "," +
                                    std::to_string(k) + ")");
      Complex pairing = dot_herm(yk, pair.V);
      targets[{j, k}] = Complex{-pref / s} * pairing / vb;
    }
  }
  return targets;
}

XMembership subspace_X_check(const InitialState& y0, long m, const SystemParams& params) {
  params.validate();
  y0.validate();
  if (params.n != 2) fail(Errc::InvalidDimension, "compatibility subspace is defined for n = 2");
  if (m < 1) fail(Errc::BadInput, "resonance index m must be >= 1");
  PrecisionGuard guard(params.precision);

  long m0 = 1 + (m - 1) / 2;
  int K = y0.max_mode();
  Real tol = ten_pow(-static_cast<long>(params.precision) / 2);

  // Bilinear real pairing with the unnormalized eigencoordinates.
  auto pair_with = [&](int k, int j) {
    CVec yk = mode_or_zero(y0, k, 2);
    CVec vt = resonant_vtilde(params, j, k);
    return yk[0] * vt[0] + yk[1] * vt[1];
  };

  XMembership rep;
  rep.member = true;
  auto record = [&](const Complex& defect, int family, int k, const std::string& what) {
    Real d = abs(defect);
    if (d > rep.worst_defect) rep.worst_defect = d;
    if (d > tol && rep.member) {
      rep.member = false;
      rep.violated_condition = family;
      rep.violated_k = k;
      rep.detail = what;
    }
  };

  record(pair_with(static_cast<int>(m), 1), 3, static_cast<int>(m), "vanishing condition at k=m");
  for (long k = 1; k <= m0 - 1; ++k)
    record(pair_with(k, 1) - pair_with(static_cast<int>(m - k), 1), 1, static_cast<int>(k),
           "mirror condition at k=" + std::to_string(k));
  for (int k = 1; k <= K; ++k)
    record(pair_with(k, 0) + pair_with(k + static_cast<int>(m), 1), 2, k,
           "chained condition at k=" + std::to_string(k));
  return rep;
}

MomentProblem build_boundary_problem(const SystemParams& params, const Spectrum& spectrum,
                                     const InitialState& y0, int K, const Real& T) {
  PrecisionGuard guard(params.precision);
  TargetMap targets = moment_targets_boundary(params, spectrum, y0, K);

  MomentProblem prob;
  prob.params = params;
  prob.T = T;
  std::vector<Complex> lambdas;
  for (int k = 1; k <= K; ++k)
    for (int j = 0; j < params.n; ++j) {
      prob.equations.push_back({j, k});
      lambdas.push_back(spectrum.at(j, k).lambda);
    }
  prob.M_shift = spectral_shift_amount(lambdas);
  std::vector<Complex> shifted;
  for (const auto& l : lambdas) shifted.push_back(conj(l) + Complex{prob.M_shift});
  prob.family = ExponentFamily::plain(shifted, T, params.precision);
  for (const auto& eq : prob.equations) prob.targets.push_back(targets.at(eq));
  return prob;
}

MomentProblem build_alpha0_problem(const SystemParams& params, const InitialState& y0, int K,
                                   const Real& T) {
  PrecisionGuard guard(params.precision);
  TargetMap targets = moment_targets_alpha0(params, y0, K, T);

  MomentProblem prob;
  prob.params = params;
  prob.T = T;
  std::vector<Complex> lambdas;
  std::vector<unsigned> degrees;
  for (int k = 1; k <= K; ++k) {
    lambdas.push_back(Complex{params.d * k * k});
    degrees.push_back(static_cast<unsigned>(params.n));
    for (int j = 0; j < params.n; ++j) prob.equations.push_back({j, k});
  }
  prob.M_shift = spectral_shift_amount(lambdas);  // zero since d >= 1
  std::vector<Complex> shifted;
  for (const auto& l : lambdas) shifted.push_back(conj(l) + Complex{prob.M_shift});
  prob.family = ExponentFamily::generalized(shifted, degrees, T, params.precision);
  for (const auto& eq : prob.equations) prob.targets.push_back(targets.at(eq));
  return prob;
}

MomentProblem build_pointwise_problem(const SystemParams& params, const Spectrum& spectrum,
                                      const InitialState& y0, const Irrational& theta, int K,
                                      const Real& T) {
  PrecisionGuard guard(params.precision);
  TargetMap targets = moment_targets_pointwise(params, spectrum, y0, theta, K);

  MomentProblem prob;
  prob.params = params;
  prob.T = T;
  std::vector<Complex> lambdas;
  for (int k = 1; k <= K; ++k)
    for (int j = 0; j < params.n; ++j) {
      prob.equations.push_back({j, k});
      lambdas.push_back(spectrum.at(j, k).lambda);
    }
  prob.M_shift = spectral_shift_amount(lambdas);
  std::vector<Complex> shifted;
  for (const auto& l : lambdas) shifted.push_back(conj(l) + Complex{prob.M_shift});
  prob.family = ExponentFamily::plain(shifted, T, params.precision);
  for (const auto& eq : prob.equations) prob.targets.push_back(targets.at(eq));
  return prob;
}

ResonantSynthesis build_resonant_problem(const SystemParams& params, const InitialState& y0,
                                         int K, const Real& T) {
  params.validate();
  y0.validate();
  PrecisionGuard guard(params.precision);
  auto m_opt = exact_resonance_m(params);
  if (!m_opt)
    fail(Errc::BadInput, "resonant synthesis needs exact parameters with sqrt(alpha)/d integer");
  long m = *m_opt;

  ResonantSynthesis out;
  out.membership = subspace_X_check(y0, m, params);
  if (!out.membership.member) return out;

  // Equations for equal eigenvalues coincide on the compatibility subspace;
  // keep one representative per distinct eigenvalue lambda(1, key).
  long m0 = 1 + (m - 1) / 2;
  Real pref = half_pi_factor();
  std::map<long, Complex> merged;  // key -> target
  for (int k = 1; k <= K; ++k) {
    for (int j = 0; j < 2; ++j) {
      if (j == 1 && k == m) continue;  // invisible equation; target vanishes on the subspace
      long key = j == 0 ? k + m : (k >= m0 ? k : m - k);
      CVec yk = mode_or_zero(y0, k, 2);
      CVec vt = resonant_vtilde(params, j, k);
      Complex pairing = yk[0] * vt[0] + yk[1] * vt[1];
      Complex denom = vt[1] * params.d + vt[0];  // B* D* Vtilde, real
      Complex target = Complex{-pref / k} * pairing / denom;
      auto it = merged.find(key);
      if (it == merged.end())
        merged[key] = target;
      else {
        Real defect = abs(it->second - target);
        Real scale = std::max(Real(1), abs(target));
        if (defect > ten_pow(-static_cast<long>(params.precision) / 2) * scale)
          fail(Errc::IndexMismatch, "merged targets disagree at eigenvalue key " + std::to_string(key));
      }
    }
  }

  MomentProblem prob;
  prob.params = params;
  prob.T = T;
  std::vector<Complex> lambdas;
  for (const auto& [key, target] : merged) {
    prob.equations.push_back({1, static_cast<int>(key)});
    lambdas.push_back(eigenvalue(params, 1, static_cast<int>(key)));
    prob.targets.push_back(target);
  }
  prob.M_shift = spectral_shift_amount(lambdas);
  std::vector<Complex> shifted;
  for (const auto& l : lambdas) shifted.push_back(conj(l) + Complex{prob.M_shift});
  prob.family = ExponentFamily::plain(shifted, T, params.precision);
  out.problem = std::move(prob);
  return out;
}

namespace {

// Conjugate-pair symmetrization: for targets coming from real data the
// assembled control is real up to roundoff; pairing terms enforces it.
void symmetrize_real(ControlSignal& ctl, const Real& defect_tol) {
  size_t n = ctl.terms.size();
  std::vector<bool> done(n, false);
  Real scale{0};
  for (const auto& t : ctl.terms) scale = std::max(scale, abs(t.coeff));
  if (scale == 0) return;
  Real match_tol = ten_pow(-20);
  for (size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    auto& ti = ctl.terms[i];
    if (abs(ti.lambda.im) <= match_tol * (1 + abs(ti.lambda))) {
      if (abs(Complex{Real(0), ti.coeff.im}) > defect_tol * scale) return;  // not real data
      ti.coeff.im = 0;
      ti.lambda.im = 0;
      done[i] = true;
      continue;
    }
    bool paired = false;
    for (size_t j = i + 1; j < n; ++j) {
      if (done[j] || ctl.terms[j].degree != ti.degree) continue;
      auto& tj = ctl.terms[j];
      if (abs(tj.lambda - conj(ti.lambda)) <= match_tol * (1 + abs(ti.lambda))) {
        if (abs(tj.coeff - conj(ti.coeff)) > defect_tol * scale) return;
        Complex avg = (ti.coeff + conj(tj.coeff)) / Real(2);
        ti.coeff = avg;
        tj.coeff = conj(avg);
        done[i] = done[j] = true;
        paired = true;
        break;
      }
    }
    if (!paired) return;  // unmatched complex exponent: leave as-is
  }
}

}  // namespace

ControlSignal assemble_control(const MomentProblem& problem, const BiorthogonalFamily& bio) {
  PrecisionGuard guard(problem.params.precision);
  size_t n = problem.family.size();
  if (bio.family.size() != n || problem.targets.size() != n)
    fail(Errc::IndexMismatch, "problem and biorthogonal family sizes differ");
  for (size_t i = 0; i < problem.family.exponents.size(); ++i)
    if (abs(problem.family.exponents[i] - bio.family.exponents[i]) != 0)
      fail(Errc::IndexMismatch, "exponent mismatch between problem and family");

  // Amplitudes e^{-Lambda T} M per equation, then expansion into the span.
  CVec amp(n);
  for (size_t idx = 0; idx < n; ++idx) {
    auto [block, deg] = problem.family.unflatten(idx);
    amp[idx] = exp(-problem.family.exponents[block] * problem.T) * problem.targets[idx];
  }

  ControlSignal ctl;
  ctl.T = problem.T;
  ctl.shift = problem.M_shift;
  for (size_t i = 0; i < n; ++i) {
    Complex c{};
    for (size_t m = 0; m < n; ++m) c += bio.coeffs(i, m) * amp[m];
    auto [block, deg] = problem.family.unflatten(i);
    ctl.terms.push_back({problem.family.exponents[block], deg, c});
  }

  Real defect_tol = std::max(ten_pow(-20), bio.residual * 100);
  symmetrize_real(ctl, defect_tol);
  ctl.norm_l2 = l2_norm(ctl.reversed(), Real(0), ctl.T);
  return ctl;
}

ControlSignal solve_problem(const MomentProblem& problem) {
  BiorthogonalFamily bio = biortho(problem.family);
  return assemble_control(problem, bio);
}

MomentResiduals verify_moments(const ControlSignal& control, const MomentProblem& problem) {
  PrecisionGuard guard(problem.params.precision);
  ExpSum v_rev = control.reversed();
  MomentResiduals res;
  res.equations = problem.equations;
  for (size_t idx = 0; idx < problem.family.size(); ++idx) {
    auto [block, deg] = problem.family.unflatten(idx);
    Complex lambda_star = problem.family.exponents[block] - Complex{problem.M_shift};
    ExpSum weight;
    weight.terms.push_back({Complex{Real(1)}, lambda_star, deg});
    Complex lhs = (v_rev * weight).integral(Real(0), problem.T);
    Complex rhs = exp(-lambda_star * problem.T) * problem.targets[idx];
    Real r = abs(lhs - rhs);
    res.residuals.push_back(r);
    if (r > res.max_residual) res.max_residual = r;
  }
  return res;
}

MomentResiduals verify_alpha0_unreduced(const ControlSignal& control, const SystemParams& params,
                                        const InitialState& y0, int K, const Real& T) {
  PrecisionGuard guard(params.precision);
  if (params.alpha != 0) fail(Errc::BadInput, "unreduced check applies to alpha = 0");
  ExpSum v_rev = control.reversed();
  Real pref = half_pi_factor();
  MomentResiduals res;
  int n = params.n;
  for (int k = 1; k <= K; ++k) {
    Real k2 = Real(k) * k;
    Complex lam{params.d * k2};
    CVec yk = mode_or_zero(y0, k, n);
    // I_j = int_0^T v(T-t) t^j e^{-d k^2 t} dt.
    std::vector<Complex> I(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      ExpSum w;
      w.terms.push_back({Complex{Real(1)}, lam, static_cast<unsigned>(j)});
      I[static_cast<size_t>(j)] = (v_rev * w).integral(Real(0), T);
    }
    Real decay = exp(-params.d * k2 * T);
    for (int j = 0; j < n; ++j) {
      Complex m_tilde{};
      Real sign{1};
      for (int l = 0; l <= j; ++l) {
        Real fact{1};
        for (int q = 2; q <= j - l; ++q) fact *= q;
        m_tilde += Complex{sign * pow(k2 * T, j - l) / fact} * yk[static_cast<size_t>(n - 1 - l)];
        sign = -sign;
      }
      m_tilde = Complex{-pref / k} * m_tilde;
      Complex lhs;
      if (j == 0) {
        lhs = Complex{params.d} * I[0];
      } else {
        Real fact_jm1{1}, fact_j{1};
        for (int q = 2; q <= j - 1; ++q) fact_jm1 *= q;
        for (int q = 2; q <= j; ++q) fact_j *= q;
        lhs = Complex{-pow(k2, j - 1) / fact_jm1} * I[static_cast<size_t>(j - 1)] +
              Complex{params.d * pow(k2, j) / fact_j} * I[static_cast<size_t>(j)];
      }
      Real r = abs(lhs - Complex{decay} * m_tilde);
      res.equations.push_back({j, k});
      res.residuals.push_back(r);
      if (r > res.max_residual) res.max_residual = r;
    }
  }
  return res;
}

}  // namespace pwb
