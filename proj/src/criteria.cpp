#include "pwb/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "pwb/errors.hpp"

namespace pwb {

const char* setting_name(Setting s) {
  switch (s) {
    case Setting::BoundaryNull: return "BoundaryNull";
    case Setting::BoundaryApprox: return "BoundaryApprox";
    case Setting::DistributedConstant: return "DistributedConstant";
    case Setting::PointwiseApprox: return "PointwiseApprox";
    case Setting::PointwiseNull: return "PointwiseNull";
  }
  return "?";
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Controllable: return "Controllable";
    case Outcome::NotControllable: return "NotControllable";
    case Outcome::Resonant: return "Resonant";
    case Outcome::Undetermined: return "Undetermined";
  }
  return "?";
}

namespace {

// sqrt(|alpha|) / d^{n/2} when it is a positive integer. Exact rational
// arithmetic when both inputs are exact, otherwise a 1e-12 relative band with
// a three-way answer (integer / not / inside the band).
enum class IntegerTest { Yes, No, Borderline };

IntegerTest sqrt_ratio_integer(const SystemParams& p, long& out_value) {
  if (p.d_exact && p.alpha_exact) {
    Rat ratio = abs(*p.alpha_exact);
    Rat dp{1};
    for (int i = 0; i < p.n; ++i) dp *= *p.d_exact;
    ratio /= dp;
    if (auto m = sqrt_as_positive_integer(ratio)) {
      out_value = m->convert_to<long>();
      return IntegerTest::Yes;
    }
    return IntegerTest::No;
  }
  PrecisionGuard guard(p.precision);
  Real v = sqrt(abs(p.alpha)) / pow(p.d, Real(p.n) / 2);
  Real nearest = floor(v + Real(1) / 2);
  if (nearest < 1) return IntegerTest::No;
  if (abs(v - nearest) <= ten_pow(-12) * (1 + abs(v))) {
    out_value = nearest.convert_to<long>();
    return IntegerTest::Borderline;
  }
  return IntegerTest::No;
}

// sqrt(alpha)/d for the n = 2 resonance test (alpha > 0).
IntegerTest resonance_integer(const SystemParams& p, long& out_m) {
  if (p.d_exact && p.alpha_exact) {
    Rat ratio = *p.alpha_exact / (*p.d_exact * *p.d_exact);
    if (auto m = sqrt_as_positive_integer(ratio)) {
      out_m = m->convert_to<long>();
      return IntegerTest::Yes;
    }
    return IntegerTest::No;
  }
  PrecisionGuard guard(p.precision);
  Real v = sqrt(p.alpha) / p.d;
  Real nearest = floor(v + Real(1) / 2);
  if (nearest < 1) return IntegerTest::No;
  if (abs(v - nearest) <= ten_pow(-12) * (1 + abs(v))) {
    out_m = nearest.convert_to<long>();
    return IntegerTest::Borderline;
  }
  return IntegerTest::No;
}

void push_cert(Verdict& v, const std::string& key, const std::string& value) {
  v.certificates.emplace_back(key, value);
}

}  // namespace

std::vector<ModeIndex> check_BDV(const SystemParams& params, const Spectrum& spectrum) {
  params.validate();
  if (params.alpha == 0) fail(Errc::AlphaZero, "observation-coefficient check needs alpha != 0");
  PrecisionGuard guard(params.precision);

  // 1 + d |alpha|^{-1/n} k^{2/n} e^{-i phase(j)} = 0 forces the phase factor
  // to be -1: j = n/2 for alpha > 0 (n even), j = (n-1)/2 for alpha < 0
  // (n odd). The modulus equation then reads k = sqrt(|alpha|)/d^{n/2}.
  std::vector<ModeIndex> zeros;
  bool branch_exists = params.alpha > 0 ? params.n % 2 == 0 : params.n % 2 == 1;
  if (branch_exists) {
    int j = params.alpha > 0 ? params.n / 2 : (params.n - 1) / 2;
    long k0 = 0;
    IntegerTest t = sqrt_ratio_integer(params, k0);
    if (t != IntegerTest::No && k0 >= 1 && k0 <= spectrum.k_max) zeros.push_back({j, static_cast<int>(k0)});
  }

  // Numeric cross-check of the closed form over the whole range.
  Real tol = ten_pow(-static_cast<long>(params.precision) + 10);
  for (const auto& pair : spectrum.pairs) {
    Real v = abs(bdv_value(params, pair));
    bool listed = std::find(zeros.begin(), zeros.end(), ModeIndex{pair.j, pair.k}) != zeros.end();
    if (listed && v > tol)
      fail(Errc::BadInput, "closed-form zero not confirmed numerically at (j,k)=(" +
                               std::to_string(pair.j) + "," + std::to_string(pair.k) + ")");
    if (!listed && v <= tol)
      fail(Errc::BadInput, "numeric zero missed by the closed form at (j,k)=(" +
                               std::to_string(pair.j) + "," + std::to_string(pair.k) + ")");
  }
  return zeros;
}

Verdict check_boundary(const SystemParams& params, int k_max) {
  params.validate();
  PrecisionGuard guard(params.precision);
  Verdict v;
  v.setting = Setting::BoundaryNull;
  v.checked_range = k_max;

  if (params.alpha == 0) {
    v.outcome = Outcome::Controllable;
    v.reason = "single Jordan chain per mode; generalized moment problem solvable";
    return v;
  }

  Spectrum spec = compute_spectrum(params, k_max);
  push_cert(v, "collision_count", std::to_string(spec.collisions.size() / 2));

  if (params.alpha > 0 && params.n == 2) {
    long m = 0;
    IntegerTest t = resonance_integer(params, m);
    if (t == IntegerTest::Yes) {
      v.outcome = Outcome::Resonant;
      v.resonant_m = m;
      Complex l0 = eigenvalue(params, 0, 1);
      Witness w;
      w.kind = "collision";
      w.collision = {{0, 1}, {1, 1 + static_cast<int>(m)}};
      w.detail = "lambda(0,1) = lambda(1," + std::to_string(1 + m) + ") = " + dec(l0.re, 20);
      v.witness = w;
      v.reason = "sqrt(alpha)/d = " + std::to_string(m) + " is a positive integer";
      push_cert(v, "resonance_m", std::to_string(m));
      return v;
    }
    if (t == IntegerTest::Borderline) {
      v.outcome = Outcome::Undetermined;
      v.reason = "sqrt(alpha)/d within 1e-12 of integer " + std::to_string(m) +
                 " but inputs are not exact";
      return v;
    }
    v.outcome = Outcome::Controllable;
    v.reason = "sqrt(alpha)/d is not a positive integer";
    return v;
  }

  if (params.alpha > 0 && params.n % 2 == 0) {
    // Even n >= 4 with positive coupling: the two real branches may
    // concentrate and a minimal time can appear; still report the
    // necessary observation-coefficient check.
    auto zeros = check_BDV(params, spec);
    v.outcome = Outcome::Undetermined;
    v.reason = "minimal-time regime for even n >= 4 with alpha > 0";
    push_cert(v, "bdv_zero_count", std::to_string(zeros.size()));
    for (const auto& z : zeros)
      push_cert(v, "bdv_zero", "(" + std::to_string(z.first) + "," + std::to_string(z.second) + ")");
    if (!zeros.empty()) {
      Witness w;
      w.kind = "vanishing_bdv";
      w.mode = zeros.front();
      w.detail = "observation coefficient vanishes at (j,k)=(" + std::to_string(zeros.front().first) +
                 "," + std::to_string(zeros.front().second) + ")";
      v.witness = w;
      v.outcome = Outcome::NotControllable;
      v.reason = "necessary observation condition fails; " + v.reason;
    }
    return v;
  }

  if (params.alpha < 0) {
    long k0 = 0;
    IntegerTest t = sqrt_ratio_integer(params, k0);
    if (params.n % 2 == 1 && t == IntegerTest::Yes) {
      v.outcome = Outcome::NotControllable;
      Witness w;
      w.kind = "vanishing_bdv";
      w.mode = ModeIndex{(params.n - 1) / 2, static_cast<int>(k0)};
      w.detail = "B*D*V vanishes at (j,k)=(" + std::to_string((params.n - 1) / 2) + "," +
                 std::to_string(k0) + ")";
      v.witness = w;
      v.reason = "sqrt(|alpha|)/d^(n/2) = " + std::to_string(k0) + " is a positive integer";
      return v;
    }
    if (params.n % 2 == 1 && t == IntegerTest::Borderline) {
      v.outcome = Outcome::Undetermined;
      v.reason = "sqrt(|alpha|)/d^(n/2) within 1e-12 of an integer but inputs are not exact";
      return v;
    }
  }

  // Remaining cases (alpha < 0 any n; alpha > 0 odd n): controllable when the
  // spectrum stays geometrically simple on the checked range.
  if (!spec.collisions.empty()) {
    v.outcome = Outcome::NotControllable;
    Witness w;
    w.kind = "collision";
    w.collision = spec.collisions.front();
    w.detail = "equal eigenvalues at (" + std::to_string(w.collision->first.first) + "," +
               std::to_string(w.collision->first.second) + ") and (" +
               std::to_string(w.collision->second.first) + "," +
               std::to_string(w.collision->second.second) + ")";
    v.witness = w;
    v.reason = "eigenvalue of geometric multiplicity 2 on the checked range";
    return v;
  }
  v.outcome = Outcome::Controllable;
  v.range_certified = true;
  v.reason = "no multiple eigenvalue up to k_max and observation coefficients nonzero";
  return v;
}

GapCertificate check_gap(const SystemParams& params, int k_max) {
  params.validate();
  if (params.alpha == 0) fail(Errc::AlphaZero, "gap certificate needs alpha != 0");
  PrecisionGuard guard(params.precision);
  Spectrum spec = compute_spectrum(params, k_max);
  GapCertificate cert;
  Real coll_tol = ten_pow(-static_cast<long>(params.precision) + 8);

  bool even_real_pair = params.alpha > 0 && params.n % 2 == 0;
  int p_branch = params.n / 2;

  Real min_ratio{-1};
  Real min_real_ratio{-1};
  int max_violating_k = 0;
  for (const auto& a : spec.pairs) {
    Real scale = sqrt(abs(a.lambda));
    if (scale == 0) scale = Real(1);
    for (const auto& b : spec.pairs) {
      if (a.j == b.j && a.k == b.k) continue;
      Real gap = abs(a.lambda - b.lambda);
      if (gap <= coll_tol * std::max(Real(1), abs(a.lambda))) {
        if (std::make_pair(a.k, a.j) < std::make_pair(b.k, b.j))
          cert.violations.push_back({{a.j, a.k}, {b.j, b.k}});
        max_violating_k = std::max({max_violating_k, a.k, b.k});
        continue;
      }
      Real ratio = gap / scale;
      bool real_pair = even_real_pair && ((a.j == 0 && b.j == p_branch) || (a.j == p_branch && b.j == 0));
      if (real_pair) {
        if (min_real_ratio < 0 || ratio < min_real_ratio) {
          min_real_ratio = ratio;
          cert.tightest_real_pair = {{a.j, a.k}, {b.j, b.k}};
        }
      }
      if (min_ratio < 0 || ratio < min_ratio) min_ratio = ratio;
    }
  }
  cert.rho = min_ratio < 0 ? Real(0) : min_ratio;
  cert.k_start = max_violating_k + 1;
  cert.real_branch_flagged = even_real_pair && cert.tightest_real_pair.has_value();
  if (min_real_ratio > 0) cert.tightest_real_ratio = min_real_ratio;

  // Mirror the coincidence list so both orientations are present.
  size_t one_way = cert.violations.size();
  for (size_t i = 0; i < one_way; ++i)
    cert.violations.push_back({cert.violations[i].second, cert.violations[i].first});
  return cert;
}

X0Spec X0Spec::rational(long p, long q) {
  if (q <= 0) fail(Errc::BadInput, "rational x0 needs q > 0");
  X0Spec s;
  s.is_rational = true;
  s.p = p;
  s.q = q;
  return s;
}

X0Spec X0Spec::irrational(Irrational theta) {
  X0Spec s;
  s.is_rational = false;
  s.theta = std::move(theta);
  return s;
}

std::string X0Spec::describe() const {
  if (is_rational) return "(" + std::to_string(p) + "/" + std::to_string(q) + ")*pi";
  return "(" + theta->describe() + ")*pi";
}

Verdict check_pointwise(const SystemParams& params, const X0Spec& x0, int k_max) {
  params.validate();
  PrecisionGuard guard(params.precision);
  Verdict v;
  v.setting = Setting::PointwiseApprox;
  v.checked_range = k_max;

  if (x0.is_rational) {
    if (x0.p <= 0 || x0.p >= x0.q) fail(Errc::X0OutOfRange, "x0/pi must lie in (0,1)");
    v.outcome = Outcome::NotControllable;
    Witness w;
    w.kind = "rational_x0";
    w.mode = ModeIndex{0, static_cast<int>(x0.q)};
    w.detail = "sin(k x0) = 0 for mode k = " + std::to_string(x0.q);
    v.witness = w;
    v.reason = "x0 is a rational multiple of pi";
    // A spectral coincidence is an independent second witness; record it.
    if (params.alpha != 0) {
      Spectrum spec = compute_spectrum(params, k_max);
      if (!spec.collisions.empty()) {
        const auto& c = spec.collisions.front();
        push_cert(v, "collision_witness",
                  "(" + std::to_string(c.first.first) + "," + std::to_string(c.first.second) +
                      ")=(" + std::to_string(c.second.first) + "," +
                      std::to_string(c.second.second) + ")");
      }
    }
    return v;
  }

  Real theta = x0.theta->value(params.precision);
  if (theta <= 0 || theta >= 1) fail(Errc::X0OutOfRange, "x0/pi must lie in (0,1)");

  if (params.alpha != 0) {
    Spectrum spec = compute_spectrum(params, k_max);
    if (!spec.collisions.empty()) {
      v.outcome = Outcome::NotControllable;
      Witness w;
      w.kind = "collision";
      w.collision = spec.collisions.front();
      w.detail = "eigenvalue of geometric multiplicity 2 on the checked range";
      v.witness = w;
      v.reason = "spectral simplicity fails";
      return v;
    }
  }
  v.outcome = Outcome::Controllable;
  v.range_certified = true;
  v.reason = "x0/pi irrational by construction and spectrum simple up to k_max";
  return v;
}

TThetaEstimate estimate_T_theta(const Irrational& theta, const Real& d, long k_min, long k_max) {
  if (k_min < 1 || k_max < k_min) fail(Errc::BadInput, "bad k range");
  unsigned digits = static_cast<unsigned>(2 * std::log10(static_cast<double>(k_max)) + 30) + 1;
  if (theta.max_digits() < digits)
    fail(Errc::InsufficientPrecision, "theta carries fewer digits than the range requires");

  PrecisionGuard guard(std::max(digits, current_precision()));
  TThetaEstimate est;
  est.digits_used = digits;
  Real theta_pi = theta.value(digits) * pi();
  for (long k = k_min; k <= k_max; ++k) {
    Real s = abs(sin(Real(k) * theta_pi));
    Real val = -log(s) / (d * Real(k) * Real(k));
    if (est.trace.empty() || val > est.value) {
      est.value = val;
      est.argmax_k = k;
      est.trace.emplace_back(k, val);
    }
  }
  return est;
}

Verdict check_pointwise_null(const SystemParams& params, const Irrational& theta, const Real& T,
                             long k_max) {
  params.validate();
  PrecisionGuard guard(params.precision);
  Verdict v;
  v.setting = Setting::PointwiseNull;
  v.checked_range = static_cast<int>(k_max);
  TThetaEstimate est = estimate_T_theta(theta, params.d, 1, k_max);
  push_cert(v, "T_theta_estimate", dec(est.value, 20));
  push_cert(v, "argmax_k", std::to_string(est.argmax_k));
  if (T > est.value) {
    v.outcome = Outcome::Controllable;
    v.range_certified = true;
    v.reason = "T exceeds the range-limited minimal-time estimate";
  } else {
    // The estimate is a lower bound of a limsup; at or below it no verdict
    // is claimed.
    v.outcome = Outcome::Undetermined;
    v.reason = "T does not exceed the range-limited minimal-time estimate";
  }
  return v;
}

Verdict check_distributed(const SystemParams& params, int k_max) {
  params.validate();
  PrecisionGuard guard(params.precision);
  Verdict v;
  v.setting = Setting::DistributedConstant;
  v.checked_range = k_max;
  int min_rank = params.n;
  for (int k = 1; k <= k_max; ++k) {
    KalmanResult kal = kalman_matrix(params, k);
    min_rank = std::min(min_rank, kal.rank);
  }
  push_cert(v, "min_rank", std::to_string(min_rank));
  if (min_rank == params.n) {
    v.outcome = Outcome::Controllable;
    v.reason = "controllability matrix has full rank for every checked mode";
  } else {
    v.outcome = Outcome::NotControllable;
    Witness w;
    w.kind = "rank_deficiency";
    w.detail = "controllability matrix rank " + std::to_string(min_rank);
    v.witness = w;
    v.reason = "rank deficiency on the checked range";
  }
  return v;
}

WitnessReport fattorini_witness_distributed(const ScalarFn& q, std::pair<Real, Real> omega,
                                            const ScalarFn& psi, const ScalarFn& phi,
                                            const Real& lambda, const std::vector<Real>& seams,
                                            unsigned grid_points, const Real& ode_tol,
                                            const Real& phi_tol) {
  WitnessReport rep;
  Real pi_v = pi();
  Real h = pi_v / static_cast<int>(grid_points);

  std::vector<Real> psi_v(grid_points + 1), phi_v(grid_points + 1);
  for (unsigned i = 0; i <= grid_points; ++i) {
    Real x = h * static_cast<int>(i);
    psi_v[i] = psi(x);
    phi_v[i] = phi(x);
  }

  auto near_seam = [&](unsigned i) {
    Real x = h * static_cast<int>(i);
    for (const auto& s : seams)
      if (abs(x - s) < 3 * h) return true;
    return false;
  };

  // Fourth-order central second derivative.
  auto d2 = [&](const std::vector<Real>& f, unsigned i) {
    return (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) / (12 * h * h);
  };

  Real l2psi{0}, l2phi{0};
  for (unsigned i = 0; i <= grid_points; ++i) {
    l2psi += psi_v[i] * psi_v[i];
    l2phi += phi_v[i] * phi_v[i];
  }
  rep.psi_norm = sqrt(l2psi * h);
  rep.phi_norm = sqrt(l2phi * h);

  for (unsigned i = 2; i + 2 <= grid_points; ++i) {
    if (near_seam(i)) continue;
    Real x = h * static_cast<int>(i);
    Real psixx = d2(psi_v, i);
    Real r1 = abs(-psixx + q(x) * psi_v[i] - lambda * psi_v[i]);
    Real r2 = abs(-d2(phi_v, i) - psixx - lambda * phi_v[i]);
    if (r1 > rep.ode1_residual) {
      rep.ode1_residual = r1;
      if (r1 > ode_tol && rep.failure.empty()) {
        rep.failure = "ResidualTooLarge: first eigen-equation";
        rep.failure_location = x;
      }
    }
    if (r2 > rep.ode2_residual) {
      rep.ode2_residual = r2;
      if (r2 > ode_tol && rep.failure.empty()) {
        rep.failure = "ResidualTooLarge: second eigen-equation";
        rep.failure_location = x;
      }
    }
  }

  for (unsigned i = 0; i <= grid_points; ++i) {
    Real x = h * static_cast<int>(i);
    if (x >= omega.first && x <= omega.second) {
      Real v = abs(phi_v[i]);
      if (v > rep.phi_max_on_omega) rep.phi_max_on_omega = v;
    }
  }
  if (rep.phi_max_on_omega > phi_tol && rep.failure.empty()) rep.failure = "phi not null on omega";

  rep.pass = rep.ode1_residual <= ode_tol && rep.ode2_residual <= ode_tol &&
             rep.phi_max_on_omega <= phi_tol;
  return rep;
}

}  // namespace pwb
