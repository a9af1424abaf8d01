#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pwb/criteria.hpp"

using namespace pwb;

namespace {
SystemParams make(int n, const char* d, const char* a, unsigned prec = 50) {
  return SystemParams::make(n, d, a, prec);
}
}  // namespace

TEST_CASE("boundary verdicts across the parameter cases") {
  Verdict v1 = check_boundary(make(2, "1", "2"), 50);
  CHECK(v1.outcome == Outcome::Controllable);

  Verdict v2 = check_boundary(make(2, "1", "4"), 50);
  CHECK(v2.outcome == Outcome::Resonant);
  CHECK(v2.resonant_m == 2);
  REQUIRE(v2.witness.has_value());
  CHECK(v2.witness->collision->first == ModeIndex{0, 1});
  CHECK(v2.witness->collision->second == ModeIndex{1, 3});

  Verdict v3 = check_boundary(make(3, "1", "-1"), 20);
  CHECK(v3.outcome == Outcome::NotControllable);
  REQUIRE(v3.witness.has_value());
  CHECK(v3.witness->kind == "vanishing_bdv");
  CHECK(*v3.witness->mode == ModeIndex{1, 1});

  Verdict v0 = check_boundary(make(4, "1", "0"), 10);
  CHECK(v0.outcome == Outcome::Controllable);

  // Even n >= 4 with positive coupling: minimal-time regime, but the
  // necessary observation check still fires at sqrt(alpha)/d^{n/2} integer.
  Verdict v4 = check_boundary(make(4, "1", "2"), 10);
  CHECK(v4.outcome == Outcome::Undetermined);
  Verdict v4b = check_boundary(make(4, "1", "1"), 10);
  CHECK(v4b.outcome == Outcome::NotControllable);
  CHECK(*v4b.witness->mode == ModeIndex{2, 1});

  Verdict v5 = check_boundary(make(3, "1", "1"), 30);
  CHECK(v5.outcome == Outcome::Controllable);
  CHECK(v5.range_certified);

  // Negative coupling with even n: only the simplicity scan applies.
  Verdict v6 = check_boundary(make(4, "1", "-2"), 20);
  CHECK(v6.outcome == Outcome::Controllable);
}

TEST_CASE("inexact near-resonant input is flagged undetermined") {
  SystemParams p;
  p.n = 2;
  p.precision = 50;
  PrecisionGuard guard(50);
  p.d = Real(1);
  p.alpha = Real(4) + ten_pow(-14);  // no exact form attached
  Verdict v = check_boundary(p, 10);
  CHECK(v.outcome == Outcome::Undetermined);
}

TEST_CASE("closed-form observation zeros match the numeric scan") {
  auto p = make(3, "1", "-1");
  Spectrum s = compute_spectrum(p, 10);
  auto zeros = check_BDV(p, s);
  REQUIRE(zeros.size() == 1);
  CHECK(zeros[0] == ModeIndex{1, 1});

  CHECK(check_BDV(make(3, "1", "1"), compute_spectrum(make(3, "1", "1"), 10)).empty());
  CHECK(check_BDV(make(2, "1", "2"), compute_spectrum(make(2, "1", "2"), 10)).empty());
  CHECK_THROWS_AS(check_BDV(make(2, "1", "0"), compute_spectrum(make(2, "1", "0"), 5)), Error);

  // sqrt(|alpha|)/d^{n/2} = 2 for alpha = -4 d^n.
  auto p2 = make(3, "1", "-16");
  auto z2 = check_BDV(p2, compute_spectrum(p2, 10));
  REQUIRE(z2.size() == 1);
  CHECK(z2[0] == ModeIndex{1, 4});
}

TEST_CASE("closed form agrees with |B*D*V| on random parameter sets") {
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> nd(2, 5);
  std::uniform_int_distribution<int> num(1, 9);
  for (int trial = 0; trial < 20; ++trial) {
    int n = nd(rng);
    std::string d = std::to_string(num(rng));
    std::string a = (trial % 2 ? "-" : "") + std::to_string(num(rng));
    auto p = make(n, d.c_str(), a.c_str());
    Spectrum s = compute_spectrum(p, 50);
    CHECK_NOTHROW((void)check_BDV(p, s));  // internal cross-check enforces agreement
  }
}

TEST_CASE("gap certificate on a clean two-branch spectrum") {
  auto p = make(2, "1", "2");
  GapCertificate g = check_gap(p, 50);
  CHECK(g.violations.empty());
  CHECK(g.k_start == 1);
  PrecisionGuard guard(50);
  CHECK(g.rho > 0);
  // The branch interlacing keeps gaps above min(3(2-sqrt 2), 2(sqrt 2-1)),
  // so rho * sqrt(max |lambda|) clears that constant.
  Real c0 = 3 * (2 - sqrt(Real(2)));
  Real c1 = 2 * (sqrt(Real(2)) - 1);
  Real lam_max = abs(eigenvalue(p, 0, 50));
  CHECK(g.rho * sqrt(lam_max) >= std::min(c0, c1) - ten_pow(-30));

  // Resonant case: the coincidences are exactly the shifted pairs (both
  // orientations listed, nothing else).
  GapCertificate gr = check_gap(make(2, "1", "4"), 20);
  for (int k = 1; k <= 18; ++k) {
    bool found = false;
    for (const auto& v : gr.violations)
      if (v.first == ModeIndex{0, k} && v.second == ModeIndex{1, k + 2}) found = true;
    CHECK(found);
  }
  CHECK(gr.violations.size() == 2 * 18);
  CHECK(gr.real_branch_flagged);

  GapCertificate g1 = check_gap(make(2, "1", "2"), 1);
  PrecisionGuard g2(50);
  Real expected = abs(eigenvalue(p, 0, 1) - eigenvalue(p, 1, 1)) / sqrt(abs(eigenvalue(p, 0, 1)));
  CHECK(g1.violations.empty());
  CHECK(abs(g1.rho - std::min(expected, abs(eigenvalue(p, 1, 1) - eigenvalue(p, 0, 1)) /
                                            sqrt(abs(eigenvalue(p, 1, 1))))) < ten_pow(-40));
}

TEST_CASE("resonance test over a rational grid agrees with the closed form") {
  // For d = a/b, alpha = (d m)^2 the shifted-pair coincidence must be found;
  // perturbed alpha must not resonate.
  int hits = 0;
  for (int a = 1; a <= 5; ++a)
    for (int b = 1; b <= 5; ++b)
      for (int m = 1; m <= 4; ++m) {
        if (a < b) continue;  // d >= 1
        Rat d{a, b};
        Rat alpha = d * d * Rat(m * m);
        auto p = SystemParams::make(2, d.str(), alpha.str(), 50);
        Verdict v = check_boundary(p, 12);
        CHECK(v.outcome == Outcome::Resonant);
        CHECK(v.resonant_m == m);
        ++hits;

        Rat off = alpha + Rat(1, 7);
        auto p2 = SystemParams::make(2, d.str(), off.str(), 50);
        Verdict v2 = check_boundary(p2, 12);
        CHECK(v2.outcome != Outcome::Resonant);
      }
  CHECK(hits >= 50);
}

TEST_CASE("pointwise verdicts") {
  auto p = make(3, "1", "1");
  Verdict vr = check_pointwise(p, X0Spec::rational(1, 3), 20);
  CHECK(vr.outcome == Outcome::NotControllable);
  CHECK(*vr.witness->mode == ModeIndex{0, 3});

  Verdict vi = check_pointwise(p, X0Spec::irrational(Irrational::surd(-1, 1, 2, 1)), 20);
  CHECK(vi.outcome == Outcome::Controllable);
  CHECK(vi.range_certified);

  // Rational location and a resonant spectrum: two independent witnesses.
  Verdict vb = check_pointwise(make(2, "1", "4"), X0Spec::rational(1, 2), 20);
  CHECK(vb.outcome == Outcome::NotControllable);
  CHECK(vb.witness->kind == "rational_x0");
  bool has_collision_cert = false;
  for (const auto& [k, val] : vb.certificates)
    if (k == "collision_witness") has_collision_cert = true;
  CHECK(has_collision_cert);

  CHECK_THROWS_AS(check_pointwise(p, X0Spec::rational(4, 3), 10), Error);
}

TEST_CASE("minimal-time estimate for a badly approximable location") {
  Irrational theta = Irrational::surd(-1, 1, 2, 1);
  PrecisionGuard guard(60);
  // Over the full range the maximum is the small-k transient at k = 2:
  // -log|sin(2 theta pi)| / 4 = 0.16672...; the limsup-relevant tail decays
  // like log k / k^2 and sits below 0.005 from the k = 100 anchor on.
  TThetaEstimate est = estimate_T_theta(theta, Real(1), 1, 2000);
  CHECK(est.value >= 0);
  CHECK(est.argmax_k == 2);
  Real direct = -log(abs(sin(2 * (sqrt(Real(2)) - 1) * pi()))) / 4;
  CHECK(abs(est.value - direct) < ten_pow(-30));

  TThetaEstimate tail = estimate_T_theta(theta, Real(1), 100, 2000);
  CHECK(tail.value <= parse_real("0.005"));

  // Trace is the sequence of record holders, increasing in k and value.
  for (size_t i = 1; i < est.trace.size(); ++i) {
    CHECK(est.trace[i].first > est.trace[i - 1].first);
    CHECK(est.trace[i].second > est.trace[i - 1].second);
  }

  // Symmetry under theta -> 1 - theta.
  Irrational theta2 = Irrational::surd(2, -1, 2, 1);  // 2 - sqrt(2) = 1 - (sqrt(2)-1)
  TThetaEstimate est2 = estimate_T_theta(theta2, Real(1), 1, 500);
  TThetaEstimate est1 = estimate_T_theta(theta, Real(1), 1, 500);
  CHECK(abs(est1.value - est2.value) < ten_pow(-30));
  CHECK(est1.argmax_k == est2.argmax_k);

  // Insufficient digit budget on a literal is refused.
  Irrational lit = Irrational::literal("0.4142135623730950", 16);
  CHECK_THROWS_AS((void)estimate_T_theta(lit, Real(1), 1, 10000), Error);
}

TEST_CASE("pointwise-null verdict stays silent at the estimate") {
  auto p = make(3, "1", "1");
  Irrational theta = Irrational::surd(-1, 1, 2, 1);
  PrecisionGuard guard(50);
  TThetaEstimate est = estimate_T_theta(theta, p.d, 1, 300);
  Verdict above = check_pointwise_null(p, theta, est.value * 2 + ten_pow(-3), 300);
  CHECK(above.outcome == Outcome::Controllable);
  CHECK(above.range_certified);
  Verdict at = check_pointwise_null(p, theta, est.value, 300);
  CHECK(at.outcome == Outcome::Undetermined);
}

TEST_CASE("distributed setting is Kalman-certified") {
  Verdict v = check_distributed(make(5, "2", "-7"), 15);
  CHECK(v.outcome == Outcome::Controllable);
}

TEST_CASE("witness check rejects wrong candidates") {
  PrecisionGuard guard(40);
  // psi = sin(2x), q = 32, lambda = 36: both eigen-equations hold with
  // phi = 0 -- but phi must be nontrivial only in the construction; here the
  // check is for equation residuals and the window condition.
  auto q32 = [](const Real&) { return Real(32); };
  auto psi = [](const Real& x) { return sin(2 * x); };
  auto phi0 = [](const Real&) { return Real(0); };
  std::pair<Real, Real> omega{5 * pi() / 12, 7 * pi() / 12};
  WitnessReport ok = fattorini_witness_distributed(q32, omega, psi, phi0, Real(36), {}, 2000);
  CHECK(ok.ode1_residual < ten_pow(-6));
  CHECK(ok.phi_max_on_omega == 0);

  // phi = sin(x) is visible on the window.
  auto phibad = [](const Real& x) { return sin(x); };
  WitnessReport bad = fattorini_witness_distributed(q32, omega, psi, phibad, Real(36), {}, 2000);
  CHECK(!bad.pass);
  CHECK(bad.phi_max_on_omega > ten_pow(-2));
}
