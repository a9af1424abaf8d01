// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion pins its tolerances in code.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <vector>

#include "pwb/construct.hpp"
#include "pwb/criteria.hpp"
#include "pwb/io.hpp"
#include "pwb/moments.hpp"
#include "pwb/opcalc.hpp"
#include "pwb/quadrature.hpp"
#include "pwb/sim.hpp"
#include "pwb/synth.hpp"

#include "support.hpp"

using namespace pwb;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::function<bool(std::string&)> run;
  double budget_seconds = 0;  // 0 = no budget
};

bool g_all_pass = true;

void run_all(const std::vector<Criterion>& list) {
  for (const auto& c : list) {
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_budget = c.budget_seconds == 0 || secs <= c.budget_seconds;
    bool pass = ok && in_budget;
    g_all_pass = g_all_pass && pass;
    std::printf("criterion %2d: %s  [%6.2fs%s]  %s%s%s\n", c.id, pass ? "PASS" : "FAIL", secs,
                in_budget ? "" : " OVER BUDGET", c.title.c_str(), detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
  }
}

InitialState random_state(int n, int K, unsigned seed, InitialState::Space space) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  InitialState y;
  y.n = n;
  y.space = space;
  for (int k = 1; k <= K; ++k) {
    CVec v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = Complex{Real(u(rng))};
    y.coeffs[k] = v;
  }
  return y;
}

// 1. Explicit spectrum over the parameter grid.
bool crit1(std::string& detail) {
  PrecisionGuard guard(50);
  bool ok = true;
  Real worst_res{0}, worst_prod{0};
  for (int n : {2, 3, 4, 5}) {
    for (const char* d : {"1", "2"}) {
      for (const char* alpha : {"-2", "-1", "0", "1", "2"}) {
        auto p = SystemParams::make(n, d, alpha, 50);
        Spectrum s = compute_spectrum(p, 50);
        for (const auto& pair : s.pairs) {
          Real res = eigen_residual(p, pair) / std::max(Real(1), abs(pair.lambda));
          worst_res = std::max(worst_res, res);
          ok = ok && res <= ten_pow(-12);
        }
        if (p.alpha != 0) {
          for (int k = 1; k <= 50; ++k) {
            Complex rhs{p.alpha * pow(Real(k), 2 * (n - 1))};
            Complex prod{Real(1)};
            for (int j = 0; j < n; ++j) {
              Complex root = s.at(j, k).lambda - Complex{p.d * k * k};
              Real branch = abs(pow_uint(root, static_cast<unsigned>(n)) - rhs) / abs(rhs);
              worst_prod = std::max(worst_prod, branch);
              prod *= root;
            }
            Complex signed_rhs = n % 2 == 0 ? -rhs : rhs;
            Real rel = abs(prod - signed_rhs) / abs(rhs);
            worst_prod = std::max(worst_prod, rel);
            ok = ok && rel <= ten_pow(-10);
          }
        }
      }
    }
  }
  detail = "max residual " + dec(worst_res, 3) + ", max product defect " + dec(worst_prod, 3);
  return ok;
}

// 2. Resonance exactness and the gap certificate.
bool crit2(std::string& detail) {
  PrecisionGuard guard(50);
  bool ok = true;
  for (const char* alpha : {"1", "4", "9"}) {
    auto p = SystemParams::make(2, "1", alpha, 50);
    long m = sqrt_as_positive_integer(*p.alpha_exact).value().convert_to<long>();
    Spectrum s = compute_spectrum(p, 50);
    for (int k = 1; k + m <= 50; ++k) {
      ok = ok && s.collides(0, k, 1, k + static_cast<int>(m));
      Real gap = abs(s.at(0, k).lambda - s.at(1, k + static_cast<int>(m)).lambda);
      ok = ok && gap <= ten_pow(-12);
    }
  }
  auto p2 = SystemParams::make(2, "1", "2", 50);
  Spectrum s2 = compute_spectrum(p2, 200);
  ok = ok && s2.collisions.empty();
  GapCertificate cert = check_gap(p2, 200);
  ok = ok && cert.violations.empty() && cert.rho > 0;
  detail = "alpha=2 gap rho = " + dec(cert.rho, 4);
  return ok;
}

// 3. Controllability-matrix determinant product form.
bool crit3(std::string& detail) {
  PrecisionGuard guard(50);
  bool ok = true;
  Real worst{0};
  for (int n = 2; n <= 6; ++n) {
    auto p = SystemParams::make(n, "1", "-2", 50);
    for (int k = 1; k <= 20; ++k) {
      KalmanResult kr = kalman_matrix(p, k);
      Real rel = abs(kr.abs_det - kr.closed_form) / kr.closed_form;
      worst = std::max(worst, rel);
      ok = ok && rel <= ten_pow(-10) && kr.rank == n;
    }
  }
  detail = "max determinant defect " + dec(worst, 3);
  return ok;
}

// 4. Biorthogonal families at precision 300.
bool crit4(std::string& detail) {
  std::vector<Complex> lambdas;
  std::vector<unsigned> plain_deg, gen_deg;
  {
    PrecisionGuard guard(300);
    for (int k = 1; k <= 12; ++k) {
      lambdas.push_back(Complex{Real(k) * k});
      plain_deg.push_back(1);
      gen_deg.push_back(3);
    }
  }
  BiorthogonalFamily plain =
      biortho(ExponentFamily::generalized(lambdas, plain_deg, Real(1), 300));
  BiorthogonalFamily gen = biortho(ExponentFamily::generalized(lambdas, gen_deg, Real(1), 300));
  PrecisionGuard guard(300);
  bool ok = plain.residual <= ten_pow(-30) && gen.residual <= ten_pow(-30);
  detail = "plain residual " + dec(plain.residual, 3) + ", generalized " + dec(gen.residual, 3);
  return ok;
}

// 5. Duality identity over a randomized suite.
bool crit5(std::string& detail) {
  std::mt19937 rng(20240809);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick_n(2, 3);
  const char* alphas[] = {"-2", "-1", "1", "2", "0"};
  PrecisionGuard guard(60);
  Real worst{0};
  for (int trial = 0; trial < 20; ++trial) {
    int n = pick_n(rng);
    auto p = SystemParams::make(n, "1", alphas[trial % 5], 60);
    Real T = Real(1) / 2;
    ControlSignal v;
    v.T = T;
    v.shift = Real(0);
    for (int i = 0; i < 3; ++i)
      v.terms.push_back(
          {Complex{Real(1 + i), Real(u(rng))}, 0, Complex{Real(u(rng)), Real(u(rng))}});
    InitialState y = random_state(n, 4, 100 + static_cast<unsigned>(trial),
                                  InitialState::Space::Hminus1);
    int j = trial % n;
    if (p.alpha == 0) j = std::min(j, n - 1);
    Real r = duality_residual(p, y, v, {{j, 2, Complex{Real(1)}}}, T);
    worst = std::max(worst, r);
  }
  detail = "max residual " + dec(worst, 3);
  return worst <= ten_pow(-8);
}

// 6. End-to-end boundary null control with doubling truncation.
//
// (a) and (b) hold with large margins. (c) asserts the total terminal
// H^{-1} norm decreases as K doubles; measurement shows the opposite at
// this horizon: the two real branches interlace with gaps ~0.83k against
// magnitudes ~k^2, so the minimal-norm section cost grows steeply in K
// (||q_1|| = 3.7e4 / 5.3e7 / 1.3e11 at K = 4/8/16, cross-checked against an
// independent collocation least-norm solve), and every control meeting
// (a)-(b) at K = 16 excites the uncontrolled tail accordingly. The check is
// implemented as stated and reports the measured growth.
bool crit6(std::string& detail) {
  auto p = SystemParams::make(2, "1", "2", 300);
  Real T = Real(1) / 2;
  InitialState y = random_state(2, 8, 77, InitialState::Space::Hminus1);
  bool ok_residuals = true, ok_terminal = true, ok_tail = true;
  Real prev_norm{-1};
  std::string norms;
  for (int K : {4, 8, 16}) {
    Spectrum s = compute_spectrum(p, K);
    MomentProblem prob = build_boundary_problem(p, s, y, K, T);
    ControlSignal v = solve_problem(prob);
    MomentResiduals res = verify_moments(v, prob);
    ok_residuals = ok_residuals && res.max_residual <= ten_pow(-30);

    std::vector<Real> grid{T};
    ModalTrajectory traj = simulate_boundary(p, y, &v, 48, grid);
    for (int k = 1; k <= K; ++k) {
      Real mag = vec_norm(traj.terminal(k));
      ok_terminal = ok_terminal && mag <= ten_pow(-8);
    }
    Real hm1 = traj.terminal_Hm1;
    if (prev_norm >= 0) ok_tail = ok_tail && hm1 < prev_norm;
    prev_norm = hm1;
    norms += (norms.empty() ? "" : ", ") + dec(hm1, 3);
  }
  detail = std::string("(a) residuals<=1e-30: ") + (ok_residuals ? "yes" : "NO") +
           "; (b) modes<=1e-8: " + (ok_terminal ? "yes" : "NO") +
           "; (c) tail norms decreasing: " + (ok_tail ? "yes" : "NO") + " [" + norms + "]";
  return ok_residuals && ok_terminal && ok_tail;
}

// 7. Single-chain pipeline: reduction oracle and terminal smallness.
bool crit7(std::string& detail) {
  auto p = SystemParams::make(3, "1", "0", 300);
  PrecisionGuard guard(300);
  Real T{1};
  InitialState y = random_state(3, 5, 55, InitialState::Space::Hminus1);

  // Reduction against a dense solve.
  bool ok = true;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 1; k <= 5; ++k) {
    CVec rhs(3);
    for (int i = 0; i < 3; ++i) rhs[static_cast<size_t>(i)] = Complex{Real(u(rng))};
    CVec fast = triangular_reduce(p, k, rhs);
    CVec dense = lu_solve(lu_factor(jordan_moment_matrix(p, k)), rhs);
    for (int i = 0; i < 3; ++i)
      ok = ok && abs(fast[static_cast<size_t>(i)] - dense[static_cast<size_t>(i)]) <= ten_pow(-20);
  }

  MomentProblem prob = build_alpha0_problem(p, y, 5, T);
  ControlSignal v = solve_problem(prob);
  ok = ok && verify_moments(v, prob).max_residual <= ten_pow(-30);
  ModalTrajectory traj = simulate_boundary(p, y, &v, 5, {T});
  Real worst{0};
  for (int k = 1; k <= 5; ++k) worst = std::max(worst, vec_norm(traj.terminal(k)));
  ok = ok && worst <= ten_pow(-8);
  detail = "max terminal mode " + dec(worst, 3);
  return ok;
}

// 8. Resonant subspace dichotomy.
bool crit8(std::string& detail) {
  auto p = SystemParams::make(2, "1", "4", 300);
  Real T = Real(1) / 2;
  bool ok = true;
  Real worst_res{0};
  for (unsigned trial = 0; trial < 10; ++trial) {
    InitialState raw = random_state(2, 6, 300 + trial, InitialState::Space::Hminus1);
    InitialState member = testsupport::project_onto_X(raw, 2, p);
    ResonantSynthesis rs = build_resonant_problem(p, member, 8, T);
    ok = ok && rs.membership.member && rs.problem.has_value();
    if (!rs.problem) continue;
    ControlSignal v = solve_problem(*rs.problem);
    Real r = verify_moments(v, *rs.problem).max_residual;
    worst_res = std::max(worst_res, r);
    ok = ok && r <= ten_pow(-30);
  }
  for (unsigned trial = 0; trial < 10; ++trial) {
    InitialState raw = random_state(2, 6, 400 + trial, InitialState::Space::Hminus1);
    // Perturb one compatibility condition deliberately.
    InitialState member = testsupport::project_onto_X(raw, 2, p);
    CVec v2 = member.coeffs.count(2) ? member.coeffs.at(2) : CVec(2);
    v2[0] += Complex{Real(1 + static_cast<int>(trial)) / 11};
    member.coeffs[2] = v2;
    ResonantSynthesis rs = build_resonant_problem(p, member, 8, T);
    ok = ok && !rs.membership.member && !rs.problem.has_value();
  }
  detail = "max member residual " + dec(worst_res, 3);
  return ok;
}

// 9. Pointwise minimal-time estimator and observability blow-up.
bool crit9(std::string& detail) {
  Irrational theta = Irrational::surd(-1, 1, 2, 1);
  // Tail estimate from the first dyadic anchor; the limsup ignores the
  // small-k transient (which peaks at k = 2).
  TThetaEstimate tail = estimate_T_theta(theta, Real(1), 100, 10000);
  PrecisionGuard guard(60);
  bool ok = tail.value <= parse_real("0.005");

  Real m100 = estimate_T_theta(theta, Real(1), 100, 200).value;
  Real m1000 = estimate_T_theta(theta, Real(1), 1000, 2000).value;
  Real m5000 = estimate_T_theta(theta, Real(1), 5000, 10000).value;
  ok = ok && m1000 <= m100 && m5000 <= m1000;

  // Designed small-denominator subsequence: the quotient must increase.
  auto p = SystemParams::make(3, "1", "1", 200);
  Irrational designed = Irrational::continued_fraction(
      {Int(0), Int(2), Int(2), Int(2), Int(2), Int(8), pow(Int(10), 60)});
  auto conv = designed.convergents(6);
  X0Spec x0 = X0Spec::irrational(designed);
  Real prev{-1};
  bool increasing = true;
  for (size_t i = 1; i < conv.size(); ++i) {
    long k = conv[i].second.convert_to<long>();
    ObservabilityRatio r = observability_ratio(p, x0, static_cast<int>(k), parse_real("1e-4"));
    increasing = increasing && !r.infinite && r.value > prev;
    prev = r.value;
  }
  ok = ok && increasing;
  detail = "tail estimate " + dec(tail.value, 3) + ", blocks " + dec(m100, 3) + " >= " +
           dec(m1000, 3) + " >= " + dec(m5000, 3);
  return ok;
}

// 10. Variable-coefficient witness construction.
bool crit10(std::string& detail) {
  Counterexample ce = build_counterexample(Real("0.02"), BumpVariant::SmoothPlateau, 40);
  CounterexampleReport rep = verify_counterexample(ce, 10000);
  PrecisionGuard guard(40);
  bool ok = rep.pass && ce.constants.C1 > 0 && ce.constants.C2 > 0;
  ok = ok && rep.ode1_residual <= ten_pow(-6) && rep.ode2_residual <= ten_pow(-6);
  ok = ok && rep.phi_max_on_omega <= ten_pow(-10) && rep.boundary_defect <= ten_pow(-10);

  // Sign anchors of the two windows on the pure sine branch.
  Real anchor = 1 / pi() - 3 * sqrt(Real(3)) / 16;
  Real quad = 1 / pi() + 6 * integrate_adaptive(
                             [&](const Real& y) { return sin(6 * y) * sin(2 * y); }, Real(0),
                             5 * pi() / 12, ten_pow(-20));
  ok = ok && anchor < 0 && abs(anchor - quad) <= ten_pow(-15);
  Real anchor_r = -1 / pi() + 3 * sqrt(Real(3)) / 16;
  Real quad_r = -1 / pi() - 6 * integrate_adaptive(
                                [&](const Real& y) { return sin(6 * y) * sin(2 * y); },
                                7 * pi() / 12, pi(), ten_pow(-20));
  ok = ok && anchor_r > 0 && abs(anchor_r - quad_r) <= ten_pow(-15);

  detail = "ode residuals " + dec(rep.ode1_residual, 3) + " / " + dec(rep.ode2_residual, 3) +
           ", |phi| on window " + dec(rep.phi_max_on_omega, 3);
  return ok;
}

// 11. Algebraic resolvability: symbolic, polynomial, numeric.
bool crit11(std::string& detail) {
  using namespace pwb::opcalc;
  IdentityCheck left = verify_identity_MstarLstar();
  IdentityCheck right = verify_identity_LM();
  bool ok = left.ok && right.ok;

  MstarChain ch = build_Mstar_chain();
  DiffOp Ls = build_Lstar();
  {
    DiffOp e1(1, 2);
    e1.at(0, 0)[TermKey{0, 2}] = Coeff::constant(1);
    ok = ok && compose(ch.M1, Ls) == e1;
    DiffOp e2(1, 2);
    e2.at(0, 0)[TermKey{1, 0}] = Coeff::constant(1);
    e2.at(0, 0)[TermKey{0, 0}] = Coeff::constant(-1) * Coeff::symbol(0);
    ok = ok && compose(ch.M2, Ls) == e2;
    DiffOp e3(1, 2);
    e3.at(0, 0)[TermKey{0, 1}] = Coeff::constant(1);
    e3.at(0, 0)[TermKey{0, 0}] = Coeff::fraction(Poly::symbol(2), Rat(2), Mono{0, 1});
    ok = ok && compose(ch.M3, Ls) == e3;
    DiffOp e4(1, 2);
    e4.at(0, 0)[TermKey{0, 1}] = Coeff::constant(-1) * Coeff::symbol(0);
    e4.at(0, 0)[TermKey{0, 0}] = Coeff::constant(-1) * Coeff::symbol(1);
    e4.at(0, 0)[TermKey{1, 0}] = Coeff::fraction(Poly::symbol(2), Rat(-2), Mono{0, 1});
    ok = ok && compose(ch.M4, Ls) == e4;
    DiffOp e5(1, 2);
    e5.at(0, 0)[TermKey{0, 0}] = Coeff::fraction(Poly::symbol(1), Rat(1), Mono{1});
    ok = ok && compose(ch.M5, Ls) == e5;
  }

  // Exact polynomial substitution q(x) = x up to degree 6.
  DiffOp L = build_L();
  DiffOp M = formal_adjoint(ch.Mstar);
  for (unsigned a = 0; a <= 6 && ok; ++a)
    for (unsigned b = 0; b <= 6 && ok; ++b) {
      std::vector<XRat> psi{XRat::poly(BivarPoly::monomial(a, b, Rat(1))),
                            XRat::poly(BivarPoly::monomial(b, a, Rat(1, 3)))};
      auto back = apply_subst_x(ch.Mstar, apply_subst_x(Ls, psi));
      ok = ok && back[0] == psi[0] && back[1] == psi[1];
      auto round = apply_subst_x(L, apply_subst_x(M, psi));
      ok = ok && round[0] == psi[0] && round[1] == psi[1];
    }

  // Numeric finite-difference application over the analytic window of the
  // constructed potential, order >= 3 under h -> h/2.
  Counterexample ce = build_counterexample(Real("0.02"), BumpVariant::ExpPlateau, 40);
  PrecisionGuard guard(40);
  auto [wlo, whi] = *ce.bumps.exp_window;
  Real xc = (wlo + whi) / 2;
  unsigned jet_order = ch.Mstar.max_jet_order();
  auto qjets = [&](const Real& x) {
    Jet jet = ce.q.jet(x, jet_order);
    std::vector<Real> out(jet_order + 1);
    for (unsigned m = 0; m <= jet_order; ++m) out[m] = jet.derivative(m);
    return out;
  };
  auto psi1 = [](const Real& t, const Real& x) { return sin(2 * x) * exp(-t); };
  auto psi2 = [](const Real& t, const Real& x) { return cos(x) * exp(-2 * t); };
  std::vector<Field2> w{
      [&](const Real& t, const Real& x) {
        return sin(2 * x) * exp(-t) + 4 * sin(2 * x) * exp(-t) + ce.q(x) * sin(2 * x) * exp(-t);
      },
      [&](const Real& t, const Real& x) {
        return 2 * cos(x) * exp(-2 * t) + cos(x) * exp(-2 * t) + 4 * sin(2 * x) * exp(-t);
      },
      [&](const Real& t, const Real& x) { return -cos(x) * exp(-2 * t); }};
  Real t0 = parse_real("0.7");
  auto residual_for = [&](const Real& h) {
    auto got = apply_numeric(ch.Mstar, w, qjets, t0, xc, h);
    Real r{0};
    r = std::max(r, abs(got[0] - psi1(t0, xc)));
    r = std::max(r, abs(got[1] - psi2(t0, xc)));
    return r;
  };
  Real h0 = (whi - wlo) / 24;
  Real r1 = residual_for(h0);
  Real r2 = residual_for(h0 / 2);
  Real scale = abs(psi1(t0, xc)) + abs(psi2(t0, xc));
  ok = ok && r1 <= ten_pow(-4) * scale && r2 * 8 <= r1 * Real("1.15");
  detail = "fd residuals " + dec(r1, 3) + " -> " + dec(r2, 3);
  return ok;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "explicit spectrum over the parameter grid", crit1, 5.0},
      {2, "resonance exactness and gap certificate", crit2, 0},
      {3, "controllability determinant product form", crit3, 0},
      {4, "biorthogonal families at precision 300", crit4, 30.0},
      {5, "duality identity, randomized suite", crit5, 0},
      {6, "boundary null control end to end", crit6, 60.0},
      {7, "single-chain pipeline", crit7, 0},
      {8, "resonant subspace dichotomy", crit8, 0},
      {9, "pointwise minimal-time estimator", crit9, 0},
      {10, "variable-coefficient witness", crit10, 10.0},
      {11, "algebraic resolvability", crit11, 0},
  };
  run_all(criteria);
  if (!g_all_pass) {
    std::printf("acceptance: FAIL\n");
    return 1;
  }
  std::printf("acceptance: PASS\n");
  return 0;
}
