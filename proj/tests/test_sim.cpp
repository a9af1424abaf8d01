#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pwb/construct.hpp"
#include "pwb/quadrature.hpp"
#include "pwb/sim.hpp"

using namespace pwb;

namespace {

SystemParams make(int n, const char* d, const char* a, unsigned prec = 50) {
  return SystemParams::make(n, d, a, prec);
}

InitialState state_with(int n, int k, CVec v, InitialState::Space space) {
  InitialState y;
  y.n = n;
  y.space = space;
  y.coeffs[k] = std::move(v);
  return y;
}

}  // namespace

TEST_CASE("mode exponential against the series oracle") {
  PrecisionGuard guard(50);
  for (const char* alpha : {"0", "2", "-3"}) {
    auto p = make(3, "1", alpha);
    for (int k : {1, 4}) {
      CMat gen = mode_generator(p, k);
      CMat closed = mode_exponential(p, k, Real(1) / 3);
      CMat series = expm_scaled(gen, Real(1) / 3);
      CHECK(max_abs(closed - series) < ten_pow(-38));
    }
  }
}

TEST_CASE("free decay of a Jordan mode") {
  auto p = make(2, "1", "0");
  PrecisionGuard guard(50);
  Real T{Real(3) / 4};
  InitialState y = state_with(2, 1, {Complex{Real(0)}, Complex{Real(1)}},
                              InitialState::Space::Hminus1);
  ModalTrajectory traj = simulate_boundary(p, y, nullptr, 2, {Real(0), T});
  CVec zT = traj.terminal(1);
  CHECK(abs(zT[0] - Complex{-T * exp(-T)}) < ten_pow(-40));
  CHECK(abs(zT[1] - Complex{exp(-T)}) < ten_pow(-40));
  // Initial datum is reproduced at t = 0.
  CHECK(abs(traj.at(1, 0)[1] - Complex{Real(1)}) == 0);
}

TEST_CASE("free decay along eigendirections") {
  auto p = make(3, "1", "2");
  PrecisionGuard guard(50);
  Real T{Real(1) / 2};
  Spectrum s = compute_spectrum(p, 3);
  for (int j = 0; j < 3; ++j) {
    const EigenPair& pair = s.at(j, 2);
    // Right eigenvector of k^2 D + A for the same eigenvalue.
    Complex x = (pair.lambda - Complex{p.d * 4}) / Complex{Real(4)};
    CVec w{Complex{Real(1)}, x, x * x};
    InitialState y = state_with(3, 2, w, InitialState::Space::Hminus1);
    ModalTrajectory traj = simulate_boundary(p, y, nullptr, 2, {Real(0), T});
    CVec zT = traj.terminal(2);
    Complex decay = exp(-pair.lambda * T);
    for (int i = 0; i < 3; ++i) CHECK(abs(zT[static_cast<size_t>(i)] - decay * w[static_cast<size_t>(i)]) < ten_pow(-38));
  }
}

TEST_CASE("forced response against a quadrature oracle") {
  for (const char* alpha : {"2", "0"}) {
    auto p = make(2, "1", alpha, 60);
    PrecisionGuard guard(60);
    Real T{Real(2) / 3};
    ControlSignal v;
    v.T = T;
    v.shift = Real(1) / 2;
    v.terms.push_back({Complex{Real(2), Real(1)}, 0, Complex{Real(1), Real(-1)}});
    v.terms.push_back({Complex{Real(5)}, 1, Complex{Real(1) / 3}});
    InitialState y = state_with(2, 1, {Complex{Real(1)}, Complex{Real(-1)}},
                                InitialState::Space::Hminus1);
    ModalTrajectory traj = simulate_boundary(p, y, &v, 1, {T});
    CVec zT = traj.terminal(1);

    // Oracle: z(T) = E(T) z0 + int_0^T E(T-s) c v(s) ds with E by the series
    // exponential and plain adaptive quadrature per component.
    CMat ET = expm_scaled(mode_generator(p, 1), T);
    CVec base = ET * y.coeffs.at(1);
    CVec c(2);
    c[0] = Complex{Real(1)};
    c[1] = Complex{p.d};
    Real gain = sqrt(2 / pi());
    for (int i = 0; i < 2; ++i) {
      auto comp = [&](const Real& s, bool imag) {
        CMat E = expm_scaled(mode_generator(p, 1), T - s);
        CVec Ec = E * c;
        Complex val = Ec[static_cast<size_t>(i)] * v.eval(s) * Complex{gain};
        return imag ? val.im : val.re;
      };
      Real re = integrate_adaptive([&](const Real& s) { return comp(s, false); }, Real(0), T,
                                   ten_pow(-25), 16);
      Real im = integrate_adaptive([&](const Real& s) { return comp(s, true); }, Real(0), T,
                                   ten_pow(-25), 16);
      Complex oracle = base[static_cast<size_t>(i)] + Complex{re, im};
      CHECK(abs(zT[static_cast<size_t>(i)] - oracle) < ten_pow(-20));
    }
  }
}

TEST_CASE("sampled controls integrate or get refused") {
  auto p = make(2, "1", "2", 40);
  PrecisionGuard guard(40);
  Real T{1};
  // An affine control is reproduced exactly by both interpolants.
  ControlSignal analytic;
  analytic.T = T;
  analytic.shift = Real(0);
  analytic.terms.push_back({Complex{Real(0)}, 0, Complex{Real(1) / 2}});
  analytic.terms.push_back({Complex{Real(0)}, 1, Complex{Real(1) / 5}});
  InitialState y = state_with(2, 1, {Complex{Real(1)}, Complex{Real(0)}},
                              InitialState::Space::Hminus1);
  ModalTrajectory exact = simulate_boundary(p, y, &analytic, 1, {T});

  ControlSignal sampled;
  sampled.T = T;
  sampled.shift = Real(0);
  std::vector<std::pair<Real, Complex>> grid;
  for (int i = 0; i <= 40; ++i) {
    Real t = T * i / 40;
    grid.emplace_back(t, analytic.eval(t));
  }
  sampled.samples = grid;
  ModalTrajectory approx = simulate_boundary(p, y, &sampled, 1, {T});
  for (int i = 0; i < 2; ++i)
    CHECK(abs(exact.terminal(1)[static_cast<size_t>(i)] - approx.terminal(1)[static_cast<size_t>(i)]) < ten_pow(-12));

  // A coarse grid under an oscillatory control cannot certify 1e-12.
  ControlSignal wiggly;
  wiggly.T = T;
  wiggly.shift = Real(0);
  std::vector<std::pair<Real, Complex>> coarse;
  for (int i = 0; i <= 12; ++i) {
    Real t = T * i / 12;
    coarse.emplace_back(t, Complex{sin(25 * t)});
  }
  wiggly.samples = coarse;
  CHECK_THROWS_AS(simulate_boundary(p, y, &wiggly, 1, {T}), Error);
}

TEST_CASE("adjoint closed forms") {
  auto p = make(2, "1", "0");
  PrecisionGuard guard(50);
  Real T{1};
  AdjointSolution adj = adjoint_solve(p, {{1, 3, Complex{Real(1)}}}, T);
  // Terminal datum e_{n-j} w_k = e_1 w_3.
  CVec termc = adj.terminal_coeff(3);
  CHECK(abs(termc[0] - Complex{Real(1)}) < ten_pow(-40));
  CHECK(abs(termc[1]) == 0);
  // At t = 0: e^{-d k^2 T}(e_1 - k^2 T e_2).
  CVec zero = adj.initial_coeff(3);
  Real decay = exp(Real(-9) * T);
  CHECK(abs(zero[0] - Complex{decay}) < ten_pow(-40));
  CHECK(abs(zero[1] - Complex{-decay * 9 * T}) < ten_pow(-40));

  auto pa = make(3, "1", "2");
  Spectrum s = compute_spectrum(pa, 2);
  AdjointSolution adj2 = adjoint_solve(pa, {{1, 2, Complex{Real(1)}}}, T);
  // d_x phi(t, 0) = k sqrt(2/pi) e^{-lambda (T-t)} V.
  ExpSum obs = adj2.boundary_observation();
  Real t{Real(1) / 3};
  Complex expect = Complex{2 * sqrt(2 / pi())} * exp(-s.at(1, 2).lambda * (T - t)) *
                   bdv_value(pa, s.at(1, 2));
  CHECK(abs(obs.eval(T - t) - expect) < ten_pow(-40));
}

TEST_CASE("duality identity closed-form residual") {
  auto p = make(2, "1", "2", 60);
  PrecisionGuard guard(60);
  Real T{Real(1) / 2};

  InitialState zero;
  zero.n = 2;
  ControlSignal vz;
  vz.T = T;
  vz.shift = Real(0);
  CHECK(duality_residual(p, zero, vz, {{0, 2, Complex{Real(1)}}}, T) < ten_pow(-50));

  // Random three-term control, data on 4 modes.
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ControlSignal v;
  v.T = T;
  v.shift = Real(0);
  for (int i = 0; i < 3; ++i)
    v.terms.push_back({Complex{Real(1 + i), Real(u(rng))}, 0, Complex{Real(u(rng)), Real(u(rng))}});
  InitialState y;
  y.n = 2;
  for (int k = 1; k <= 4; ++k) {
    CVec c(2);
    for (int i = 0; i < 2; ++i) c[static_cast<size_t>(i)] = Complex{Real(u(rng))};
    y.coeffs[k] = c;
  }
  Real r = duality_residual(p, y, v, {{0, 2, Complex{Real(1)}}}, T);
  CHECK(r < ten_pow(-8));

  // Flipping the conjugation convention breaks the identity by a visible
  // margin once the eigendata is genuinely complex: recompute the pairing
  // bilinearly instead of hermitian on a three-component system.
  auto p3 = make(3, "1", "2", 60);
  InitialState y3;
  y3.n = 3;
  for (int k = 1; k <= 3; ++k) {
    CVec c(3);
    for (int i = 0; i < 3; ++i) c[static_cast<size_t>(i)] = Complex{Real(u(rng))};
    y3.coeffs[k] = c;
  }
  Real straight = duality_residual(p3, y3, v, {{1, 2, Complex{Real(1)}}}, T);
  CHECK(straight < ten_pow(-8));
  AdjointSolution phi = adjoint_solve(p3, {{1, 2, Complex{Real(1)}}}, T);
  ModalTrajectory traj = simulate_boundary(p3, y3, &v, 3, {Real(0), T});
  Complex lhs_flip{};
  {
    CVec phiT_k = phi.terminal_coeff(2);
    CVec phi0_k = phi.initial_coeff(2);
    const CVec& zT = traj.terminal(2);
    CVec y0k = y3.coeffs.at(2);
    for (int i = 0; i < 3; ++i) {
      lhs_flip += zT[static_cast<size_t>(i)] * phiT_k[static_cast<size_t>(i)];  // no conjugation
      lhs_flip -= y0k[static_cast<size_t>(i)] * phi0_k[static_cast<size_t>(i)];
    }
  }
  Complex rhs = inner_product(v.reversed(), phi.boundary_observation(), Real(0), T);
  CHECK(abs(lhs_flip - rhs) > ten_pow(-2));
}

TEST_CASE("duality for the single-chain adjoint") {
  auto p = make(3, "1", "0", 60);
  PrecisionGuard guard(60);
  Real T{Real(1) / 3};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ControlSignal v;
  v.T = T;
  v.shift = Real(0);
  v.terms.push_back({Complex{Real(2)}, 1, Complex{Real(u(rng))}});
  v.terms.push_back({Complex{Real(3), Real(1)}, 0, Complex{Real(u(rng)), Real(u(rng))}});
  InitialState y;
  y.n = 3;
  for (int k = 1; k <= 2; ++k) {
    CVec c(3);
    for (int i = 0; i < 3; ++i) c[static_cast<size_t>(i)] = Complex{Real(u(rng))};
    y.coeffs[k] = c;
  }
  for (int j = 0; j < 3; ++j)
    CHECK(duality_residual(p, y, v, {{j, 2, Complex{Real(1)}}}, T) < ten_pow(-8));
}

TEST_CASE("mode decoupling and energy decay") {
  auto p = make(2, "1", "0", 40);
  PrecisionGuard guard(40);
  InitialState y;
  y.n = 2;
  y.coeffs[1] = {Complex{Real(1)}, Complex{Real(1) / 2}};
  y.coeffs[3] = {Complex{Real(-1)}, Complex{Real(1)}};
  std::vector<Real> grid;
  for (int i = 0; i <= 16; ++i) grid.push_back(Real(1) + Real(i) / 4);
  ModalTrajectory traj = simulate_boundary(p, y, nullptr, 3, grid);
  // L2 norm non-increasing from t = 1 on.
  Real prev{-1};
  for (size_t ti = 0; ti < grid.size(); ++ti) {
    Real norm2_total{0};
    for (const auto& [k, path] : traj.modes)
      for (const auto& z : path[ti]) norm2_total += norm2(z);
    if (prev >= 0) CHECK(norm2_total <= prev + ten_pow(-30));
    prev = norm2_total;
  }

  ModalTrajectory single = simulate_boundary(p, y, nullptr, 1, grid);
  for (size_t ti = 0; ti < grid.size(); ++ti)
    for (int i = 0; i < 2; ++i)
      CHECK(abs(single.at(1, ti)[static_cast<size_t>(i)] - traj.at(1, ti)[static_cast<size_t>(i)]) == 0);
}

TEST_CASE("distributed decay for the potential variant") {
  PrecisionGuard guard(30);
  // q = 0: the first component picks up the chain term -k^2 t e^{-k^2 t}.
  DistributedSystem sys = DistributedSystem::potential(
      [](const Real&) { return Real(0); }, {}, {pi() / 4, pi() / 2}, 30);
  InitialState y;
  y.n = 2;
  y.coeffs[1] = {Complex{Real(0)}, Complex{Real(1)}};
  y.coeffs[2] = {Complex{Real(1)}, Complex{Real(0)}};
  Real T{Real(1) / 2};
  ModalTrajectory traj =
      simulate_distributed(sys, y, DistributedControl{}, 4, {Real(0), T}, ten_pow(-11));
  CVec z1 = traj.terminal(1);
  CHECK(abs(z1[0] - Complex{-T * exp(-T)}) < ten_pow(-8));
  CHECK(abs(z1[1] - Complex{exp(-T)}) < ten_pow(-8));
  CVec z2 = traj.terminal(2);
  CHECK(abs(z2[0] - Complex{exp(-4 * T)}) < ten_pow(-8));

  // Constant potential: same controllability matrix as q = 0 and the decay
  // rates split into k^2 and k^2 + q0.
  auto pq = make(2, "1", "0");
  KalmanResult k1 = kalman_matrix(pq, 1);
  DistributedSystem sysq = DistributedSystem::potential(
      [](const Real&) { return Real(5); }, {}, {pi() / 4, pi() / 2}, 30);
  InitialState y2;
  y2.n = 2;
  y2.coeffs[1] = {Complex{Real(1)}, Complex{Real(0)}};
  ModalTrajectory tq =
      simulate_distributed(sysq, y2, DistributedControl{}, 3, {Real(0), T}, ten_pow(-11));
  CHECK(abs(tq.terminal(1)[0] - Complex{exp(-(1 + 5) * T)}) < ten_pow(-8));
  CHECK(k1.rank == 2);  // independent of the constant potential
}

TEST_CASE("constant-coupling distributed run matches the modal closed form") {
  auto p = make(2, "1", "3", 30);
  PrecisionGuard guard(30);
  DistributedSystem sys = DistributedSystem::constant_coupling(p, {pi() / 3, pi() / 2});
  InitialState y;
  y.n = 2;
  y.coeffs[2] = {Complex{Real(1)}, Complex{Real(-1)}};
  Real T{Real(1) / 4};
  ModalTrajectory traj =
      simulate_distributed(sys, y, DistributedControl{}, 3, {Real(0), T}, ten_pow(-11));
  CMat E = mode_exponential(p, 2, T);
  CVec oracle = E * y.coeffs.at(2);
  for (int i = 0; i < 2; ++i)
    CHECK(abs(traj.terminal(2)[static_cast<size_t>(i)] - oracle[static_cast<size_t>(i)]) < ten_pow(-8));
}

TEST_CASE("observability quotient") {
  auto p = make(3, "1", "1", 60);
  PrecisionGuard guard(60);
  // Rational location hitting a node: the observation vanishes identically.
  ObservabilityRatio r0 = observability_ratio(p, X0Spec::rational(1, 3), 3, Real(1));
  CHECK(r0.infinite);

  // Fixed k, growing horizon: the quotient collapses when sin is O(1).
  X0Spec x0 = X0Spec::irrational(Irrational::surd(-1, 1, 2, 1));
  Real r1 = observability_ratio(p, x0, 2, Real(1)).value;
  Real r2 = observability_ratio(p, x0, 2, Real(4)).value;
  Real r3 = observability_ratio(p, x0, 2, Real(8)).value;
  CHECK(r2 < r1);
  CHECK(r3 < r2);
  CHECK(r3 < ten_pow(-8));
}

TEST_CASE("small-denominator subsequence drives the quotient up") {
  auto p = make(3, "1", "1", 200);
  // Partial quotients chosen so each convergent denominator has an
  // exceptionally small sine while k^2 T stays moderate.
  Irrational theta = Irrational::continued_fraction(
      {Int(0), Int(2), Int(2), Int(2), Int(2), Int(8), pow(Int(10), 60)});
  auto conv = theta.convergents(6);
  std::vector<long> ks;
  for (size_t i = 1; i < conv.size(); ++i) ks.push_back(conv[i].second.convert_to<long>());
  // Denominators: 2, 5, 12, 29, 244.
  CHECK(ks.back() == 244);
  PrecisionGuard guard(200);
  Real T = parse_real("1e-4");
  X0Spec x0 = X0Spec::irrational(theta);
  Real prev{-1};
  for (long k : ks) {
    ObservabilityRatio r = observability_ratio(p, x0, static_cast<int>(k), T);
    REQUIRE(!r.infinite);
    CHECK(r.value > prev);
    prev = r.value;
  }
  CHECK(prev > ten_pow(100));  // the last convergent has sine ~ 1e-62
}

TEST_CASE("adjoint invariant of the counterexample potential") {
  // L0^*(psi, phi) = 36 (psi, phi) makes e^{36 t} <y(t), (psi, phi)> constant
  // along the forward flow. Low-mode data keeps the stiff tail quiet.
  Counterexample ce = build_counterexample(Real("0.02"), BumpVariant::SmoothPlateau, 30);
  unsigned prec = 25;
  PrecisionGuard guard(prec);
  int K = 40;
  DistributedSystem sys = DistributedSystem::potential(
      [&ce](const Real& x) { return ce.q(x); }, ce.seams, ce.omega, prec);

  InitialState y;
  y.n = 2;
  y.coeffs[1] = {Complex{Real(1)}, Complex{Real(1) / 2}};
  y.coeffs[2] = {Complex{Real(-1) / 3}, Complex{Real(1) / 4}};
  y.coeffs[3] = {Complex{Real(1) / 5}, Complex{Real(-1) / 6}};

  // Witness coefficients by per-piece panels sized for the oscillation.
  auto sine_coeff = [&](const PiecewiseSmoothFn& f, int k) {
    Real acc{0};
    for (const auto& piece : ce.psi.pieces()) {
      unsigned panels =
          4 + static_cast<unsigned>((Real(k) * (piece.hi - piece.lo)).convert_to<double>());
      acc += integrate_panels(
          [&](const Real& x) { return f(x) * sqrt(2 / pi()) * sin(k * x); }, piece.lo, piece.hi,
          panels, 16);
    }
    return acc;
  };
  std::vector<Real> psi_hat(static_cast<size_t>(K) + 1), phi_hat(static_cast<size_t>(K) + 1);
  for (int k = 1; k <= K; ++k) {
    psi_hat[static_cast<size_t>(k)] = sine_coeff(ce.psi, k);
    phi_hat[static_cast<size_t>(k)] = sine_coeff(ce.phi, k);
  }

  std::vector<Real> grid{Real(0), Real(1) / 2000, Real(1) / 1000};
  ModalTrajectory traj = simulate_distributed(sys, y, DistributedControl{}, K, grid, ten_pow(-10));
  std::vector<Real> invariant;
  for (size_t ti = 0; ti < grid.size(); ++ti) {
    Real pairing{0};
    for (int k = 1; k <= K; ++k) {
      const CVec& z = traj.at(k, ti);
      pairing += z[0].re * psi_hat[static_cast<size_t>(k)] + z[1].re * phi_hat[static_cast<size_t>(k)];
    }
    invariant.push_back(exp(Real(36) * grid[ti]) * pairing);
  }
  for (size_t i = 1; i < invariant.size(); ++i)
    CHECK(abs(invariant[i] - invariant[0]) < ten_pow(-6) * (1 + abs(invariant[0])));
}
