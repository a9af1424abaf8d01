#include "pwb/construct.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "pwb/errors.hpp"
#include "pwb/quadrature.hpp"

namespace pwb {

PiecewiseSmoothFn::PiecewiseSmoothFn(std::vector<Piece> pieces, int continuity_order)
    : pieces_(std::move(pieces)), continuity_order_(continuity_order) {
  if (pieces_.empty()) fail(Errc::BadInput, "piecewise function needs at least one piece");
  for (size_t i = 0; i + 1 < pieces_.size(); ++i)
    if (pieces_[i].hi != pieces_[i + 1].lo) fail(Errc::BadInput, "pieces must tile the interval");
}

const PiecewiseSmoothFn::Piece& PiecewiseSmoothFn::piece_at(const Real& x) const {
  size_t lo = 0, hi = pieces_.size();
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (x < pieces_[mid].lo)
      hi = mid;
    else
      lo = mid;
  }
  return pieces_[lo];
}

Jet PiecewiseSmoothFn::jet(const Real& x, unsigned order) const {
  return piece_at(x).fn(x, order);
}

Real PiecewiseSmoothFn::eval(const Real& x, unsigned order) const {
  return jet(x, order).derivative(order);
}

std::vector<Real> PiecewiseSmoothFn::interior_breaks() const {
  std::vector<Real> b;
  for (size_t i = 0; i + 1 < pieces_.size(); ++i) b.push_back(pieces_[i].hi);
  return b;
}

std::vector<Real> PiecewiseSmoothFn::seam_jumps(unsigned up_to_order) const {
  std::vector<Real> jumps(up_to_order + 1, Real(0));
  for (size_t i = 0; i + 1 < pieces_.size(); ++i) {
    const Real& s = pieces_[i].hi;
    Jet left = pieces_[i].fn(s, up_to_order);
    Jet right = pieces_[i + 1].fn(s, up_to_order);
    for (unsigned m = 0; m <= up_to_order; ++m) {
      Real j = abs(left.derivative(m) - right.derivative(m));
      if (j > jumps[m]) jumps[m] = j;
    }
  }
  return jumps;
}

namespace {

Jet sin2x_jet(const Real& x, unsigned order) {
  return sin(2 * Jet::variable(x, order));
}

Jet affine_jet(const Real& x, unsigned order) {
  // 3 - (6/pi) x.
  Jet j = Jet::variable(x, order);
  return Jet::constant(Real(3), order) - (6 / pi()) * j;
}

// Flat bump profile exp(-1/(1-s^2)) mapped onto (lo, hi); identically zero
// outside.
Jet bump_profile_jet(const Real& x, unsigned order, const Real& lo, const Real& hi) {
  if (x <= lo || x >= hi) return Jet(order);
  Real mid = (lo + hi) / 2;
  Real half = (hi - lo) / 2;
  Jet s = (1 / half) * (Jet::variable(x, order) - Jet::constant(mid, order));
  Jet denom = Jet::constant(Real(1), order) - s * s;
  Jet g = Jet::constant(Real(-1), order) / denom;
  return exp(g);
}

// Quintic smoothstep w(s) = 6s^5 - 15s^4 + 10s^3 clamped to [0,1].
Jet smoothstep_jet(const Jet& s) {
  if (s.value() <= 0) return Jet(s.order());
  if (s.value() >= 1) return Jet::constant(Real(1), s.order());
  Jet s2 = s * s;
  Jet s3 = s2 * s;
  return (Real(6) * s2 - Real(15) * s + Real(10) * Jet::constant(Real(1), s.order())) * s3;
}

// Flat unit step S(s) = B(s)/(B(s) + B(1-s)), B = exp(-1/s); identically 0
// for s <= 0 and 1 for s >= 1, with all derivatives matching.
Jet flat_step_jet(const Jet& s) {
  if (s.value() <= 0) return Jet(s.order());
  if (s.value() >= 1) return Jet::constant(Real(1), s.order());
  Jet one = Jet::constant(Real(1), s.order());
  Jet b1 = exp(Jet::constant(Real(-1), s.order()) / s);
  Jet b2 = exp(Jet::constant(Real(-1), s.order()) / (one - s));
  return b1 / (b1 + b2);
}

// Plateau profile S((x-lo)/r) S((hi-x)/r) with r half the support width:
// peak value 1, moderate interior derivatives.
Jet plateau_bump_jet(const Real& x, unsigned order, const Real& lo, const Real& hi) {
  if (x <= lo || x >= hi) return Jet(order);
  Real r = (hi - lo) / 2;
  Jet rise = flat_step_jet((1 / r) * (Jet::variable(x, order) - Jet::constant(lo, order)));
  Jet fall = flat_step_jet((1 / r) * (Jet::constant(hi, order) - Jet::variable(x, order)));
  return rise * fall;
}

struct Geometry {
  Real p, x1, x2, xa, xb, xc, xd, x3, x4;
  Geometry() {
    p = pi();
    x1 = p / 24;
    x2 = 3 * p / 24;
    xa = 3 * p / 8;   // blend activates on the inner half of the band
    xb = 5 * p / 12;
    xc = 7 * p / 12;
    xd = 5 * p / 8;
    x3 = 21 * p / 24;
    x4 = 23 * p / 24;
  }
};

}  // namespace

Bumps build_bumps(BumpVariant variant) {
  Geometry g;
  Bumps out;

  auto zero_piece = [](const Real& lo, const Real& hi) {
    return PiecewiseSmoothFn::Piece{lo, hi, PiecewiseSmoothFn::PieceKind::Other,
                                    [](const Real&, unsigned order) { return Jet(order); }};
  };

  auto mk = [&](const Real& lo, const Real& hi, bool plateau) {
    std::vector<PiecewiseSmoothFn::Piece> pieces;
    pieces.push_back(zero_piece(Real(0), lo));
    pieces.push_back({lo, hi, PiecewiseSmoothFn::PieceKind::Bump,
                      [lo, hi, plateau](const Real& x, unsigned order) {
                        return plateau ? plateau_bump_jet(x, order, lo, hi)
                                       : bump_profile_jet(x, order, lo, hi);
                      }});
    pieces.push_back(zero_piece(hi, g.p));
    return PiecewiseSmoothFn(std::move(pieces), 4);
  };

  if (variant == BumpVariant::SmoothPlateau || variant == BumpVariant::FlatProfile) {
    bool plateau = variant == BumpVariant::SmoothPlateau;
    out.theta1 = mk(g.x1, g.x2, plateau);
    out.theta2 = mk(g.x3, g.x4, plateau);
    return out;
  }

  // Exp-plateau variant: theta1 = e^x on an inner window, smoothly cut to
  // zero inside the support; theta2 stays the plateau profile.
  Real wlo = Real(15) * g.p / 240;  // 1.5 pi/24
  Real whi = Real(25) * g.p / 240;  // 2.5 pi/24
  std::vector<PiecewiseSmoothFn::Piece> pieces;
  pieces.push_back(zero_piece(Real(0), g.x1));
  pieces.push_back({g.x1, wlo, PiecewiseSmoothFn::PieceKind::Bump,
                    [lo = g.x1, wlo](const Real& x, unsigned order) {
                      Jet s = (1 / (wlo - lo)) * (Jet::variable(x, order) - Jet::constant(lo, order));
                      return flat_step_jet(s) * exp(Jet::variable(x, order));
                    }});
  pieces.push_back({wlo, whi, PiecewiseSmoothFn::PieceKind::Bump,
                    [](const Real& x, unsigned order) { return exp(Jet::variable(x, order)); }});
  pieces.push_back({whi, g.x2, PiecewiseSmoothFn::PieceKind::Bump,
                    [whi, hi = g.x2](const Real& x, unsigned order) {
                      Jet s = (1 / (hi - whi)) * (Jet::constant(hi, order) - Jet::variable(x, order));
                      return flat_step_jet(s) * exp(Jet::variable(x, order));
                    }});
  pieces.push_back(zero_piece(g.x2, g.p));
  out.theta1 = PiecewiseSmoothFn(std::move(pieces), 4);
  out.theta2 = mk(g.x3, g.x4, true);
  out.exp_window = std::make_pair(wlo, whi);
  return out;
}

PiecewiseSmoothFn build_psi(const Real& eps, const Real& C1, const Real& C2, const Bumps& bumps) {
  if (!(eps > 0) || eps > Real("0.05")) fail(Errc::BadInput, "eps must lie in (0, 0.05]");
  Geometry g;
  using Kind = PiecewiseSmoothFn::PieceKind;

  auto pure_sin = [](const Real& lo, const Real& hi) {
    return PiecewiseSmoothFn::Piece{lo, hi, Kind::PureSin, sin2x_jet};
  };

  std::vector<PiecewiseSmoothFn::Piece> pieces;
  pieces.push_back(pure_sin(Real(0), g.x1));
  pieces.push_back({g.x1, g.x2, Kind::Bump,
                    [C1, t = bumps.theta1](const Real& x, unsigned order) {
                      return sin2x_jet(x, order) + C1 * t.jet(x, order);
                    }});
  pieces.push_back(pure_sin(g.x2, g.xa));
  pieces.push_back({g.xa, g.xb, Kind::Blend,
                    [lo = g.xa, hi = g.xb](const Real& x, unsigned order) {
                      Jet s = (1 / (hi - lo)) * (Jet::variable(x, order) - Jet::constant(lo, order));
                      Jet w = smoothstep_jet(s);
                      Jet base = sin2x_jet(x, order);
                      return base + w * (affine_jet(x, order) - base);
                    }});
  pieces.push_back({g.xb, g.xc, Kind::Affine,
                    [](const Real& x, unsigned order) { return affine_jet(x, order); }});
  pieces.push_back({g.xc, g.xd, Kind::Blend,
                    [lo = g.xc, hi = g.xd](const Real& x, unsigned order) {
                      Jet s = (1 / (hi - lo)) * (Jet::variable(x, order) - Jet::constant(lo, order));
                      Jet w = smoothstep_jet(s);
                      Jet base = affine_jet(x, order);
                      return base + w * (sin2x_jet(x, order) - base);
                    }});
  pieces.push_back(pure_sin(g.xd, g.x3));
  pieces.push_back({g.x3, g.x4, Kind::Bump,
                    [C2, t = bumps.theta2](const Real& x, unsigned order) {
                      return sin2x_jet(x, order) - C2 * t.jet(x, order);
                    }});
  pieces.push_back(pure_sin(g.x4, g.p));
  PiecewiseSmoothFn psi(std::move(pieces), 2);

  // Closeness to the sine branch on the transition bands.
  Real band_lo = g.p / 3;
  unsigned band_pts = 5000;
  auto band_check = [&](const Real& lo, const Real& hi) {
    Real worst{0};
    for (unsigned i = 0; i <= band_pts; ++i) {
      Real x = lo + (hi - lo) * static_cast<int>(i) / static_cast<int>(band_pts);
      Real dev = abs(psi(x) - sin(2 * x));
      if (dev > worst) worst = dev;
    }
    return worst;
  };
  Real dev = std::max(band_check(band_lo, g.xb), band_check(g.xc, 2 * g.p / 3));
  if (dev >= eps)
    fail(Errc::EpsilonTooLarge, "blend deviation " + dec(dev, 6) + " exceeds eps = " + dec(eps, 6));

  // Sign pattern: positive left of pi/2, negative right of it, so the only
  // zeros are 0, pi/2, pi.
  Real half = g.p / 2;
  unsigned sign_pts = 10000;
  for (unsigned i = 1; i < sign_pts; ++i) {
    Real x = g.p * static_cast<int>(i) / static_cast<int>(sign_pts);
    Real margin = abs(x - half);
    Real v = psi(x);
    // Near the crossing the affine piece is exact; elsewhere demand a sign.
    if (margin < Real(1) / 100) continue;
    if (x < half && !(v > 0))
      fail(Errc::EpsilonTooLarge, "unexpected zero left of pi/2 near x = " + dec(x, 8));
    if (x > half && !(v < 0))
      fail(Errc::EpsilonTooLarge, "unexpected zero right of pi/2 near x = " + dec(x, 8));
  }
  return psi;
}

namespace {

// Cumulative moments A(x) = int_0^x cos(6y) psi, B(x) = int_0^x sin(6y) psi
// with memoized anchors; exact restarts at piece boundaries.
class TrigMoments {
 public:
  explicit TrigMoments(PiecewiseSmoothFn psi) : psi_(std::move(psi)) {
    Real tol = ten_pow(-std::max<long>(14, static_cast<long>(current_precision()) - 20));
    Real a{0}, b{0};
    anchors_[Real(0)] = {a, b};
    for (const auto& piece : psi_.pieces()) {
      a += integrate_adaptive([&](const Real& y) { return psi_(y) * cos(6 * y); }, piece.lo,
                              piece.hi, tol, 24);
      b += integrate_adaptive([&](const Real& y) { return psi_(y) * sin(6 * y); }, piece.lo,
                              piece.hi, tol, 24);
      anchors_[piece.hi] = {a, b};
    }
  }

  std::pair<Real, Real> at(const Real& x) const {
    std::lock_guard<std::mutex> lock(mtx_);
    auto it = anchors_.upper_bound(x);
    --it;  // greatest anchor <= x (x >= 0 always has the 0 anchor)
    Real x0 = it->first;
    if (x0 == x) return it->second;
    const auto& piece = psi_.piece_at(x);
    if (x0 < piece.lo) x0 = piece.lo;  // never integrate across a seam
    auto base = anchors_.at(x0);
    unsigned panels = static_cast<unsigned>(((x - x0) / Real("0.01")).convert_to<double>()) + 1;
    Real da = integrate_panels([&](const Real& y) { return psi_(y) * cos(6 * y); }, x0, x, panels, 12);
    Real db = integrate_panels([&](const Real& y) { return psi_(y) * sin(6 * y); }, x0, x, panels, 12);
    std::pair<Real, Real> val{base.first + da, base.second + db};
    anchors_[x] = val;
    return val;
  }

  const PiecewiseSmoothFn& psi() const { return psi_; }

 private:
  PiecewiseSmoothFn psi_;
  mutable std::map<Real, std::pair<Real, Real>> anchors_;
  mutable std::mutex mtx_;
};

}  // namespace

Constants solve_constants(const Real& eps, const Bumps& bumps) {
  Geometry g;
  PiecewiseSmoothFn psi0 = build_psi(eps, Real(0), Real(0), bumps);
  TrigMoments tm(psi0);

  Real inv_pi = 1 / g.p;
  Real B_5pi12 = tm.at(5 * g.p / 12).second;
  Real B_7pi12 = tm.at(7 * g.p / 12).second;
  Real B_pi = tm.at(g.p).second;
  Real A_5pi12 = tm.at(5 * g.p / 12).first;

  Real tol = ten_pow(-14);
  Real bump1_sin = integrate_adaptive(
      [&](const Real& y) { return bumps.theta1(y) * sin(6 * y); }, g.x1, g.x2, tol, 24);
  Real bump1_cos = integrate_adaptive(
      [&](const Real& y) { return bumps.theta1(y) * cos(6 * y); }, g.x1, g.x2, tol, 24);
  Real bump2_sin = integrate_adaptive(
      [&](const Real& y) { return bumps.theta2(y) * sin(6 * y); }, g.x3, g.x4, tol, 24);

  Constants c;
  c.left_base = inv_pi + 6 * B_5pi12;
  c.right_base = inv_pi + 6 * (B_pi - B_7pi12);
  if (!(c.left_base < 0))
    fail(Errc::SignViolation, "left window base integral is not negative: " + dec(c.left_base, 8));
  if (!(bump1_sin > 0)) fail(Errc::SignViolation, "theta1 moment against sin(6y) not positive");
  if (!(c.right_base < 0))
    fail(Errc::SignViolation, "right window base integral is not negative: " + dec(c.right_base, 8));
  if (!(bump2_sin < 0)) fail(Errc::SignViolation, "theta2 moment against sin(6y) not negative");

  c.C1 = -c.left_base / (6 * bump1_sin);
  c.C2 = c.right_base / (6 * bump2_sin);
  c.tau = Real(1) / 6 - 6 * (A_5pi12 + c.C1 * bump1_cos);
  return c;
}

PiecewiseSmoothFn build_phi(const PiecewiseSmoothFn& psi, const Real& tau) {
  auto tm = std::make_shared<TrigMoments>(psi);
  Real dpsi0 = psi.jet(Real(0), 1).derivative(1);

  std::vector<PiecewiseSmoothFn::Piece> pieces;
  for (const auto& piece : psi.pieces()) {
    pieces.push_back(
        {piece.lo, piece.hi, PiecewiseSmoothFn::PieceKind::Other,
         [tm, tau, dpsi0, &psi = tm->psi()](const Real& x, unsigned order) {
           auto [A, B] = tm->at(x);
           Jet psij = psi.jet(x, order + 2);
           Real psix = psij.derivative(0);
           Real dpsix = psij.derivative(1);
           Real s6 = sin(6 * x), c6 = cos(6 * x);
           Real icos = c6 * dpsix + 6 * s6 * psix - dpsi0 - 36 * A;
           Real isin = s6 * dpsix - 6 * c6 * psix - 36 * B;
           Real coef_sin = tau - icos / 6;
           Real coef_cos = isin / 6;
           std::vector<Real> deriv(order + 1);
           deriv[0] = coef_sin * s6 + coef_cos * c6;
           if (order >= 1) deriv[1] = 6 * (coef_sin * c6 - coef_cos * s6);
           for (unsigned m = 2; m <= order; ++m)
             deriv[m] = -36 * deriv[m - 2] - psij.derivative(m);
           Jet out(order);
           Real fact{1};
           for (unsigned m = 0; m <= order; ++m) {
             if (m >= 2) fact *= m;
             out.coeffs[m] = deriv[m] / (m >= 2 ? fact : Real(1));
           }
           return out;
         }});
  }
  return PiecewiseSmoothFn(std::move(pieces), 2);
}

PiecewiseSmoothFn build_q(const PiecewiseSmoothFn& psi) {
  using Kind = PiecewiseSmoothFn::PieceKind;
  std::vector<PiecewiseSmoothFn::Piece> pieces;
  for (const auto& piece : psi.pieces()) {
    if (piece.kind == Kind::PureSin) {
      pieces.push_back({piece.lo, piece.hi, Kind::PureSin,
                        [](const Real&, unsigned order) { return Jet::constant(Real(32), order); }});
    } else if (piece.kind == Kind::Affine) {
      pieces.push_back({piece.lo, piece.hi, Kind::Affine,
                        [](const Real&, unsigned order) { return Jet::constant(Real(36), order); }});
    } else {
      // Quotient (psi'' + 36 psi)/psi away from the zeros of psi.
      pieces.push_back({piece.lo, piece.hi, Kind::Quotient,
                        [psi](const Real& x, unsigned order) {
                          Jet p = psi.jet(x, order + 2);
                          Jet p2(order);
                          for (unsigned m = 0; m <= order; ++m)
                            p2.coeffs[m] = p.coeffs[m + 2] * static_cast<int>((m + 2) * (m + 1));
                          Jet ptrunc(order);
                          for (unsigned m = 0; m <= order; ++m) ptrunc.coeffs[m] = p.coeffs[m];
                          return (p2 + Real(36) * ptrunc) / ptrunc;
                        }});
      // The quotient requires psi bounded away from zero on the piece.
      unsigned pts = 400;
      for (unsigned i = 0; i <= pts; ++i) {
        Real x = piece.lo + (piece.hi - piece.lo) * static_cast<int>(i) / static_cast<int>(pts);
        if (abs(psi(x)) < ten_pow(-6))
          fail(Errc::ExtraZero, "psi vanishes inside a quotient piece near x = " + dec(x, 8));
      }
    }
  }
  return PiecewiseSmoothFn(std::move(pieces), 0);
}

Counterexample build_counterexample(const Real& eps0, BumpVariant variant, unsigned precision) {
  PrecisionGuard guard(precision);
  Real eps = eps0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    try {
      Counterexample ce;
      ce.eps = eps;
      ce.bumps = build_bumps(variant);
      ce.constants = solve_constants(eps, ce.bumps);
      ce.psi = build_psi(eps, ce.constants.C1, ce.constants.C2, ce.bumps);
      ce.q = build_q(ce.psi);
      ce.phi = build_phi(ce.psi, ce.constants.tau);
      Geometry g;
      ce.omega = {5 * g.p / 12, 7 * g.p / 12};
      for (const auto& b : ce.psi.interior_breaks()) ce.seams.push_back(b);
      return ce;
    } catch (const Error& e) {
      if (e.code() == Errc::EpsilonTooLarge || e.code() == Errc::SignViolation ||
          e.code() == Errc::ExtraZero) {
        eps /= 2;
        continue;
      }
      throw;
    }
  }
  fail(Errc::EpsilonTooLarge, "no admissible eps found by halving from " + dec(eps0, 6));
}

CounterexampleReport verify_counterexample(const PiecewiseSmoothFn& psi,
                                           const PiecewiseSmoothFn& phi,
                                           const PiecewiseSmoothFn& q,
                                           const std::pair<Real, Real>& omega,
                                           const std::vector<Real>& seams,
                                           unsigned grid_points) {
  CounterexampleReport rep;
  Real p = pi();
  Real h = p / static_cast<int>(grid_points);
  Real lambda{36};

  std::vector<Real> psi_v(grid_points + 1), phi_v(grid_points + 1), q_v(grid_points + 1);
  for (unsigned i = 0; i <= grid_points; ++i) {
    Real x = h * static_cast<int>(i);
    psi_v[i] = psi(x);
    phi_v[i] = phi(x);
    q_v[i] = q(x);
  }

  auto near_seam = [&](unsigned i) {
    Real x = h * static_cast<int>(i);
    for (const auto& s : seams)
      if (abs(x - s) < 3 * h) return true;
    return false;
  };
  auto d2 = [&](const std::vector<Real>& f, unsigned i) {
    return (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) / (12 * h * h);
  };

  for (unsigned i = 2; i + 2 <= grid_points; ++i) {
    if (near_seam(i)) continue;
    Real psixx = d2(psi_v, i);
    Real r1 = abs(-psixx + q_v[i] * psi_v[i] - lambda * psi_v[i]);
    Real r2 = abs(-d2(phi_v, i) - psixx - lambda * phi_v[i]);
    if (r1 > rep.ode1_residual) rep.ode1_residual = r1;
    if (r2 > rep.ode2_residual) rep.ode2_residual = r2;
  }

  rep.boundary_defect = std::max(std::max(abs(psi_v.front()), abs(psi_v.back())),
                                 std::max(abs(phi_v.front()), abs(phi_v.back())));
  Real l2psi{0}, l2phi{0};
  for (unsigned i = 0; i <= grid_points; ++i) {
    Real x = h * static_cast<int>(i);
    l2psi += psi_v[i] * psi_v[i];
    l2phi += phi_v[i] * phi_v[i];
    if (x >= omega.first && x <= omega.second)
      rep.phi_max_on_omega = std::max(rep.phi_max_on_omega, abs(phi_v[i]));
  }
  rep.psi_norm = sqrt(l2psi * h);
  rep.phi_norm = sqrt(l2phi * h);

  Real ode_tol = ten_pow(-6);
  Real small_tol = ten_pow(-10);
  if (rep.ode1_residual > ode_tol) rep.failures.push_back("first eigen-equation residual");
  if (rep.ode2_residual > ode_tol) rep.failures.push_back("second eigen-equation residual");
  if (rep.boundary_defect > small_tol) rep.failures.push_back("boundary values");
  if (rep.phi_max_on_omega > small_tol) rep.failures.push_back("phi not null on omega");
  if (rep.psi_norm < Real(1) / 100 || rep.phi_norm < Real(1) / 100)
    rep.failures.push_back("trivial witness");

  rep.fattorini = fattorini_witness_distributed(
      [&q](const Real& x) { return q(x); }, omega, [&psi](const Real& x) { return psi(x); },
      [&phi](const Real& x) { return phi(x); }, lambda, seams, grid_points);
  if (!rep.fattorini.pass) rep.failures.push_back("witness handoff: " + rep.fattorini.failure);

  rep.pass = rep.failures.empty();
  return rep;
}

}  // namespace pwb
