#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pwb/criteria.hpp"
#include "pwb/jet.hpp"

namespace pwb {

// A function on [0, pi] assembled from smooth pieces, each able to produce a
// truncated Taylor jet at any interior point. Seam regularity is certified
// numerically up to `continuity_order`.
class PiecewiseSmoothFn {
 public:
  enum class PieceKind { PureSin, Affine, Bump, Blend, Quotient, Other };

  struct Piece {
    Real lo, hi;
    PieceKind kind = PieceKind::Other;
    std::function<Jet(const Real&, unsigned)> fn;  // jet of requested order at x
  };

  PiecewiseSmoothFn() = default;
  PiecewiseSmoothFn(std::vector<Piece> pieces, int continuity_order);

  Real operator()(const Real& x) const { return eval(x, 0); }
  Real eval(const Real& x, unsigned order) const;
  Jet jet(const Real& x, unsigned order) const;

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::vector<Real> interior_breaks() const;
  int continuity_order() const { return continuity_order_; }

  // max one-sided derivative jump at the interior breaks, per order.
  std::vector<Real> seam_jumps(unsigned up_to_order) const;

  const Piece& piece_at(const Real& x) const;

 private:
  std::vector<Piece> pieces_;
  int continuity_order_ = 0;
};

struct Bumps {
  PiecewiseSmoothFn theta1;
  PiecewiseSmoothFn theta2;
  // Window on which theta1 equals e^x exactly (exp-plateau variant only).
  std::optional<std::pair<Real, Real>> exp_window;
};

enum class BumpVariant {
  SmoothPlateau,  // smoothstep-edged plateau, peak value 1 (default)
  FlatProfile,    // raw exp(-1/(1-s^2)) profile; huge edge derivatives
  ExpPlateau      // theta1 = e^x on an inner window, smoothly cut off
};

Bumps build_bumps(BumpVariant variant = BumpVariant::SmoothPlateau);

// The perturbed eigenfunction: sine branch with two disjoint bump corrections,
// an affine middle window, and smoothstep blends on half of each transition
// band. C1, C2 scale the bumps.
PiecewiseSmoothFn build_psi(const Real& eps, const Real& C1, const Real& C2, const Bumps& bumps);

struct Constants {
  Real C1, C2, tau;
  Real left_base;   // 1/pi + 6 int_0^{5pi/12} sin(6y) psi0
  Real right_base;  // 1/pi + 6 int_{7pi/12}^pi sin(6y) psi0
};

Constants solve_constants(const Real& eps, const Bumps& bumps);

PiecewiseSmoothFn build_phi(const PiecewiseSmoothFn& psi, const Real& tau);

PiecewiseSmoothFn build_q(const PiecewiseSmoothFn& psi);

struct Counterexample {
  Real eps;
  Constants constants;
  Bumps bumps;
  PiecewiseSmoothFn psi, phi, q;
  std::vector<Real> seams;  // union of interior breaks
  std::pair<Real, Real> omega;
};

Counterexample build_counterexample(const Real& eps0 = Real("0.02"),
                                    BumpVariant variant = BumpVariant::SmoothPlateau,
                                    unsigned precision = 50);

struct CounterexampleReport {
  bool pass = false;
  Real ode1_residual{0};
  Real ode2_residual{0};
  Real boundary_defect{0};
  Real phi_max_on_omega{0};
  Real psi_norm{0}, phi_norm{0};
  std::vector<std::string> failures;
  WitnessReport fattorini;
};

CounterexampleReport verify_counterexample(const PiecewiseSmoothFn& psi,
                                           const PiecewiseSmoothFn& phi,
                                           const PiecewiseSmoothFn& q,
                                           const std::pair<Real, Real>& omega,
                                           const std::vector<Real>& seams,
                                           unsigned grid_points = 10000);

inline CounterexampleReport verify_counterexample(const Counterexample& ce,
                                                  unsigned grid_points = 10000) {
  return verify_counterexample(ce.psi, ce.phi, ce.q, ce.omega, ce.seams, grid_points);
}

}  // namespace pwb
