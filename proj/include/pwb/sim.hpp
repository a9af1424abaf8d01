#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "pwb/criteria.hpp"
#include "pwb/expsum.hpp"
#include "pwb/model.hpp"
#include "pwb/synth.hpp"

namespace pwb {

struct ModalTrajectory {
  std::vector<Real> t_grid;
  std::map<int, std::vector<CVec>> modes;  // k -> coefficient path along t_grid
  Real terminal_Hm1{0};
  Real terminal_L2{0};

  const CVec& at(int k, size_t ti) const;
  CVec terminal(int k) const;
};

// k^2 D + A for one mode.
CMat mode_generator(const SystemParams& params, int k);

// e^{-(k^2 D + A) t}: eigenbasis route for alpha != 0, nilpotent expansion for
// alpha = 0, with a scaling-and-squaring fallback.
CMat mode_exponential(const SystemParams& params, int k, const Real& t);

// Generic scaling-and-squaring matrix exponential of -G t (independent route
// used as an oracle and as the fallback).
CMat expm_scaled(const CMat& generator, const Real& t);

// Boundary-controlled evolution: per mode k,
//   z_k' = -(k^2 D + A) z_k + k sqrt(2/pi) D B v(t),
// solved by variation of constants in closed form for analytic controls and
// by panel quadrature for sampled ones.
ModalTrajectory simulate_boundary(const SystemParams& params, const InitialState& y0,
                                  const ControlSignal* v, int K_max,
                                  const std::vector<Real>& t_grid);

// Distributed control u(t,x) = sum_m g_m(t) w_m(x) acting through 1_omega.
struct DistributedControl {
  std::map<int, ExpSum> modal;  // m -> g_m as an ExpSum in t
};

// Either the constant-coupling n-component system or the 2x2 variant with a
// space-dependent potential in the first equation and Jordan-type coupling.
struct DistributedSystem {
  std::optional<SystemParams> constant;

  // 2x2 potential variant (used when `constant` is empty).
  std::function<Real(const Real&)> q;
  std::vector<Real> q_breaks;  // quadrature panels split here
  unsigned precision = 30;

  std::pair<Real, Real> omega{Real(0), Real(0)};

  static DistributedSystem constant_coupling(SystemParams params, std::pair<Real, Real> omega);
  static DistributedSystem potential(std::function<Real(const Real&)> q, std::vector<Real> breaks,
                                     std::pair<Real, Real> omega, unsigned precision);
};

struct StiffStepStats {
  size_t steps = 0;
  size_t rejected = 0;
};

ModalTrajectory simulate_distributed(const DistributedSystem& sys, const InitialState& y0,
                                     const DistributedControl& u, int K_max,
                                     const std::vector<Real>& t_grid,
                                     const Real& local_tol = Real("1e-10"),
                                     StiffStepStats* stats = nullptr);

// Potential Gram entries Q[k,m] = int q w_k w_m via cosine moments.
CMat potential_coupling_matrix(const DistributedSystem& sys, int K_max);

// Indicator overlap Omega[k,m] = int_omega w_k w_m, closed form.
CMat indicator_overlap_matrix(const std::pair<Real, Real>& omega, int K_max);

// Adjoint evolution with data phi^T = sum a_i Phi_{j_i, k_i}: closed-form
// coefficient paths in the variable u = T - t.
struct AdjointTermSpec {
  int j = 0;
  int k = 1;
  Complex amplitude;
};

struct AdjointSolution {
  SystemParams params;
  Real T{1};
  std::map<int, std::vector<ExpSum>> modal;  // k -> n component sums in u = T - t

  CVec coeff_at(int k, const Real& t) const;
  CVec terminal_coeff(int k) const;  // at t = T
  CVec initial_coeff(int k) const;   // at t = 0
  // B^* D^* dx phi(t, 0) as a scalar ExpSum in u = T - t.
  ExpSum boundary_observation() const;
};

AdjointSolution adjoint_solve(const SystemParams& params,
                              const std::vector<AdjointTermSpec>& phiT, const Real& T);

// | <y(T), phi^T> - <y0, phi(0)> - int_0^T (v, B* D* phi_x(t,0)) dt |.
Real duality_residual(const SystemParams& params, const InitialState& y0,
                      const ControlSignal& v, const std::vector<AdjointTermSpec>& phiT,
                      const Real& T);

struct ObservabilityRatio {
  bool infinite = false;  // observation vanishes identically
  Real value{0};
};

// Constant-free quotient of the one-mode observability inequality at x0 for
// the eigenfunction of branch 0 and mode k.
ObservabilityRatio observability_ratio(const SystemParams& params, const X0Spec& x0, int k,
                                       const Real& T);

}  // namespace pwb
