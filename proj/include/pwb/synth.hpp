#pragma once

#include <map>
#include <optional>
#include <vector>

#include "pwb/irrational.hpp"
#include "pwb/model.hpp"
#include "pwb/moments.hpp"

namespace pwb {

// Finitely supported modal data: coeffs[k] is the n-vector of sine
// coefficients of mode k.
struct InitialState {
  enum class Space { Hminus1, L2 };

  int n = 2;
  Space space = Space::Hminus1;
  std::map<int, CVec> coeffs;

  Real norm() const;
  int max_mode() const;
  bool is_real() const;
  void validate() const;
};

// Analytic control v(t) = e^{shift t} * sum c_i (T-t)^{d_i} e^{-lambda_i (T-t)},
// with an optional sampled grid mirror.
struct ControlTerm {
  Complex lambda;
  unsigned degree = 0;
  Complex coeff;
};

struct ControlSignal {
  Real T{1};
  Real shift{0};
  std::vector<ControlTerm> terms;
  std::optional<std::vector<std::pair<Real, Complex>>> samples;
  Real norm_l2{0};

  Complex eval(const Real& t) const;
  // v(T - t) as an exponential-polynomial sum in t (closed-form moments).
  ExpSum reversed() const;
  void resample(size_t count);  // uniform grid on [0, T]
};

// Smallest nonnegative M so every shifted eigenvalue has real part >= 1.
Real spectral_shift_amount(const std::vector<Complex>& lambdas);

struct ShiftedSpectrum {
  Real M_shift{0};
  Spectrum spectrum;  // eigenvalues shifted by M_shift
};

ShiftedSpectrum spectral_shift(const SystemParams& params, const Spectrum& spectrum);

using TargetMap = std::map<ModeIndex, Complex>;  // (j, k) -> target

TargetMap moment_targets_boundary(const SystemParams& params, const Spectrum& spectrum,
                                  const InitialState& y0, int K);

TargetMap moment_targets_alpha0(const SystemParams& params, const InitialState& y0, int K,
                                const Real& T);

TargetMap moment_targets_pointwise(const SystemParams& params, const Spectrum& spectrum,
                                   const InitialState& y0, const Irrational& theta, int K);

// Membership in the compatibility subspace for the n = 2 resonant case
// sqrt(alpha)/d = m: three families of linear conditions on the coefficients.
struct XMembership {
  bool member = false;
  Real worst_defect{0};
  int violated_condition = 0;  // 1, 2 or 3; 0 when member
  int violated_k = 0;
  std::string detail;
};

XMembership subspace_X_check(const InitialState& y0, long m, const SystemParams& params);

// A fully indexed truncated moment problem: equation list, exponent family of
// the shifted problem, and right-hand-side targets.
struct MomentProblem {
  SystemParams params;
  Real T{1};
  Real M_shift{0};
  std::vector<ModeIndex> equations;  // (j, k), aligned with the flattened family order
  ExponentFamily family;             // shifted conjugate exponents
  CVec targets;                      // M_{j,k}, aligned with `equations`
};

MomentProblem build_boundary_problem(const SystemParams& params, const Spectrum& spectrum,
                                     const InitialState& y0, int K, const Real& T);

MomentProblem build_alpha0_problem(const SystemParams& params, const InitialState& y0, int K,
                                   const Real& T);

MomentProblem build_pointwise_problem(const SystemParams& params, const Spectrum& spectrum,
                                      const InitialState& y0, const Irrational& theta, int K,
                                      const Real& T);

struct ResonantSynthesis {
  XMembership membership;
  std::optional<MomentProblem> problem;  // present only when compatible
};

ResonantSynthesis build_resonant_problem(const SystemParams& params, const InitialState& y0,
                                         int K, const Real& T);

ControlSignal assemble_control(const MomentProblem& problem, const BiorthogonalFamily& bio);

// Convenience: biorthogonal family + assembly.
ControlSignal solve_problem(const MomentProblem& problem);

struct MomentResiduals {
  std::vector<ModeIndex> equations;
  std::vector<Real> residuals;
  Real max_residual{0};
};

// Residuals of int_0^T v(T-t) t^j e^{-conj(lambda) t} dt = e^{-conj(lambda) T} M
// against closed-form integrals of the assembled control.
MomentResiduals verify_moments(const ControlSignal& control, const MomentProblem& problem);

// Residuals of the original coupled equations in the single-chain case,
// before the triangular reduction.
MomentResiduals verify_alpha0_unreduced(const ControlSignal& control, const SystemParams& params,
                                        const InitialState& y0, int K, const Real& T);

}  // namespace pwb
