#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pwb/irrational.hpp"
#include "pwb/model.hpp"

namespace pwb {

enum class Setting {
  BoundaryNull,
  BoundaryApprox,
  DistributedConstant,
  PointwiseApprox,
  PointwiseNull,
};

enum class Outcome { Controllable, NotControllable, Resonant, Undetermined };

const char* setting_name(Setting s);
const char* outcome_name(Outcome o);

struct Witness {
  std::string kind;    // "collision", "vanishing_bdv", "rational_x0", ...
  std::string detail;  // human-readable location/value
  std::optional<ModeIndex> mode;
  std::optional<std::pair<ModeIndex, ModeIndex>> collision;
};

struct Verdict {
  Setting setting = Setting::BoundaryNull;
  Outcome outcome = Outcome::Undetermined;
  std::optional<Witness> witness;  // always present for NotControllable
  long resonant_m = 0;             // Resonant outcome only
  std::string reason;
  int checked_range = 0;
  bool range_certified = false;  // positive verdicts limited to k <= checked_range
  std::vector<std::pair<std::string, std::string>> certificates;
};

Verdict check_boundary(const SystemParams& params, int k_max);

// Modes whose boundary observation coefficient B^* D^* V_{j,k} vanishes,
// from the closed-form criterion; cross-checked numerically.
std::vector<ModeIndex> check_BDV(const SystemParams& params, const Spectrum& spectrum);

struct GapCertificate {
  Real rho{0};
  int k_start = 1;
  std::vector<std::pair<ModeIndex, ModeIndex>> violations;  // coincidences on the range
  // For even n with alpha > 0 the two real branches may concentrate; the
  // closest such pair is reported separately.
  bool real_branch_flagged = false;
  std::optional<std::pair<ModeIndex, ModeIndex>> tightest_real_pair;
  Real tightest_real_ratio{0};
};

GapCertificate check_gap(const SystemParams& params, int k_max);

// Control location x0 = theta * pi; either exactly rational or certified
// irrational by construction.
struct X0Spec {
  static X0Spec rational(long p, long q);
  static X0Spec irrational(Irrational theta);

  bool is_rational = false;
  long p = 0, q = 1;
  std::optional<Irrational> theta;

  std::string describe() const;
};

Verdict check_pointwise(const SystemParams& params, const X0Spec& x0, int k_max);

struct TThetaEstimate {
  Real value{0};
  long argmax_k = 0;
  std::vector<std::pair<long, Real>> trace;  // (k, new running max)
  unsigned digits_used = 0;
};

TThetaEstimate estimate_T_theta(const Irrational& theta, const Real& d, long k_min, long k_max);

// Range-certified pointwise-null verdict at a given horizon T.
Verdict check_pointwise_null(const SystemParams& params, const Irrational& theta, const Real& T,
                             long k_max);

// Distributed setting with the constant coupling: Kalman certificates per mode.
Verdict check_distributed(const SystemParams& params, int k_max);

using ScalarFn = std::function<Real(const Real&)>;

struct WitnessReport {
  bool pass = false;
  Real ode1_residual{0};   // first eigen-equation
  Real ode2_residual{0};   // second eigen-equation
  Real phi_max_on_omega{0};
  Real psi_norm{0};
  Real phi_norm{0};
  std::string failure;     // empty when pass
  Real failure_location{0};
};

// Verifies a candidate non-observability witness (psi, phi, lambda) for the
// variable-coefficient system: both second-order eigen-equations by
// fourth-order finite differences on a uniform grid, and phi == 0 on omega.
// Stencils straddling a listed seam are skipped.
WitnessReport fattorini_witness_distributed(const ScalarFn& q, std::pair<Real, Real> omega,
                                            const ScalarFn& psi, const ScalarFn& phi,
                                            const Real& lambda,
                                            const std::vector<Real>& seams = {},
                                            unsigned grid_points = 10000,
                                            const Real& ode_tol = Real("1e-6"),
                                            const Real& phi_tol = Real("1e-10"));

}  // namespace pwb
