#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pwb/linalg.hpp"
#include "pwb/precision.hpp"

namespace pwb {

// Coupled 1-D parabolic system on (0, pi): n equations, Jordan-type diffusion
// (d on the diagonal, 1 on the superdiagonal), rank-one coupling alpha in the
// lower-left corner, scalar input on the last component.
struct SystemParams {
  int n = 2;
  Real d{1};
  Real alpha{0};
  unsigned precision = 50;

  // Exact values when the inputs were given as decimal/rational literals;
  // resonance tests are arithmetic, so they use these when present.
  std::optional<Rat> d_exact;
  std::optional<Rat> alpha_exact;

  void validate() const;

  static SystemParams make(int n, const std::string& d_str, const std::string& alpha_str,
                           unsigned precision = 50);
};

struct Matrices {
  CMat D;   // n x n, upper bidiagonal
  CMat A;   // n x n, alpha at (n-1, 0)
  CVec B;   // e_n
  Real beta;  // smallest eigenvalue of (D + D^T)/2, must be positive
};

Matrices build_matrices(const SystemParams& params);

// One spectral datum of the adjoint operator at mode k. For alpha != 0 the
// branch index j enumerates the n distinct roots; for alpha = 0 there is a
// single pair per k (j = 0) carrying the full Jordan chain, scaled so that
// (k^2 D^T + A^T - lambda) chain[i] = chain[i-1].
struct EigenPair {
  int j = 0;
  int k = 1;
  Complex lambda;
  CVec V;                    // unit eigenvector (first nonzero entry positive real)
  std::vector<CVec> chain;   // alpha = 0 only; chain[0] == V
};

using ModeIndex = std::pair<int, int>;  // (j, k)

struct Spectrum {
  SystemParams params;
  int k_max = 0;
  std::vector<EigenPair> pairs;                          // ascending k, then j
  std::vector<std::pair<ModeIndex, ModeIndex>> collisions;  // both orientations listed

  const EigenPair& at(int j, int k) const;
  bool collides(int j, int k, int j2, int k2) const;
};

Spectrum compute_spectrum(const SystemParams& params, int k_max);

// Closed-form eigenvalue lambda_{j,k} without building a full spectrum.
Complex eigenvalue(const SystemParams& params, int j, int k);

// Unnormalized eigenvector coordinates (c^l)_{l=1..n} = x^{l-1} with
// x = (lambda - d k^2)/k^2 inverted, i.e. the adjoint-side coordinates.
CVec eigenvector_coords(const SystemParams& params, int j, int k);

Real eigen_residual(const SystemParams& params, const EigenPair& pair);

struct KalmanResult {
  CMat matrix;       // [B | MB | ... | M^{n-1}B], M = k^2 D + A
  int rank = 0;
  Real abs_det;
  Real closed_form;  // prod_{l=1}^{n-1} (k^2)^l
};

KalmanResult kalman_matrix(const SystemParams& params, int k);

struct ModalBasis {
  CMat V;     // columns are the unnormalized eigenvector coordinate vectors
  CMat Vinv;
  Real identity_defect;  // max |V Vinv - I|
};

ModalBasis modal_change_of_basis(const SystemParams& params, int k);

// B^* D^* V_{j,k} for a spectral pair; vanishing marks an invisible mode.
Complex bdv_value(const SystemParams& params, const EigenPair& pair);

}  // namespace pwb
