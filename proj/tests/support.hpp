#pragma once

// Shared test-side oracles, independent of the library paths they check.

#include "pwb/linalg.hpp"
#include "pwb/synth.hpp"

namespace pwb::testsupport {

// Euclidean projection onto the resonant compatibility subspace, built from
// the three condition families as explicit linear constraints.
inline InitialState project_onto_X(const InitialState& y0, long m, const SystemParams& params) {
  PrecisionGuard guard(params.precision);
  int K = y0.max_mode() + static_cast<int>(m);
  size_t dim = static_cast<size_t>(2 * K);
  auto vt = [&](int k, int j) {
    CVec v(2);
    v[0] = Complex{Real(1)};
    Real s = 1 / sqrt(params.alpha);
    v[1] = Complex{(j == 0 ? s : -s) * k};
    return v;
  };
  std::vector<CVec> rows;
  long m0 = 1 + (m - 1) / 2;
  auto row_pair = [&](int k, int j, const Real& sign, CVec& row) {
    CVec v = vt(k, j);
    row[static_cast<size_t>(2 * (k - 1))] += Complex{sign} * v[0];
    row[static_cast<size_t>(2 * (k - 1) + 1)] += Complex{sign} * v[1];
  };
  for (long k = 1; k <= m0 - 1; ++k) {
    CVec row(dim);
    row_pair(static_cast<int>(k), 1, Real(1), row);
    row_pair(static_cast<int>(m - k), 1, Real(-1), row);
    rows.push_back(row);
  }
  for (int k = 1; k <= K; ++k) {
    CVec row(dim);
    row_pair(k, 0, Real(1), row);
    if (k + m <= K) row_pair(k + static_cast<int>(m), 1, Real(1), row);
    rows.push_back(row);
  }
  {
    CVec row(dim);
    row_pair(static_cast<int>(m), 1, Real(1), row);
    rows.push_back(row);
  }

  size_t nc = rows.size();
  CMat aat(nc, nc);
  for (size_t i = 0; i < nc; ++i)
    for (size_t j = 0; j < nc; ++j) {
      Complex s{};
      for (size_t c = 0; c < dim; ++c) s += rows[i][c] * conj(rows[j][c]);
      aat(i, j) = s;
    }
  CVec x(dim);
  for (const auto& [k, v] : y0.coeffs) {
    if (k > K) continue;
    x[static_cast<size_t>(2 * (k - 1))] = v[0];
    x[static_cast<size_t>(2 * (k - 1) + 1)] = v[1];
  }
  CVec ax(nc);
  for (size_t i = 0; i < nc; ++i) {
    Complex s{};
    for (size_t c = 0; c < dim; ++c) s += rows[i][c] * x[c];
    ax[i] = s;
  }
  CVec mult = lu_solve(lu_factor(aat), ax);
  for (size_t i = 0; i < nc; ++i)
    for (size_t c = 0; c < dim; ++c) x[c] -= conj(rows[i][c]) * mult[i];

  InitialState out;
  out.n = 2;
  out.space = y0.space;
  for (int k = 1; k <= K; ++k) {
    CVec v(2);
    v[0] = x[static_cast<size_t>(2 * (k - 1))];
    v[1] = x[static_cast<size_t>(2 * (k - 1) + 1)];
    if (abs(v[0]) + abs(v[1]) > 0) out.coeffs[k] = v;
  }
  return out;
}

}  // namespace pwb::testsupport
