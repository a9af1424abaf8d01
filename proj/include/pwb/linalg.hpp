#pragma once

#include <vector>

#include "pwb/complexr.hpp"
#include "pwb/errors.hpp"

namespace pwb {

using CVec = std::vector<Complex>;

class CMat {
 public:
  CMat() = default;
  CMat(size_t rows, size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CMat identity(size_t n) {
    CMat m(n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = Complex{Real(1)};
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  Complex& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

  CVec col(size_t j) const {
    CVec v(rows_);
    for (size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }
  void set_col(size_t j, const CVec& v) {
    for (size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<Complex> data_;
};

inline CMat operator*(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) fail(Errc::DimensionMismatch, "matrix product");
  CMat c(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t k = 0; k < a.cols(); ++k) {
      const Complex& aik = a(i, k);
      if (aik.re == 0 && aik.im == 0) continue;
      for (size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline CVec operator*(const CMat& a, const CVec& x) {
  if (a.cols() != x.size()) fail(Errc::DimensionMismatch, "matrix-vector product");
  CVec y(a.rows());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

inline CMat operator+(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(Errc::DimensionMismatch, "matrix sum");
  CMat c(a.rows(), a.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

inline CMat operator-(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(Errc::DimensionMismatch, "matrix diff");
  CMat c(a.rows(), a.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

inline CMat operator*(const Complex& s, const CMat& a) {
  CMat c(a.rows(), a.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
  return c;
}

inline CMat conj_transpose(const CMat& a) {
  CMat c(a.cols(), a.rows());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) c(j, i) = conj(a(i, j));
  return c;
}

inline CVec operator+(const CVec& a, const CVec& b) {
  CVec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}
inline CVec operator-(const CVec& a, const CVec& b) {
  CVec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}
inline CVec operator*(const Complex& s, const CVec& a) {
  CVec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = s * a[i];
  return c;
}

inline Complex dot_herm(const CVec& a, const CVec& b) {
  // Hermitian in the second slot.
  Complex s;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * conj(b[i]);
  return s;
}

inline Real vec_norm(const CVec& a) {
  Real s{0};
  for (const auto& z : a) s += norm2(z);
  return sqrt(s);
}

inline Real vec_inf_norm(const CVec& a) {
  Real m{0};
  for (const auto& z : a) {
    Real v = abs(z);
    if (v > m) m = v;
  }
  return m;
}

inline Real inf_norm(const CMat& a) {
  Real m{0};
  for (size_t i = 0; i < a.rows(); ++i) {
    Real s{0};
    for (size_t j = 0; j < a.cols(); ++j) s += abs(a(i, j));
    if (s > m) m = s;
  }
  return m;
}

inline Real max_abs(const CMat& a) {
  Real m{0};
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) {
      Real v = abs(a(i, j));
      if (v > m) m = v;
    }
  return m;
}

// LU with partial pivoting.
struct LuFactors {
  CMat lu;
  std::vector<size_t> perm;
  int sign = 1;
  bool singular = false;
};

inline LuFactors lu_factor(CMat a) {
  size_t n = a.rows();
  if (a.cols() != n) fail(Errc::DimensionMismatch, "LU needs a square matrix");
  LuFactors f;
  f.perm.resize(n);
  for (size_t i = 0; i < n; ++i) f.perm[i] = i;
  for (size_t c = 0; c < n; ++c) {
    size_t p = c;
    Real best = abs(a(c, c));
    for (size_t r = c + 1; r < n; ++r) {
      Real v = abs(a(r, c));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (best == 0) {
      f.singular = true;
      f.lu = std::move(a);
      return f;
    }
    if (p != c) {
      for (size_t j = 0; j < n; ++j) std::swap(a(c, j), a(p, j));
      std::swap(f.perm[c], f.perm[p]);
      f.sign = -f.sign;
    }
    for (size_t r = c + 1; r < n; ++r) {
      Complex m = a(r, c) / a(c, c);
      a(r, c) = m;
      for (size_t j = c + 1; j < n; ++j) a(r, j) -= m * a(c, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

inline CVec lu_solve(const LuFactors& f, const CVec& b) {
  size_t n = f.lu.rows();
  if (f.singular) fail(Errc::IllConditioned, "singular matrix in solve");
  CVec y(n);
  for (size_t i = 0; i < n; ++i) {
    Complex s = b[f.perm[i]];
    for (size_t j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
    y[i] = s;
  }
  CVec x(n);
  for (size_t ii = n; ii-- > 0;) {
    Complex s = y[ii];
    for (size_t j = ii + 1; j < n; ++j) s -= f.lu(ii, j) * x[j];
    x[ii] = s / f.lu(ii, ii);
  }
  return x;
}

inline Complex lu_det(const LuFactors& f) {
  if (f.singular) return Complex{};
  Complex d{Real(f.sign)};
  for (size_t i = 0; i < f.lu.rows(); ++i) d *= f.lu(i, i);
  return d;
}

inline CMat inverse(const CMat& a) {
  LuFactors f = lu_factor(a);
  size_t n = a.rows();
  CMat inv(n, n);
  CVec e(n);
  for (size_t j = 0; j < n; ++j) {
    for (size_t i = 0; i < n; ++i) e[i] = Complex{};
    e[j] = Complex{Real(1)};
    inv.set_col(j, lu_solve(f, e));
  }
  return inv;
}

// Numerical rank against a relative pivot threshold (row echelon on a copy).
inline int matrix_rank(CMat a, const Real& rel_tol) {
  size_t n = a.rows(), m = a.cols();
  Real scale = max_abs(a);
  if (scale == 0) return 0;
  Real tol = scale * rel_tol;
  int rank = 0;
  size_t row = 0;
  for (size_t c = 0; c < m && row < n; ++c) {
    size_t p = row;
    Real best = abs(a(row, c));
    for (size_t r = row + 1; r < n; ++r) {
      Real v = abs(a(r, c));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (best <= tol) continue;
    if (p != row)
      for (size_t j = 0; j < m; ++j) std::swap(a(row, j), a(p, j));
    for (size_t r = row + 1; r < n; ++r) {
      Complex f = a(r, c) / a(row, c);
      for (size_t j = c; j < m; ++j) a(r, j) -= f * a(row, j);
    }
    ++rank;
    ++row;
  }
  return rank;
}

// Cholesky of a Hermitian positive-definite matrix: A = L L^H, L lower with
// real positive diagonal. Returns false when a pivot is not positive.
inline bool cholesky(const CMat& a, CMat& lower) {
  size_t n = a.rows();
  lower = CMat(n, n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      Complex s = a(i, j);
      for (size_t k = 0; k < j; ++k) s -= lower(i, k) * conj(lower(j, k));
      if (i == j) {
        if (s.re <= 0) return false;
        lower(i, i) = Complex{sqrt(s.re)};
      } else {
        lower(i, j) = s / lower(j, j).re;
      }
    }
  }
  return true;
}

inline CVec cholesky_solve(const CMat& lower, const CVec& b) {
  size_t n = lower.rows();
  CVec y(n);
  for (size_t i = 0; i < n; ++i) {
    Complex s = b[i];
    for (size_t j = 0; j < i; ++j) s -= lower(i, j) * y[j];
    y[i] = s / lower(i, i).re;
  }
  CVec x(n);
  for (size_t ii = n; ii-- > 0;) {
    Complex s = y[ii];
    for (size_t j = ii + 1; j < n; ++j) s -= conj(lower(j, ii)) * x[j];
    x[ii] = s / lower(ii, ii).re;
  }
  return x;
}

}  // namespace pwb
