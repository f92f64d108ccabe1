// Copyright 2026 The NoiseForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Dense symmetric linear algebra for small matrices (dim <= ~50): cyclic
// Jacobi eigendecomposition, PSD square root, Moore-Penrose pseudo-inverse,
// Cholesky. Everything is a pure function of immutable inputs.

#ifndef NOISEFORGE_MATRIX_HPP
#define NOISEFORGE_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "noiseforge/errors.hpp"

namespace noiseforge {

using Vec = std::vector<double>;

/** Dense real matrix, row-major. */
class RectMatrix {
 public:
  RectMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), entries_(static_cast<size_t>(rows) * cols, 0.0) {
    if (rows < 1 || cols < 1) throw DimensionError("RectMatrix: rows and cols must be >= 1");
  }

  RectMatrix(int rows, int cols, Vec entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows < 1 || cols < 1) throw DimensionError("RectMatrix: rows and cols must be >= 1");
    if (entries_.size() != static_cast<size_t>(rows) * cols)
      throw DimensionError("RectMatrix: entry count does not match rows*cols");
  }

  static RectMatrix identity(int n) {
    RectMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return entries_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return entries_[static_cast<size_t>(i) * cols_ + j]; }

  const Vec& entries() const { return entries_; }

 private:
  int rows_, cols_;
  Vec entries_;
};

/**
 * Dense real symmetric matrix. The constructor symmetrizes (A + A^T)/2;
 * callers assemble entries from floating arithmetic and tiny asymmetries
 * must not be fatal.
 */
class SymMatrix {
 public:
  explicit SymMatrix(int dim)
      : dim_(dim), entries_(static_cast<size_t>(dim) * dim, 0.0) {
    if (dim < 1) throw DimensionError("SymMatrix: dim must be >= 1");
  }

  SymMatrix(int dim, Vec entries) : dim_(dim), entries_(std::move(entries)) {
    if (dim < 1) throw DimensionError("SymMatrix: dim must be >= 1");
    if (entries_.size() != static_cast<size_t>(dim) * dim)
      throw DimensionError("SymMatrix: entry count does not match dim*dim");
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j) {
        double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
        entries_[static_cast<size_t>(i) * dim_ + j] = v;
        entries_[static_cast<size_t>(j) * dim_ + i] = v;
      }
  }

  static SymMatrix identity(int n) {
    SymMatrix I(n);
    for (int i = 0; i < n; ++i) I.set(i, i, 1.0);
    return I;
  }

  static SymMatrix diagonal(const Vec& d) {
    SymMatrix D(static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) D.set(static_cast<int>(i), static_cast<int>(i), d[i]);
    return D;
  }

  int dim() const { return dim_; }

  double operator()(int i, int j) const { return entries_[static_cast<size_t>(i) * dim_ + j]; }

  /** Sets both (i,j) and (j,i); the only mutation path, keeps symmetry exact. */
  void set(int i, int j, double v) {
    entries_[static_cast<size_t>(i) * dim_ + j] = v;
    entries_[static_cast<size_t>(j) * dim_ + i] = v;
  }

  const Vec& entries() const { return entries_; }

  RectMatrix as_rect() const {
    RectMatrix R(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) R(i, j) = (*this)(i, j);
    return R;
  }

 private:
  int dim_;
  Vec entries_;
};

inline RectMatrix transpose(const RectMatrix& A) {
  RectMatrix T(A.cols(), A.rows());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
  return T;
}

inline RectMatrix matmul(const RectMatrix& A, const RectMatrix& B) {
  if (A.cols() != B.rows()) throw DimensionError("matmul: inner dimensions differ");
  RectMatrix C(A.rows(), B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = 0; k < A.cols(); ++k) {
      double a = A(i, k);
      if (a == 0.0) continue;
      for (int j = 0; j < B.cols(); ++j) C(i, j) += a * B(k, j);
    }
  return C;
}

inline Vec matvec(const RectMatrix& A, const Vec& x) {
  if (static_cast<size_t>(A.cols()) != x.size())
    throw DimensionError("matvec: dimension mismatch");
  Vec y(A.rows(), 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols(); ++j) s += A(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double dot(const Vec& a, const Vec& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

/** A^T A as a SymMatrix. */
inline SymMatrix gram(const RectMatrix& A) {
  SymMatrix G(A.cols());
  for (int i = 0; i < A.cols(); ++i)
    for (int j = i; j < A.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < A.rows(); ++k) s += A(k, i) * A(k, j);
      G.set(i, j, s);
    }
  return G;
}

/** A A^T as a SymMatrix. */
inline SymMatrix outer_gram(const RectMatrix& A) {
  SymMatrix G(A.rows());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = i; j < A.rows(); ++j) {
      double s = 0.0;
      for (int k = 0; k < A.cols(); ++k) s += A(i, k) * A(j, k);
      G.set(i, j, s);
    }
  return G;
}

/** B^T A B symmetrized, for SymMatrix A. */
inline SymMatrix congruence(const SymMatrix& A, const RectMatrix& B) {
  if (A.dim() != B.rows()) throw DimensionError("congruence: dimension mismatch");
  RectMatrix AB = matmul(A.as_rect(), B);
  SymMatrix G(B.cols());
  for (int i = 0; i < B.cols(); ++i)
    for (int j = i; j < B.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < B.rows(); ++k) s += B(k, i) * AB(k, j);
      G.set(i, j, s);
    }
  return G;
}

inline double trace(const SymMatrix& A) {
  double t = 0.0;
  for (int i = 0; i < A.dim(); ++i) t += A(i, i);
  return t;
}

/** Tr(A B) for symmetric A, B. */
inline double trace_product(const SymMatrix& A, const SymMatrix& B) {
  if (A.dim() != B.dim()) throw DimensionError("trace_product: dimension mismatch");
  double t = 0.0;
  for (int i = 0; i < A.dim(); ++i)
    for (int j = 0; j < A.dim(); ++j) t += A(i, j) * B(j, i);
  return t;
}

inline double frob_norm(const SymMatrix& A) {
  double s = 0.0;
  for (double v : A.entries()) s += v * v;
  return std::sqrt(s);
}

inline double frob_norm(const RectMatrix& A) {
  double s = 0.0;
  for (double v : A.entries()) s += v * v;
  return std::sqrt(s);
}

inline SymMatrix sym_scale(const SymMatrix& A, double c) {
  SymMatrix B(A.dim());
  for (int i = 0; i < A.dim(); ++i)
    for (int j = i; j < A.dim(); ++j) B.set(i, j, c * A(i, j));
  return B;
}

inline SymMatrix sym_add(const SymMatrix& A, const SymMatrix& B) {
  if (A.dim() != B.dim()) throw DimensionError("sym_add: dimension mismatch");
  SymMatrix C(A.dim());
  for (int i = 0; i < A.dim(); ++i)
    for (int j = i; j < A.dim(); ++j) C.set(i, j, A(i, j) + B(i, j));
  return C;
}

/** A + c I. */
inline SymMatrix sym_shift(const SymMatrix& A, double c) {
  SymMatrix B = A;
  for (int i = 0; i < A.dim(); ++i) B.set(i, i, A(i, i) + c);
  return B;
}

struct EigResult {
  Vec eigenvalues;         // ascending
  RectMatrix eigenvectors; // column k pairs with eigenvalues[k]
};

/**
 * Cyclic Jacobi eigendecomposition. Rotations annihilate off-diagonal
 * entries in sweeps until the off-diagonal mass falls below 1e-14 of the
 * Frobenius norm; small dimensions make robustness the only concern.
 * Eigenvalues ascend; eigenvector signs are fixed (largest component
 * positive) so results are deterministic.
 */
inline EigResult sym_eig(const SymMatrix& A) {
  const int n = A.dim();
  std::vector<double> a(A.entries());
  auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
  RectMatrix V = RectMatrix::identity(n);

  const double anorm = frob_norm(A);
  const double tol = 1e-14 * (anorm > 0.0 ? anorm : 1.0);
  const int max_sweeps = 64;

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * at(p, q) * at(p, q);
    if (std::sqrt(off) <= tol) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = at(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);

        double app = at(p, p), aqq = at(q, q);
        at(p, p) = app - t * apq;
        at(q, q) = aqq + t * apq;
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          double akp = at(k, p), akq = at(k, q);
          at(k, p) = akp - s * (akq + tau * akp);
          at(p, k) = at(k, p);
          at(k, q) = akq + s * (akp - tau * akq);
          at(q, k) = at(k, q);
        }
        for (int k = 0; k < n; ++k) {
          double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = vkp - s * (vkq + tau * vkp);
          V(k, q) = vkq + s * (vkp - tau * vkq);
        }
      }
    }
  }
  if (sweep == max_sweeps)
    throw NumericalError("sym_eig: Jacobi sweep limit reached for matrix of dim " +
                         std::to_string(n));

  Vec lam(n);
  for (int i = 0; i < n; ++i) lam[i] = at(i, i);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return lam[i] < lam[j]; });

  EigResult r{Vec(n), RectMatrix(n, n)};
  for (int k = 0; k < n; ++k) {
    int src = order[k];
    r.eigenvalues[k] = lam[src];
    int imax = 0;
    double vmax = 0.0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(V(i, src)) > vmax) {
        vmax = std::abs(V(i, src));
        imax = i;
      }
    }
    double sign = V(imax, src) >= 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) r.eigenvectors(i, k) = sign * V(i, src);
  }
  return r;
}

inline double lambda_min(const SymMatrix& A) { return sym_eig(A).eigenvalues.front(); }

inline double lambda_max(const SymMatrix& A) { return sym_eig(A).eigenvalues.back(); }

/** V diag(f(lambda)) V^T from an eigendecomposition. */
inline SymMatrix assemble_from_eig(const EigResult& e, const Vec& f) {
  const int n = static_cast<int>(e.eigenvalues.size());
  SymMatrix S(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += e.eigenvectors(i, k) * f[k] * e.eigenvectors(j, k);
      S.set(i, j, s);
    }
  return S;
}

/**
 * Symmetric PSD square root. Eigenvalues in [-1e-10, 0) are clamped to
 * zero; anything lower is a genuine violation.
 */
inline SymMatrix sqrt_psd(const SymMatrix& A) {
  EigResult e = sym_eig(A);
  if (e.eigenvalues.front() < -1e-10)
    throw NotPsdError("sqrt_psd: matrix is not PSD, eigenvalue " +
                          std::to_string(e.eigenvalues.front()),
                      e.eigenvalues.front());
  Vec f(e.eigenvalues.size());
  for (size_t k = 0; k < f.size(); ++k)
    f[k] = std::sqrt(std::max(0.0, e.eigenvalues[k]));
  return assemble_from_eig(e, f);
}

/** Pseudo-inverse of a PSD matrix, truncating eigenvalues below rel_tol*lambda_max. */
inline SymMatrix pinv_psd(const SymMatrix& A, double rel_tol = 1e-12) {
  EigResult e = sym_eig(A);
  double lmax = std::max(0.0, e.eigenvalues.back());
  double cut = rel_tol * (lmax > 0.0 ? lmax : 1.0);
  Vec f(e.eigenvalues.size());
  for (size_t k = 0; k < f.size(); ++k)
    f[k] = e.eigenvalues[k] > cut ? 1.0 / e.eigenvalues[k] : 0.0;
  return assemble_from_eig(e, f);
}

/**
 * Rank cutoff for Gram-matrix eigenvalues. The target convention is
 * sigma <= 1e-10 * sigma_max * max(rows, cols), but the Gram product squares
 * the condition number, so exact zeros surface as lambda ~ eps_mach *
 * lambda_max; the floor term keeps their reciprocals out.
 */
inline double gram_lambda_cut(double lambda_max_val, int rows, int cols) {
  double rank_tol = 1e-10 * std::max(rows, cols);
  double gram_floor = 1e-13 * std::max(rows, cols);
  return lambda_max_val * std::max(rank_tol * rank_tol, gram_floor);
}

/**
 * Moore-Penrose pseudo-inverse via the smaller Gram matrix:
 * A^+ = A^T (A A^T)^+ when rows <= cols, else (A^T A)^+ A^T.
 */
inline RectMatrix pinv(const RectMatrix& A) {
  const int m = A.rows(), n = A.cols();
  const SymMatrix G = (m <= n) ? outer_gram(A) : gram(A);
  EigResult e = sym_eig(G);
  double cut = gram_lambda_cut(std::max(0.0, e.eigenvalues.back()), m, n);
  Vec f(e.eigenvalues.size());
  for (size_t k = 0; k < f.size(); ++k)
    f[k] = e.eigenvalues[k] > cut ? 1.0 / e.eigenvalues[k] : 0.0;
  SymMatrix Gp = assemble_from_eig(e, f);
  return (m <= n) ? matmul(transpose(A), Gp.as_rect())
                  : matmul(Gp.as_rect(), transpose(A));
}

/** Count of singular values above the numerical-rank cutoff. */
inline int numerical_rank(const RectMatrix& A) {
  const SymMatrix G = (A.rows() <= A.cols()) ? outer_gram(A) : gram(A);
  EigResult e = sym_eig(G);
  double cut = gram_lambda_cut(std::max(0.0, e.eigenvalues.back()), A.rows(), A.cols());
  int r = 0;
  for (double lam : e.eigenvalues)
    if (lam > cut) ++r;
  return r;
}

inline bool has_full_row_rank(const RectMatrix& A) {
  return numerical_rank(A) == A.rows();
}

/** Lower Cholesky factor, or nullopt if A is not positive definite. */
inline std::optional<RectMatrix> cholesky(const SymMatrix& A) {
  const int n = A.dim();
  RectMatrix L(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (s <= 0.0) return std::nullopt;
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  return L;
}

inline bool is_positive_definite(const SymMatrix& A) { return cholesky(A).has_value(); }

/** Solves A x = b for PD A via Cholesky. */
inline Vec solve_spd(const SymMatrix& A, const Vec& b) {
  auto Lopt = cholesky(A);
  if (!Lopt) throw NotPsdError("solve_spd: matrix is not positive definite", 0.0);
  const RectMatrix& L = *Lopt;
  const int n = A.dim();
  Vec y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= L(i, k) * y[k];
    y[i] = s / L(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
    x[i] = s / L(i, i);
  }
  return x;
}

/** Inverse of a PD matrix via Cholesky column solves. */
inline SymMatrix inverse_spd(const SymMatrix& A) {
  const int n = A.dim();
  auto Lopt = cholesky(A);
  if (!Lopt) throw NotPsdError("inverse_spd: matrix is not positive definite", 0.0);
  // One correctly rounded division; routing 1/a through the Cholesky factor
  // would cost an ulp (1/sqrt(a)/sqrt(a)) and break exact scalar identities.
  if (n == 1) return SymMatrix(1, {1.0 / A(0, 0)});
  RectMatrix inv(n, n);
  Vec e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vec col = solve_spd(A, e);
    e[j] = 0.0;
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  // Column solves agree across the diagonal only to rounding; the SymMatrix
  // constructor symmetrizes.
  return SymMatrix(n, Vec(inv.entries()));
}

inline double log_det_spd(const SymMatrix& A) {
  auto Lopt = cholesky(A);
  if (!Lopt) throw NotPsdError("log_det_spd: matrix is not positive definite", 0.0);
  double s = 0.0;
  for (int i = 0; i < A.dim(); ++i) s += std::log((*Lopt)(i, i));
  return 2.0 * s;
}

}  // namespace noiseforge

#endif  // NOISEFORGE_MATRIX_HPP
