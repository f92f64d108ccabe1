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
// Security-limited noise design as a semidefinite program:
//
//     minimize   Tr(W X)
//     subject to F^T X F >= 2 alpha I,   X >= 0
//
// solved by a textbook logarithmic-barrier interior-point method on the
// composite barrier -ln det(F^T X F - 2 alpha I) - ln det(X + eps_reg I).
// Problems are tiny (m <= ~20), so robustness and zero dependencies beat
// asymptotics. A closed form for square invertible F serves as an
// independent oracle: X* = 2 alpha (F F^T)^{-1}.

#ifndef NOISEFORGE_SDP_HPP
#define NOISEFORGE_SDP_HPP

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "noiseforge/errors.hpp"
#include "noiseforge/matrix.hpp"

namespace noiseforge {

struct SdpProblem {
  SymMatrix W;    // m x m, PD objective weight
  RectMatrix F;   // m x p attack channel
  double alpha;   // security floor (KL per squared bias)
};

struct SdpSolution {
  SymMatrix X_star;
  double objective;
  double duality_gap_estimate;  // objective minus a certified lower bound
  int iterations;               // Newton steps total
  double certificate;           // lambda_min(F^T X* F - 2 alpha I)
};

/** Independent oracle for square invertible F: X* = 2 alpha (F F^T)^{-1}. */
inline SymMatrix closed_form_square_F(const SymMatrix& W, const RectMatrix& F,
                                      double alpha) {
  (void)W;  // the optimum is W-independent in the invertible square case
  if (F.rows() != F.cols())
    throw InvalidArgumentError("closed_form_square_F: F must be square");
  if (numerical_rank(F) < F.rows())
    throw InvalidArgumentError("closed_form_square_F: F is singular");
  return sym_scale(inverse_spd(outer_gram(F)), 2.0 * alpha);
}

namespace sdp_detail {

// Symmetric basis element k for dimension m, enumerating the upper triangle
// row by row; diagonal elements are unit, off-diagonal have 1 at (i,j),(j,i).
inline void basis_index(int k, int m, int& i, int& j) {
  int idx = 0;
  for (i = 0; i < m; ++i)
    for (j = i; j < m; ++j) {
      if (idx == k) return;
      ++idx;
    }
}

}  // namespace sdp_detail

/**
 * Barrier interior-point solve. Requires rank(F) = p (otherwise
 * F^T X F >= 2 alpha I is infeasible for every X) and alpha > 0.
 */
inline SdpSolution solve(const SdpProblem& prob, double tol = 1e-8) {
  const SymMatrix& W = prob.W;
  const RectMatrix& F = prob.F;
  const double alpha = prob.alpha;
  const int m = W.dim();
  const int p = F.cols();

  if (F.rows() != m) throw DimensionError("sdp::solve: F rows must match W dim");
  if (!(alpha > 0.0)) throw InvalidArgumentError("sdp::solve: alpha must be positive");
  if (!is_positive_definite(W))
    throw NotPsdError("sdp::solve: W must be positive definite", lambda_min(W));
  if (frob_norm(F) == 0.0 || numerical_rank(F) < p)
    throw InfeasibleError(
        "sdp::solve: rank(F) < p, the constraint F^T X F >= 2 alpha I cannot hold");

  const double eps_reg = 1e-10;
  const int q = m * (m + 1) / 2;  // dimension of vech(X)

  // Strictly feasible start: X0 = 4 alpha / lambda_min(F^T F) * I.
  double lmin_ftf = lambda_min(gram(F));
  SymMatrix X = sym_scale(SymMatrix::identity(m), 4.0 * alpha / lmin_ftf);

  const RectMatrix Ft = transpose(F);
  auto slack1 = [&](const SymMatrix& Xc) {  // F^T X F - 2 alpha I
    SymMatrix S = congruence(Xc, F);
    return sym_shift(S, -2.0 * alpha);
  };
  auto slack2 = [&](const SymMatrix& Xc) { return sym_shift(Xc, eps_reg); };

  auto barrier_value = [&](const SymMatrix& Xc, double t) -> double {
    auto s1 = slack1(Xc);
    auto s2 = slack2(Xc);
    auto c1 = cholesky(s1);
    auto c2 = cholesky(s2);
    if (!c1 || !c2) return std::numeric_limits<double>::infinity();
    return t * trace_product(W, Xc) - log_det_spd(s1) - log_det_spd(s2);
  };

  const double nu = p + m;  // total barrier degree
  double t = 1.0;
  int newton_total = 0;
  const int max_outer = 64, max_inner = 64;

  for (int outer = 0; outer < max_outer; ++outer) {
    for (int inner = 0; inner < max_inner; ++inner) {
      SymMatrix S1 = slack1(X);
      SymMatrix S2 = slack2(X);
      SymMatrix S1inv = inverse_spd(S1);
      SymMatrix S2inv = inverse_spd(S2);

      // grad = t W - F S1^{-1} F^T - S2^{-1}
      RectMatrix FS1Ft = matmul(matmul(F, S1inv.as_rect()), Ft);
      SymMatrix grad(m);
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j)
          grad.set(i, j, t * W(i, j) - FS1Ft(i, j) - S2inv(i, j));

      // Newton system in the vech basis: H dx = -g.
      // H[U,V] = Tr(S1i F^T U F S1i F^T V F) + Tr(S2i U S2i V).
      std::vector<RectMatrix> A1(q, RectMatrix(p, p));  // S1i F^T E_k F
      std::vector<RectMatrix> A2(q, RectMatrix(m, m));  // S2i E_k
      for (int k = 0; k < q; ++k) {
        int bi, bj;
        sdp_detail::basis_index(k, m, bi, bj);
        // F^T E_k F where E_k = e_i e_j^T + e_j e_i^T (or e_i e_i^T).
        RectMatrix FtEF(p, p);
        for (int a = 0; a < p; ++a)
          for (int b = 0; b < p; ++b) {
            double v = F(bi, a) * F(bj, b) + (bi != bj ? F(bj, a) * F(bi, b) : 0.0);
            FtEF(a, b) = v;
          }
        A1[k] = matmul(S1inv.as_rect(), FtEF);
        RectMatrix Ek(m, m);
        Ek(bi, bj) = 1.0;
        if (bi != bj) Ek(bj, bi) = 1.0;
        A2[k] = matmul(S2inv.as_rect(), Ek);
      }

      RectMatrix H(q, q);
      Vec g(q);
      for (int k = 0; k < q; ++k) {
        int bi, bj;
        sdp_detail::basis_index(k, m, bi, bj);
        g[k] = (bi == bj) ? grad(bi, bi) : 2.0 * grad(bi, bj);
        for (int l = k; l < q; ++l) {
          double h = 0.0;
          for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) h += A1[k](a, b) * A1[l](b, a);
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) h += A2[k](a, b) * A2[l](b, a);
          H(k, l) = h;
          H(l, k) = h;
        }
      }

      // Solve H dx = -g; H is PD on the interior but may be ill-conditioned
      // near the optimum, so fall back to a pseudo-inverse solve.
      SymMatrix Hs(q, Vec(H.entries()));
      Vec dx(q);
      auto hc = cholesky(Hs);
      if (hc) {
        Vec ng(q);
        for (int k = 0; k < q; ++k) ng[k] = -g[k];
        dx = solve_spd(Hs, ng);
      } else {
        RectMatrix Hp = pinv(H);
        for (int k = 0; k < q; ++k) {
          double s = 0.0;
          for (int l = 0; l < q; ++l) s -= Hp(k, l) * g[l];
          dx[k] = s;
        }
      }

      double decrement2 = 0.0;
      for (int k = 0; k < q; ++k) decrement2 += -g[k] * dx[k];
      ++newton_total;

      // Backtracking line search keeping both slacks PD.
      SymMatrix D(m);
      for (int k = 0; k < q; ++k) {
        int bi, bj;
        sdp_detail::basis_index(k, m, bi, bj);
        D.set(bi, bj, dx[k]);
      }
      double f0 = barrier_value(X, t);
      double step = 1.0;
      double gTd = 0.0;
      for (int k = 0; k < q; ++k) gTd += g[k] * dx[k];
      SymMatrix Xnext = X;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        SymMatrix cand = sym_add(X, sym_scale(D, step));
        double fc = barrier_value(cand, t);
        if (fc <= f0 + 0.25 * step * gTd) {
          Xnext = cand;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved)
        throw NumericalError("sdp::solve: line search failed to make progress");
      X = Xnext;

      if (decrement2 * 0.5 < 1e-12) break;  // centered for this t
    }
    if (nu / t < tol) break;
    t *= 10.0;
    if (outer == max_outer - 1)
      throw NumericalError("sdp::solve: outer iteration cap reached");
  }

  // Certified lower bound: the barrier dual candidate Z = S1^{-1}/t, scaled
  // so F Z F^T <= W holds exactly; weak duality then gives 2 alpha Tr(Z).
  SymMatrix S1 = slack1(X);
  SymMatrix Z = sym_scale(inverse_spd(S1), 1.0 / t);
  RectMatrix FZFt = matmul(matmul(F, Z.as_rect()), Ft);
  SymMatrix Wsqrt_inv = inverse_spd(sqrt_psd(W));
  SymMatrix M = congruence(SymMatrix(m, Vec(FZFt.entries())), Wsqrt_inv.as_rect());
  double lmax = lambda_max(M);
  double theta = lmax > 1.0 ? 1.0 / lmax : 1.0;
  double dual_value = 2.0 * alpha * theta * trace(Z);

  double objective = trace_product(W, X);
  SdpSolution sol{X, objective, std::max(objective - dual_value, 0.0), newton_total,
                  lambda_min(slack1(X))};
  return sol;
}

}  // namespace noiseforge

#endif  // NOISEFORGE_SDP_HPP
