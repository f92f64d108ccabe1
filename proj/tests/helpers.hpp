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

#ifndef NOISEFORGE_TESTS_HELPERS_HPP
#define NOISEFORGE_TESTS_HELPERS_HPP

#include <cmath>
#include <numbers>
#include <random>

#include "noiseforge/matrix.hpp"
#include "noiseforge/mechanisms.hpp"

namespace nf_test {

using noiseforge::RectMatrix;
using noiseforge::SymMatrix;
using noiseforge::Vec;

inline RectMatrix random_rect(int rows, int cols, std::mt19937& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  RectMatrix A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = nd(gen);
  return A;
}

inline SymMatrix random_sym(int dim, std::mt19937& gen, double scale = 1.0) {
  RectMatrix A = random_rect(dim, dim, gen, scale);
  SymMatrix S(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) S.set(i, j, 0.5 * (A(i, j) + A(j, i)));
  return S;
}

/** B^T B + ridge * I; PD for ridge > 0, PSD (often singular) for ridge = 0. */
inline SymMatrix random_psd(int dim, std::mt19937& gen, double ridge = 0.0) {
  RectMatrix B = random_rect(dim, dim, gen);
  SymMatrix S = noiseforge::gram(B);
  if (ridge > 0.0)
    for (int i = 0; i < dim; ++i) S.set(i, i, S(i, i) + ridge);
  return S;
}

/** Random PD matrix with eigenvalues in [lo, hi] (bounded condition number). */
inline SymMatrix random_pd_conditioned(int dim, std::mt19937& gen, double lo, double hi) {
  SymMatrix S = random_sym(dim, gen);
  noiseforge::EigResult e = noiseforge::sym_eig(S);
  std::uniform_real_distribution<double> ud(lo, hi);
  Vec lam(dim);
  for (int k = 0; k < dim; ++k) lam[k] = ud(gen);
  return noiseforge::assemble_from_eig(e, lam);
}

inline double frob_dist(const SymMatrix& A, const SymMatrix& B) {
  double s = 0.0;
  for (int i = 0; i < A.dim(); ++i)
    for (int j = 0; j < A.dim(); ++j) {
      double d = A(i, j) - B(i, j);
      s += d * d;
    }
  return std::sqrt(s);
}

inline double frob_dist(const RectMatrix& A, const RectMatrix& B) {
  double s = 0.0;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) {
      double d = A(i, j) - B(i, j);
      s += d * d;
    }
  return std::sqrt(s);
}

/**
 * Symmetric two-component Gaussian mixture 0.5 N(-a, s^2) + 0.5 N(+a, s^2):
 * zero-mean, smooth, full-support, and decidedly non-Gaussian, which makes it
 * the canonical generic mechanism for testing the measure identities.
 */
inline noiseforge::GenericMechanism make_gaussian_mixture(double a, double s) {
  const double inv2s2 = 1.0 / (2.0 * s * s);
  const double lognorm = -0.5 * std::log(2.0 * std::numbers::pi * s * s) - std::numbers::ln2;
  auto logdens = [=](const Vec& w) {
    double q1 = -(w[0] + a) * (w[0] + a) * inv2s2;
    double q2 = -(w[0] - a) * (w[0] - a) * inv2s2;
    double hi = std::max(q1, q2);
    return lognorm + hi + std::log(std::exp(q1 - hi) + std::exp(q2 - hi));
  };
  auto score = [=](const Vec& w) -> Vec {
    double q1 = -(w[0] + a) * (w[0] + a) * inv2s2;
    double q2 = -(w[0] - a) * (w[0] - a) * inv2s2;
    double hi = std::max(q1, q2);
    double e1 = std::exp(q1 - hi), e2 = std::exp(q2 - hi);
    double g = (-(w[0] + a) * e1 - (w[0] - a) * e2) / ((e1 + e2) * s * s);
    return {g};
  };
  auto sampler = [=](noiseforge::PhiloxRng& rng) -> Vec {
    double center = rng.uniform01() < 0.5 ? -a : a;
    return {center + s * rng.normal()};
  };
  return noiseforge::GenericMechanism(1, logdens, score, sampler);
}

}  // namespace nf_test

#endif  // NOISEFORGE_TESTS_HELPERS_HPP
