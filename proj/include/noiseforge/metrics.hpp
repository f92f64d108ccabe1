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
// The three mechanism measures and their estimators.
//
//   privacy  P = 1 / Tr(W I)            (hard-to-estimate private data)
//   quality  Q = E ||w||^2              (response distortion)
//   security S = min_xi lim KL/rho^2 = lambda_min(F^T I F) / 2
//
// I is the Fisher information of the noise density, computed analytically
// for the closed families or as a Monte Carlo score outer product. KL comes
// in closed form (Gaussian/Laplace shifts), by adaptive quadrature, and as
// the extrapolated small-bias limit that defines S.

#ifndef NOISEFORGE_METRICS_HPP
#define NOISEFORGE_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "noiseforge/errors.hpp"
#include "noiseforge/matrix.hpp"
#include "noiseforge/mechanisms.hpp"
#include "noiseforge/quadrature.hpp"
#include "noiseforge/rng.hpp"

namespace noiseforge {

struct MeasureTriple {
  double privacy;
  double quality;
  double security;
};

enum class FisherMethod { analytic, monte_carlo };

struct FisherEstimate {
  SymMatrix matrix;
  FisherMethod method;
  std::optional<long> n_samples;
  std::optional<double> standard_error;            // max per-entry SE
  std::optional<SymMatrix> entry_standard_errors;  // full per-entry SEs
};

namespace default_mc {
inline constexpr long kSamples = 1000000;
inline constexpr std::uint64_t kSeed = 0x5eedf00dull;
}  // namespace default_mc

/**
 * Fisher information matrix of the noise density.
 * Analytic: Gaussian -> V^{-1}; Laplace -> 1/b^2 (the classical value; the
 * score-based derivation does not apply at the kink). Monte Carlo: score
 * outer product (1/n) sum s s^T, PSD by construction, with per-entry
 * standard errors.
 */
inline FisherEstimate fisher_information(const NoiseMechanism& mech,
                                         FisherMethod method = FisherMethod::analytic,
                                         long n = default_mc::kSamples,
                                         std::uint64_t seed = default_mc::kSeed) {
  if (method == FisherMethod::analytic) {
    if (const auto* g = std::get_if<GaussianMechanism>(&mech))
      return {g->covariance_inverse(), FisherMethod::analytic, std::nullopt,
              std::nullopt, std::nullopt};
    if (const auto* l = std::get_if<LaplaceMechanism>(&mech)) {
      SymMatrix I1(1);
      I1.set(0, 0, 1.0 / (l->scale() * l->scale()));
      return {I1, FisherMethod::analytic, std::nullopt, std::nullopt, std::nullopt};
    }
    throw UnsupportedMethodError(
        "fisher_information: no analytic form for a generic mechanism");
  }

  if (n < 2) throw InvalidArgumentError("fisher_information: n must be >= 2");
  const int m = dim(mech);
  PhiloxRng rng(seed);
  std::vector<double> sum(static_cast<size_t>(m) * m, 0.0);
  std::vector<double> sumsq(static_cast<size_t>(m) * m, 0.0);
  for (long i = 0; i < n; ++i) {
    Vec s = score(mech, sample_one(mech, rng));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double v = s[a] * s[b];
        sum[static_cast<size_t>(a) * m + b] += v;
        sumsq[static_cast<size_t>(a) * m + b] += v * v;
      }
  }
  SymMatrix I(m), se(m);
  double max_se = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      double mean = sum[static_cast<size_t>(a) * m + b] / n;
      double var = sumsq[static_cast<size_t>(a) * m + b] / n - mean * mean;
      double s_ab = std::sqrt(std::max(var, 0.0) / n);
      I.set(a, b, mean);
      se.set(a, b, s_ab);
      max_se = std::max(max_se, s_ab);
    }
  return {I, FisherMethod::monte_carlo, n, max_se, se};
}

inline double privacy_from_fisher(const FisherEstimate& fisher, const SymMatrix& W) {
  if (W.dim() != fisher.matrix.dim())
    throw DimensionError("privacy: W dimension does not match the Fisher matrix");
  double t = trace_product(W, fisher.matrix);
  if (!(t > 0.0))
    throw InvalidArgumentError(
        "privacy: Tr(W I) = " + std::to_string(t) +
        "; zero Fisher weight makes the privacy measure unbounded (degenerate)");
  return 1.0 / t;
}

/** P = 1 / Tr(W I); analytic Fisher when the family has one. */
inline double privacy(const NoiseMechanism& mech, const SymMatrix& W,
                      long n = default_mc::kSamples,
                      std::uint64_t seed = default_mc::kSeed) {
  FisherMethod method = std::holds_alternative<GenericMechanism>(mech)
                            ? FisherMethod::monte_carlo
                            : FisherMethod::analytic;
  return privacy_from_fisher(fisher_information(mech, method, n, seed), W);
}

struct QualityEstimate {
  double value;
  std::optional<double> standard_error;  // Monte Carlo path only
};

/** Q = E ||w||^2: Tr(V) for Gaussian, 2 b^2 for Laplace, Monte Carlo otherwise. */
inline QualityEstimate quality_estimate(const NoiseMechanism& mech,
                                        long n = default_mc::kSamples,
                                        std::uint64_t seed = default_mc::kSeed) {
  if (const auto* g = std::get_if<GaussianMechanism>(&mech))
    return {trace(g->covariance()), std::nullopt};
  if (const auto* l = std::get_if<LaplaceMechanism>(&mech))
    return {2.0 * l->scale() * l->scale(), std::nullopt};
  if (n < 2) throw InvalidArgumentError("quality: n must be >= 2");
  PhiloxRng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < n; ++i) {
    Vec w = sample_one(mech, rng);
    double q = dot(w, w);
    sum += q;
    sumsq += q * q;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

inline double quality(const NoiseMechanism& mech, long n = default_mc::kSamples,
                      std::uint64_t seed = default_mc::kSeed) {
  return quality_estimate(mech, n, seed).value;
}

inline double security_from_fisher(const FisherEstimate& fisher, const RectMatrix& F) {
  if (F.rows() != fisher.matrix.dim())
    throw DimensionError("security: F must have one row per noise dimension");
  SymMatrix I_d = congruence(fisher.matrix, F);
  return 0.5 * lambda_min(I_d);
}

/** S = lambda_min(F^T I F) / 2. */
inline double security(const NoiseMechanism& mech, const RectMatrix& F,
                       long n = default_mc::kSamples,
                       std::uint64_t seed = default_mc::kSeed) {
  FisherMethod method = std::holds_alternative<GenericMechanism>(mech)
                            ? FisherMethod::monte_carlo
                            : FisherMethod::analytic;
  return security_from_fisher(fisher_information(mech, method, n, seed), F);
}

/** KL between N(0, V) and N(s, V): s^T V^{-1} s / 2. */
inline double kl_gaussian_shift(const SymMatrix& V, const Vec& s) {
  if (static_cast<int>(s.size()) != V.dim())
    throw DimensionError("kl_gaussian_shift: shift dimension mismatch");
  Vec x = solve_spd(V, s);  // throws if V is not PD
  return 0.5 * dot(s, x);
}

/** KL between Laplace(0, b) and Laplace(s, b): exp(-|s|/b) - 1 + |s|/b. */
inline double kl_laplace_shift(double b, double s) {
  if (!(b > 0.0)) throw InvalidArgumentError("kl_laplace_shift: b must be positive");
  double r = std::abs(s) / b;
  return std::expm1(-r) + r;
}

struct KlResult {
  double value;
  double error;  // quadrature error estimate
};

/**
 * KL(gamma(.) || gamma(. - s)) by adaptive quadrature over a box covering
 * +-12 standard deviations around both centers. Laplace kinks at w = 0 and
 * w = s become explicit breakpoints. Supported for dim <= 2.
 */
inline KlResult kl_numeric(const NoiseMechanism& mech, const Vec& s) {
  const int m = dim(mech);
  if (static_cast<int>(s.size()) != m)
    throw DimensionError("kl_numeric: shift dimension mismatch");
  if (m > 2)
    throw UnsupportedMethodError("kl_numeric: quadrature implemented for dim <= 2");

  Vec halfwidth = tail_halfwidth(mech);
  Vec lo(m), hi(m);
  for (int k = 0; k < m; ++k) {
    lo[k] = std::min(0.0, s[k]) - halfwidth[k];
    hi[k] = std::max(0.0, s[k]) + halfwidth[k];
  }

  const double epsabs = 1e-13, epsrel = 1e-10;
  if (m == 1) {
    std::vector<double> breaks;
    if (std::holds_alternative<LaplaceMechanism>(mech)) breaks = {0.0, s[0]};
    auto f = [&](double w) {
      double l0 = log_density(mech, {w});
      double l1 = log_density(mech, {w - s[0]});
      return std::exp(l0) * (l0 - l1);
    };
    QuadResult r = integrate(f, lo[0], hi[0], epsabs, epsrel, 4000, &breaks);
    return {r.value, r.error};
  }

  auto f = [&](double x, double y) {
    double l0 = log_density(mech, {x, y});
    double l1 = log_density(mech, {x - s[0], y - s[1]});
    return std::exp(l0) * (l0 - l1);
  };
  QuadResult r = integrate_2d(f, lo[0], hi[0], lo[1], hi[1], epsabs, epsrel);
  return {r.value, r.error};
}

/**
 * Numerical S: evaluates kl_numeric(mech, rho F xi)/rho^2 down the rho grid,
 * Richardson-extrapolates in rho^2, and minimizes over directions xi. The
 * direction set is the lambda_min eigenvector of F^T I F (analytic Fisher
 * when the family has one, otherwise a Monte Carlo estimate) plus 32 random
 * unit probes; for a single attack channel the direction space is trivial.
 * Throws LimitUnstableError when the two smallest radii disagree by > 5%.
 */
inline double kl_sensitivity_limit(const NoiseMechanism& mech, const RectMatrix& F,
                                   std::vector<double> rho_grid = {1e-2, 1e-3, 1e-4}) {
  const int m = dim(mech);
  if (F.rows() != m)
    throw DimensionError("kl_sensitivity_limit: F must have one row per noise dimension");
  if (rho_grid.size() < 2)
    throw InvalidArgumentError("kl_sensitivity_limit: need at least two radii");
  for (size_t i = 0; i + 1 < rho_grid.size(); ++i)
    if (!(rho_grid[i] > rho_grid[i + 1] && rho_grid[i + 1] > 0.0))
      throw InvalidArgumentError(
          "kl_sensitivity_limit: rho grid must descend toward zero");

  if (frob_norm(F) == 0.0) return 0.0;  // no attack channel

  const int p = F.cols();
  std::vector<Vec> directions;
  // Seed with the analytic minimizer when a Fisher estimate exists.
  try {
    FisherMethod method = std::holds_alternative<GenericMechanism>(mech)
                              ? FisherMethod::monte_carlo
                              : FisherMethod::analytic;
    FisherEstimate fisher = fisher_information(mech, method, 200000, 0xd19e57ull);
    EigResult e = sym_eig(congruence(fisher.matrix, F));
    Vec xi(p);
    for (int i = 0; i < p; ++i) xi[i] = e.eigenvectors(i, 0);
    directions.push_back(xi);
  } catch (const Error&) {
    // Fall through to random probes only.
  }
  if (p > 1) {
    PhiloxRng rng(0xd1a3c7ull);
    for (int rep = 0; rep < 32; ++rep) {
      Vec xi(p);
      double nrm = 0.0;
      do {
        for (double& x : xi) x = rng.normal();
        nrm = norm2(xi);
      } while (nrm < 1e-6);
      for (double& x : xi) x /= nrm;
      directions.push_back(xi);
    }
  } else if (directions.empty()) {
    directions.push_back({1.0});
  }

  const size_t nr = rho_grid.size();
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& xi : directions) {
    Vec fxi = matvec(F, xi);
    std::vector<double> k(nr);
    for (size_t j = 0; j < nr; ++j) {
      Vec s(m);
      for (int i = 0; i < m; ++i) s[i] = rho_grid[j] * fxi[i];
      k[j] = kl_numeric(mech, s).value / (rho_grid[j] * rho_grid[j]);
    }
    double k1 = k[nr - 2], k2 = k[nr - 1];
    double denom = std::max(std::abs(k2), 1e-300);
    if (std::abs(k1 - k2) / denom > 0.05)
      throw LimitUnstableError(
          "kl_sensitivity_limit: KL/rho^2 varies by more than 5% across the two "
          "smallest radii (" + std::to_string(k1) + " vs " + std::to_string(k2) + ")");
    double r1 = rho_grid[nr - 2], r2 = rho_grid[nr - 1];
    double extrap = (k2 * r1 * r1 - k1 * r2 * r2) / (r1 * r1 - r2 * r2);
    best = std::min(best, extrap);
  }
  return std::max(best, 0.0);
}

}  // namespace noiseforge

#endif  // NOISEFORGE_METRICS_HPP
