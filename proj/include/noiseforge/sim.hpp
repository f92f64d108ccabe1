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

// Monte Carlo harness around the designed mechanisms: server responses with
// optional bias injection, a likelihood-ratio detector with empirically
// calibrated threshold, an eavesdropper estimation experiment against the
// information bound, and the privacy/security sweep drivers behind the CSV
// outputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "noiseforge/designer.hpp"
#include "noiseforge/errors.hpp"
#include "noiseforge/matrix.hpp"
#include "noiseforge/mechanisms.hpp"
#include "noiseforge/metrics.hpp"
#include "noiseforge/rng.hpp"

namespace noiseforge {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/** Upper tail P(Z > x) for a standard normal. */
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/**
 * Inverse standard normal CDF, Wichura's rational approximations (relative
 * error below 1e-15 over the full open interval).
 */
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgumentError("normal_quantile: p must lie in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    z = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    z = num / den;
  }
  return q < 0.0 ? -z : z;
}

struct ServerInstance {
  Vec x;                     // private data, fixed across trials
  RectMatrix C;              // m x n query map
  NoiseMechanism mechanism;  // response noise, dim m
};

struct AttackScenario {
  RectMatrix F;       // m x p bias channel
  Vec d;              // injected bias, dim p
  long n_responses;   // responses the adversary corrupts
  std::uint64_t seed;
};

struct DetectionReport {
  long n_responses;  // N, responses pooled per detection decision
  double kl_per_sample;
  double threshold;
  double false_negative_rate;
  double false_positive_rate;
  long trials;
  double fnr_standard_error;
  double fpr_standard_error;
  bool detection_impossible;  // KL = 0: the hypotheses coincide
};

struct TradeoffRow {
  double alpha;  // sweep abscissa (epsilon on DP rows)
  double eta;    // quality budget (sensitivity on DP rows)
  double privacy;
  double security;
  double quality;
  ActiveConstraint active_constraint;
  bool feasible;
  // KL at unit bias, filled by the DP sweep only.
  double kl_unit_bias = std::numeric_limits<double>::quiet_NaN();
};

namespace sim_detail {

inline void validate_server(const ServerInstance& server) {
  const int m = dim(server.mechanism);
  if (server.C.rows() != m)
    throw DimensionError("respond: C must have one row per noise dimension");
  if (static_cast<int>(server.x.size()) != server.C.cols())
    throw DimensionError("respond: x length must match the C columns");
}

inline Vec attack_bias(const AttackScenario& attack, int m) {
  if (attack.F.rows() != m)
    throw DimensionError("respond: F must have one row per noise dimension");
  if (static_cast<int>(attack.d.size()) != attack.F.cols())
    throw DimensionError("respond: d length must match the F columns");
  for (double v : attack.d)
    if (!std::isfinite(v))
      throw InvalidArgumentError("respond: bias d must be finite");
  return matvec(attack.F, attack.d);
}

}  // namespace sim_detail

/** Draws y_i = C x + w_i (+ F d when attacked); deterministic under seed. */
inline std::vector<Vec> respond(const ServerInstance& server,
                                const std::optional<AttackScenario>& attack,
                                long n, std::uint64_t seed) {
  sim_detail::validate_server(server);
  if (n < 1) throw InvalidArgumentError("respond: n must be at least 1");
  Vec base = matvec(server.C, server.x);
  if (attack) {
    Vec fd = sim_detail::attack_bias(*attack, dim(server.mechanism));
    for (std::size_t i = 0; i < base.size(); ++i) base[i] += fd[i];
  }
  std::vector<Vec> ys = sample(server.mechanism, n, seed);
  for (Vec& y : ys)
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += base[i];
  return ys;
}

inline std::vector<Vec> respond(const ServerInstance& server,
                                const AttackScenario& attack) {
  if (attack.n_responses < 1)
    throw InvalidArgumentError("respond: n_responses must be at least 1");
  return respond(server, std::optional<AttackScenario>(attack),
                 attack.n_responses, attack.seed);
}

namespace sim_detail {

/** KL between the clean and the Fd-shifted noise density, per response. */
inline double shift_kl(const NoiseMechanism& mech, const Vec& fd) {
  if (const auto* g = std::get_if<GaussianMechanism>(&mech))
    return kl_gaussian_shift(g->covariance(), fd);
  if (const auto* l = std::get_if<LaplaceMechanism>(&mech))
    return kl_laplace_shift(l->scale(), fd[0]);
  double n2 = norm2(fd);
  if (n2 == 0.0) return 0.0;
  return kl_numeric(mech, fd).value;
}

// Per-trial log-likelihood-ratio sums Lambda = sum_i log[gamma(y_i - Cx) /
// gamma(y_i - Cx - Fd)] under both hypotheses. For the closed-form families
// the per-sample ratio collapses to a scalar in the sampled noise, which the
// fast paths exploit; they are algebraically identical to the generic path.
inline void lambda_sums(const NoiseMechanism& mech, const Vec& fd, long N,
                        long trials, std::uint64_t seed, Vec& lam0, Vec& lam1) {
  const int m = dim(mech);
  lam0.assign(trials, 0.0);
  lam1.assign(trials, 0.0);

  if (const auto* g = std::get_if<GaussianMechanism>(&mech)) {
    // Lambda increment is +-KL - w^T V^{-1} fd with w = L z, so only the
    // scalar z^T (L^T V^{-1} fd) is needed per sample.
    const SymMatrix& V = g->covariance();
    Vec r = solve_spd(V, fd);
    auto L = cholesky(V);
    if (!L)
      throw NotPsdError("likelihood_ratio_detect: covariance not PD", 0.0);
    Vec c = matvec(transpose(*L), r);
    double klg = 0.5 * dot(fd, r);
    for (long t = 0; t < trials; ++t) {
      PhiloxRng rng0(seed, 2 * static_cast<std::uint64_t>(t));
      PhiloxRng rng1(seed, 2 * static_cast<std::uint64_t>(t) + 1);
      double s0 = 0.0, s1 = 0.0;
      for (long i = 0; i < N; ++i) {
        double u = 0.0;
        for (int k = 0; k < m; ++k) u += rng0.normal() * c[k];
        s0 += klg - u;
      }
      for (long i = 0; i < N; ++i) {
        double u = 0.0;
        for (int k = 0; k < m; ++k) u += rng1.normal() * c[k];
        s1 += -klg - u;
      }
      lam0[t] = s0;
      lam1[t] = s1;
    }
    return;
  }

  if (const auto* l = std::get_if<LaplaceMechanism>(&mech)) {
    const double b = l->scale(), s = fd[0];
    for (long t = 0; t < trials; ++t) {
      PhiloxRng rng0(seed, 2 * static_cast<std::uint64_t>(t));
      PhiloxRng rng1(seed, 2 * static_cast<std::uint64_t>(t) + 1);
      double s0 = 0.0, s1 = 0.0;
      for (long i = 0; i < N; ++i) {
        double w = rng0.laplace(b);
        s0 += (std::abs(w - s) - std::abs(w)) / b;
      }
      for (long i = 0; i < N; ++i) {
        double w = rng1.laplace(b);
        s1 += (std::abs(w) - std::abs(w + s)) / b;
      }
      lam0[t] = s0;
      lam1[t] = s1;
    }
    return;
  }

  Vec shifted(m);
  for (long t = 0; t < trials; ++t) {
    PhiloxRng rng0(seed, 2 * static_cast<std::uint64_t>(t));
    PhiloxRng rng1(seed, 2 * static_cast<std::uint64_t>(t) + 1);
    double s0 = 0.0, s1 = 0.0;
    for (long i = 0; i < N; ++i) {
      Vec w = sample_one(mech, rng0);
      for (int k = 0; k < m; ++k) shifted[k] = w[k] - fd[k];
      s0 += log_density(mech, w) - log_density(mech, shifted);
    }
    for (long i = 0; i < N; ++i) {
      Vec w = sample_one(mech, rng1);
      for (int k = 0; k < m; ++k) shifted[k] = w[k] + fd[k];
      s1 += log_density(mech, shifted) - log_density(mech, w);
    }
    lam0[t] = s0;
    lam1[t] = s1;
  }
}

}  // namespace sim_detail

/**
 * Likelihood-ratio detection of an injected bias. Per trial, N responses are
 * pooled into Lambda = sum log[gamma(y - Cx) / gamma(y - Cx - Fd)]; small
 * Lambda is evidence for the attack. The threshold is the empirical
 * fpr_target quantile of the clean-hypothesis Lambda sample, with randomized
 * tie-breaking so the false-positive rate is honored even when Lambda has
 * atoms (e.g. Fd = 0, where both hypotheses coincide).
 */
inline DetectionReport likelihood_ratio_detect(const NoiseMechanism& mechanism,
                                               const RectMatrix& C, const Vec& x,
                                               const RectMatrix& F, const Vec& d,
                                               long N, long trials,
                                               double fpr_target,
                                               std::uint64_t seed) {
  const int m = dim(mechanism);
  if (C.rows() != m)
    throw DimensionError("likelihood_ratio_detect: C rows must match the noise dim");
  if (static_cast<int>(x.size()) != C.cols())
    throw DimensionError("likelihood_ratio_detect: x length must match C columns");
  if (F.rows() != m)
    throw DimensionError("likelihood_ratio_detect: F rows must match the noise dim");
  if (static_cast<int>(d.size()) != F.cols())
    throw DimensionError("likelihood_ratio_detect: d length must match F columns");
  if (N < 1) throw InvalidArgumentError("likelihood_ratio_detect: N >= 1 required");
  if (trials < 2)
    throw InvalidArgumentError("likelihood_ratio_detect: trials >= 2 required");
  if (!(fpr_target > 0.0 && fpr_target < 1.0))
    throw InvalidArgumentError(
        "likelihood_ratio_detect: fpr_target must lie in (0, 1)");
  for (double v : d)
    if (!std::isfinite(v))
      throw InvalidArgumentError("likelihood_ratio_detect: d must be finite");

  // The statistic depends on y only through y - Cx, so x and C cancel; they
  // are validated above to keep the protocol dimensions honest.
  Vec fd = matvec(F, d);
  double kl = sim_detail::shift_kl(mechanism, fd);

  Vec lam0, lam1;
  sim_detail::lambda_sums(mechanism, fd, N, trials, seed, lam0, lam1);

  Vec sorted = lam0;
  const long k = static_cast<long>(std::ceil(fpr_target * trials)) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
  const double tau = sorted[k];

  long below = 0, at = 0;
  for (double v : lam0) {
    if (v < tau) ++below;
    if (v == tau) ++at;
  }
  const long target_fp = k + 1;
  double rho = at > 0 ? static_cast<double>(target_fp - below) / at : 0.0;
  rho = std::clamp(rho, 0.0, 1.0);

  PhiloxRng tie_rng(seed, 2 * static_cast<std::uint64_t>(trials));
  auto detected = [&](double lambda) {
    if (lambda < tau) return true;
    if (lambda == tau) return tie_rng.uniform01() < rho;
    return false;
  };
  long fp = 0, fn = 0;
  for (double v : lam0) fp += detected(v) ? 1 : 0;
  for (double v : lam1) fn += detected(v) ? 0 : 1;

  const double fnr = static_cast<double>(fn) / trials;
  const double fpr = static_cast<double>(fp) / trials;
  return DetectionReport{
      N,
      kl,
      tau,
      fnr,
      fpr,
      trials,
      std::sqrt(fnr * (1.0 - fnr) / trials),
      std::sqrt(fpr * (1.0 - fpr) / trials),
      kl <= 0.0};
}

struct DecayFit {
  double rate;              // fitted d log(beta)/dN, negative when detectable
  double probit_slope;      // a in Qinv(beta_N) = a sqrt(N) + b
  double probit_intercept;  // b in the same fit
  int points_used;
};

/**
 * Exponential decay rate of the false-negative rate in N. The Gaussian
 * statistic gives Qinv(beta_N) = sqrt(2 KL N) + Qinv(1 - fpr) exactly under
 * the empirical-quantile threshold, so the fit runs in the probit domain
 * against sqrt(N) (a straight log-domain fit carries an O(sqrt(N)) boundary
 * bias that never vanishes on finite grids). Points need at least 50 expected
 * misses and beta <= 0.4 to enter; weights follow the delta method. The
 * reported rate is -a^2/2, the asymptotic log-slope of Q(a sqrt(N) + b).
 */
inline DecayFit detection_decay_fit(const NoiseMechanism& mechanism,
                                    const RectMatrix& C, const Vec& x,
                                    const RectMatrix& F, const Vec& d,
                                    const std::vector<long>& N_grid, long trials,
                                    double fpr_target, std::uint64_t seed) {
  if (N_grid.empty())
    throw InvalidArgumentError("detection_decay_fit: N grid must be nonempty");
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  int used = 0;
  for (std::size_t idx = 0; idx < N_grid.size(); ++idx) {
    std::uint64_t seed_n =
        seed + (static_cast<std::uint64_t>(idx) + 1) * 0x9e3779b97f4a7c15ull;
    DetectionReport rep = likelihood_ratio_detect(mechanism, C, x, F, d,
                                                  N_grid[idx], trials,
                                                  fpr_target, seed_n);
    double beta = rep.false_negative_rate;
    if (beta * trials < 50.0 || beta > 0.4) continue;
    double g = -normal_quantile(beta);  // upper-tail quantile of beta
    double pdf = normal_pdf(g);
    double var = beta * (1.0 - beta) / (trials * pdf * pdf);
    double w = 1.0 / var;
    double sx = std::sqrt(static_cast<double>(N_grid[idx]));
    sw += w;
    swx += w * sx;
    swy += w * g;
    swxx += w * sx * sx;
    swxy += w * sx * g;
    ++used;
  }
  if (used < 2)
    throw NumericalError(
        "detection_decay_fit: fewer than two N values produced a measurable "
        "false-negative rate; widen the N grid or increase trials");
  double denom = sw * swxx - swx * swx;
  double a = (sw * swxy - swx * swy) / denom;
  double b = (swxx * swy - swx * swxy) / denom;
  return DecayFit{-0.5 * a * a, a, b, used};
}

struct CramerRaoResult {
  double empirical_mse;
  double cr_bound;
  double standard_error;  // of the empirical mean
};

/**
 * Eavesdropper experiment: x_hat = C^{-1} y is unbiased, and the weighted MSE
 * E||Pi_x (x - x_hat)||^2 is compared against the information bound
 * Tr(Pi_x^T Pi_x I_x^+) with I_x = C^T I C. The estimator error equals
 * -Pi_x C^{-1} w, independent of x. Throws when the empirical mean
 * undershoots the bound by more than three standard errors.
 */
inline CramerRaoResult cramer_rao_experiment(const RectMatrix& C,
                                             const NoiseMechanism& mechanism,
                                             const RectMatrix& Pi_x, const Vec& x,
                                             long trials, std::uint64_t seed) {
  const int m = dim(mechanism);
  if (C.rows() != m || C.cols() != m)
    throw InvalidArgumentError(
        "cramer_rao_experiment: C must be square (unbiased inversion)");
  if (numerical_rank(C) < m)
    throw InvalidArgumentError("cramer_rao_experiment: C must be invertible");
  if (Pi_x.cols() != m)
    throw DimensionError("cramer_rao_experiment: Pi_x columns must match dim(x)");
  if (static_cast<int>(x.size()) != m)
    throw DimensionError("cramer_rao_experiment: x length must match C");
  if (trials < 2)
    throw InvalidArgumentError("cramer_rao_experiment: trials >= 2 required");

  RectMatrix A = matmul(Pi_x, pinv(C));
  std::vector<Vec> ws = sample(mechanism, trials, seed);
  double sum = 0.0, sumsq = 0.0;
  for (const Vec& w : ws) {
    Vec e = matvec(A, w);
    double q = dot(e, e);
    sum += q;
    sumsq += q * q;
  }
  double mean = sum / trials;
  double var = std::max(sumsq / trials - mean * mean, 0.0);
  double se = std::sqrt(var / trials);

  FisherMethod method = std::holds_alternative<GenericMechanism>(mechanism)
                            ? FisherMethod::monte_carlo
                            : FisherMethod::analytic;
  SymMatrix info = fisher_information(mechanism, method).matrix;
  SymMatrix info_x = congruence(info, C);
  double bound = trace_product(gram(Pi_x), pinv_psd(info_x));

  if (bound > 0.0 && mean < bound * (1.0 - 3.0 * se / bound))
    throw NumericalError(
        "cramer_rao_experiment: empirical MSE " + std::to_string(mean) +
        " undershoots the information bound " + std::to_string(bound) +
        " by more than three standard errors");
  return CramerRaoResult{mean, bound, se};
}

/**
 * One design per (eta, alpha) grid point. Infeasible points are flagged rows,
 * never dropped; a rank-deficient attack channel marks every point for which
 * the security floor is active rather than raising.
 */
inline std::vector<TradeoffRow> tradeoff_sweep(const ProblemSpec& base_spec,
                                               const std::vector<double>& alpha_grid,
                                               const std::vector<double>& eta_list,
                                               const DesignOptions& opts = {}) {
  if (alpha_grid.empty() || eta_list.empty())
    throw InvalidArgumentError("tradeoff_sweep: grids must be nonempty");
  validate_spec(base_spec);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<TradeoffRow> rows;
  rows.reserve(alpha_grid.size() * eta_list.size());
  for (double eta : eta_list) {
    for (double alpha : alpha_grid) {
      ProblemSpec spec = base_spec;
      spec.eta = eta;
      spec.alpha = alpha;
      try {
        DesignResult r = design(spec, opts);
        rows.push_back(TradeoffRow{alpha, eta, r.measures.privacy,
                                   r.measures.security, r.measures.quality,
                                   r.active_constraint, r.feasible});
      } catch (const InfeasibleError&) {
        rows.push_back(TradeoffRow{alpha, eta, nan, nan, nan,
                                   ActiveConstraint::security, false});
      }
    }
  }
  return rows;
}

/**
 * DP curve rows: alpha carries epsilon, eta carries the sensitivity, and
 * kl_unit_bias is the per-response KL at bias 1 (the Laplace closed form).
 */
inline std::vector<TradeoffRow> dp_tradeoff_sweep(
    const std::vector<double>& epsilon_grid, double delta,
    double attack_gain = 1.0) {
  if (epsilon_grid.empty())
    throw InvalidArgumentError("dp_tradeoff_sweep: epsilon grid must be nonempty");
  if (!(delta > 0.0))
    throw InvalidArgumentError("dp_tradeoff_sweep: sensitivity must be positive");
  std::vector<TradeoffRow> rows;
  rows.reserve(epsilon_grid.size());
  for (double eps : epsilon_grid) {
    if (!(eps > 0.0))
      throw InvalidArgumentError("dp_tradeoff_sweep: epsilon must be positive");
    DesignResult r = dp_design(DpSpec{eps, delta, 0.0}, attack_gain);
    TradeoffRow row{eps,
                    delta,
                    r.measures.privacy,
                    r.measures.security,
                    r.measures.quality,
                    r.active_constraint,
                    r.feasible};
    row.kl_unit_bias = kl_laplace_shift(delta / eps, 1.0);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace noiseforge
