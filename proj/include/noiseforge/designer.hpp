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

// Noise designers: pick the response-noise distribution that maximizes the
// privacy measure P subject to a quality budget Q <= eta and a security floor
// S >= alpha, plus the differentially private Laplace variant for scalar
// queries over a bounded domain.
//
// Two covered regimes for the Gaussian problem:
//   - quality-limited: V = eta W^{1/2} / Tr(W^{1/2}), applicable when
//     Tr(W^{1/2}) lambda_min(F^T W^{-1/2} F) >= 2 eta alpha;
//   - security-limited: V = X*^{-1} from the semidefinite program
//     min Tr(WX) s.t. F^T X F >= 2 alpha I, applicable when Tr(V) <= eta.
// The dispatcher tries them in that order. When the SDP optimum is singular
// (fewer attack columns than noise channels) the inverse does not exist; the
// default policy returns V = (X* + delta I)^{-1} with the smallest delta that
// respects the quality budget, which keeps a proper density.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "noiseforge/errors.hpp"
#include "noiseforge/matrix.hpp"
#include "noiseforge/mechanisms.hpp"
#include "noiseforge/metrics.hpp"
#include "noiseforge/sdp.hpp"

namespace noiseforge {

struct DomainBox {
  Vec lower;
  Vec upper;
};

struct ProblemSpec {
  RectMatrix C;  // m x n response map, full row rank
  RectMatrix F;  // m x p attack channel (identity when the spec omits it)
  SymMatrix W;   // m x m PD privacy weight
  double eta;    // quality budget, E||w||^2 <= eta
  double alpha;  // security floor, S >= alpha; 0 disables the constraint
  std::optional<DomainBox> domain_box;
};

enum class ActiveConstraint { quality, security, both_reported };
enum class TheoremPath { thm1, thm2, cor1, dp };

inline const char* to_string(ActiveConstraint a) {
  switch (a) {
    case ActiveConstraint::quality: return "quality";
    case ActiveConstraint::security: return "security";
    default: return "both-reported";
  }
}

inline const char* to_string(TheoremPath p) {
  switch (p) {
    case TheoremPath::thm1: return "thm1";
    case TheoremPath::thm2: return "thm2";
    case TheoremPath::cor1: return "cor1";
    default: return "dp";
  }
}

struct DesignResult {
  NoiseMechanism mechanism;
  ActiveConstraint active_constraint;
  MeasureTriple measures;
  TheoremPath theorem_path;
  bool feasible;
  std::string diagnostics;
};

struct DpSpec {
  double epsilon;            // differential-privacy budget
  double delta_sensitivity;  // query sensitivity over the domain box
  double alpha;              // security floor
};

struct DesignOptions {
  // Reproduce the printed scalar fallback V = 1/alpha instead of the
  // theorem-consistent lambda_min(F^T F)/(2 alpha); for figure comparison.
  bool corollary_literal = false;
  // Throw DegenerateOptimumError instead of regularizing a singular X*.
  bool strict_degenerate = false;
};

/** Raised in strict mode when the SDP optimum has no inverse. */
struct DegenerateOptimumError : Error {
  SymMatrix x_star;
  DegenerateOptimumError(const std::string& msg, SymMatrix X)
      : Error(msg), x_star(std::move(X)) {}
};

inline void validate_spec(const ProblemSpec& spec) {
  const int m = spec.W.dim();
  if (spec.C.rows() != m)
    throw DimensionError("ProblemSpec: C must have one row per response channel");
  if (spec.F.rows() != m)
    throw DimensionError("ProblemSpec: F must have one row per response channel");
  if (!(spec.eta > 0.0))
    throw InvalidArgumentError("ProblemSpec: eta must be positive");
  if (!(spec.alpha >= 0.0))
    throw InvalidArgumentError("ProblemSpec: alpha must be nonnegative");
  if (!is_positive_definite(spec.W))
    throw NotPsdError("ProblemSpec: W must be positive definite",
                      lambda_min(spec.W));
  if (!has_full_row_rank(spec.C))
    throw InvalidArgumentError(
        "ProblemSpec: C must have full row rank (the privacy weight derivation "
        "and the estimation model assume a surjective response map)");
  if (spec.domain_box) {
    const auto& box = *spec.domain_box;
    if (static_cast<int>(box.lower.size()) != spec.C.cols() ||
        static_cast<int>(box.upper.size()) != spec.C.cols())
      throw DimensionError("ProblemSpec: domain_box must bound every x coordinate");
    for (std::size_t j = 0; j < box.lower.size(); ++j)
      if (box.lower[j] > box.upper[j])
        throw InvalidArgumentError("ProblemSpec: domain_box has lower > upper");
  }
}

namespace designer_detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

inline MeasureTriple gaussian_measures(const SymMatrix& V, const SymMatrix& W,
                                       const RectMatrix& F) {
  NoiseMechanism mech = GaussianMechanism(V);
  return {privacy(mech, W), quality(mech), security(mech, F)};
}

inline std::optional<DesignResult> try_quality_limited(const ProblemSpec& spec,
                                                       std::string* why) {
  SymMatrix Wsqrt = sqrt_psd(spec.W);
  double trw = trace(Wsqrt);
  SymMatrix Winv_half = inverse_spd(Wsqrt);
  double lmin = lambda_min(congruence(Winv_half, spec.F));
  double lhs = trw * lmin;
  double rhs = 2.0 * spec.eta * spec.alpha;
  if (lhs < rhs) {
    if (why)
      *why = "quality-limited condition fails: Tr(W^{1/2}) lambda_min(F^T "
             "W^{-1/2} F) = " +
             fmt(lhs) + " < 2 eta alpha = " + fmt(rhs);
    return std::nullopt;
  }
  SymMatrix V = sym_scale(Wsqrt, spec.eta / trw);
  DesignResult res{GaussianMechanism(V),
                   ActiveConstraint::quality,
                   gaussian_measures(V, spec.W, spec.F),
                   TheoremPath::thm1,
                   true,
                   "quality budget binds: Tr(V) = eta"};
  return res;
}

// Smallest delta >= 0 with sum_i 1/(x_i + delta) <= eta; the sum is strictly
// decreasing in delta and <= eta at delta = m/eta, so bisection always lands.
inline double smallest_trace_delta(const Vec& x, double eta) {
  auto trace_inv = [&](double delta) {
    double s = 0.0;
    for (double xi : x) s += 1.0 / (xi + delta);
    return s;
  };
  double lo = 0.0;
  bool lo_valid = true;
  for (double xi : x)
    if (xi <= 0.0) lo_valid = false;
  if (lo_valid && trace_inv(0.0) <= eta) return 0.0;
  double hi = static_cast<double>(x.size()) / eta;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (trace_inv(mid) > eta)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

inline std::optional<DesignResult> try_security_limited(const ProblemSpec& spec,
                                                        const DesignOptions& opts,
                                                        std::string* why) {
  if (spec.alpha == 0.0) {
    if (why)
      *why = "security constraint is vacuous at alpha = 0; the quality-limited "
             "design applies";
    return std::nullopt;
  }
  // Tighter than the solver default: path consistency with the scalar
  // shortcut is asserted at 1e-9, which a 1e-8 duality gap cannot guarantee.
  SdpSolution sol = solve(SdpProblem{spec.W, spec.F, spec.alpha}, 1e-10);
  EigResult e = sym_eig(sol.X_star);
  double lmin_x = e.eigenvalues.front();
  double lmax_x = e.eigenvalues.back();

  if (lmin_x > 1e-6 * std::max(1.0, lmax_x)) {
    SymMatrix V = inverse_spd(sol.X_star);
    double trv = trace(V);
    if (trv > spec.eta * (1.0 + 1e-9) + 1e-12) {
      if (why)
        *why = "security-limited design violates the quality budget: Tr(X*^{-1}) "
               "= " +
               fmt(trv) + " > eta = " + fmt(spec.eta);
      return std::nullopt;
    }
    DesignResult res{GaussianMechanism(V),
                     ActiveConstraint::security,
                     gaussian_measures(V, spec.W, spec.F),
                     TheoremPath::thm2,
                     true,
                     "security floor binds: lambda_min(F^T V^{-1} F) = 2 alpha "
                     "(SDP certificate " +
                         fmt(sol.certificate) + ", gap estimate " +
                         fmt(sol.duality_gap_estimate) + ")"};
    return res;
  }

  // Singular optimum: noise mass concentrates in the attacked directions and
  // X*^{-1} does not exist.
  if (opts.strict_degenerate)
    throw DegenerateOptimumError(
        "design_security_limited: SDP optimum is singular (lambda_min = " +
            fmt(lmin_x) + "); no inverse covariance exists",
        sol.X_star);
  Vec clamped = e.eigenvalues;
  for (double& v : clamped) v = std::max(v, 0.0);
  double delta = smallest_trace_delta(clamped, spec.eta);
  Vec inv_eigs(clamped.size());
  for (std::size_t i = 0; i < clamped.size(); ++i)
    inv_eigs[i] = 1.0 / (clamped[i] + delta);
  SymMatrix V = assemble_from_eig(e, inv_eigs);
  DesignResult res{GaussianMechanism(V),
                   ActiveConstraint::both_reported,
                   gaussian_measures(V, spec.W, spec.F),
                   TheoremPath::thm2,
                   true,
                   "SDP optimum is singular (lambda_min(X*) = " + fmt(lmin_x) +
                       "); returned V = (X* + delta I)^{-1} with delta = " +
                       fmt(delta) +
                       " chosen as the smallest value meeting the quality "
                       "budget, so Tr(V) = eta while the security floor holds "
                       "with regularization slack"};
  return res;
}

}  // namespace designer_detail

/** Quality-limited design, or nothing when its applicability condition fails. */
inline std::optional<DesignResult> design_quality_limited(const ProblemSpec& spec) {
  validate_spec(spec);
  return designer_detail::try_quality_limited(spec, nullptr);
}

/**
 * Security-limited design through the semidefinite program, or nothing when
 * the minimum-cost secure covariance exceeds the quality budget (or when
 * alpha = 0 and there is no security constraint to bind).
 */
inline std::optional<DesignResult> design_security_limited(
    const ProblemSpec& spec, const DesignOptions& opts = {}) {
  validate_spec(spec);
  return designer_detail::try_security_limited(spec, opts, nullptr);
}

inline DesignResult design_scalar(double W, double F, double eta, double alpha,
                                  const DesignOptions& opts);

/**
 * Full dispatch: quality-limited when applicable, else security-limited, else
 * an infeasible report carrying both rejection reasons. The not-covered case
 * (both constraints active with m > 1) is reported, not asserted infeasible.
 */
inline DesignResult design(const ProblemSpec& spec, const DesignOptions& opts = {}) {
  validate_spec(spec);
  // The literal-corollary convention only exists for the scalar problem; route
  // through the shortcut so the flag can change the security-active branch.
  if (opts.corollary_literal && spec.W.dim() == 1 && spec.F.cols() == 1)
    return design_scalar(spec.W(0, 0), spec.F(0, 0), spec.eta, spec.alpha, opts);
  std::string why_q, why_s;
  if (auto r = designer_detail::try_quality_limited(spec, &why_q)) return *r;
  if (auto r = designer_detail::try_security_limited(spec, opts, &why_s)) return *r;

  // Neither covered regime applies. Report the quality-saturating candidate
  // so callers can see how far it falls short of the security floor.
  SymMatrix Wsqrt = sqrt_psd(spec.W);
  SymMatrix V = sym_scale(Wsqrt, spec.eta / trace(Wsqrt));
  DesignResult res{GaussianMechanism(V),
                   ActiveConstraint::quality,
                   designer_detail::gaussian_measures(V, spec.W, spec.F),
                   TheoremPath::thm1,
                   false,
                   "no covered design applies: [" + why_q + "] and [" + why_s +
                       "]; a design with both constraints active may still "
                       "exist (not covered); the mechanism shown saturates the "
                       "quality budget for diagnosis only"};
  return res;
}

/**
 * Scalar (m = 1) shortcut. Theorem-consistent form: V = min(eta,
 * F^2 / (2 alpha)); the printed corollary (V = 1/alpha when eta >
 * F^2/alpha) is available behind DesignOptions::corollary_literal.
 */
inline DesignResult design_scalar(double W, double F, double eta, double alpha,
                                  const DesignOptions& opts = {}) {
  if (!(W > 0.0)) throw InvalidArgumentError("design_scalar: W must be positive");
  if (!(eta > 0.0))
    throw InvalidArgumentError("design_scalar: eta must be positive");
  if (!(alpha >= 0.0))
    throw InvalidArgumentError("design_scalar: alpha must be nonnegative");
  if (F == 0.0 && alpha > 0.0)
    throw InfeasibleError(
        "design_scalar: F = 0 makes S = 0 for every mechanism; the security "
        "floor cannot be met");

  double v;
  ActiveConstraint active;
  std::string note;
  if (alpha == 0.0) {
    v = eta;
    active = ActiveConstraint::quality;
    note = "security constraint vacuous at alpha = 0";
  } else if (opts.corollary_literal) {
    double threshold = F * F / alpha;
    if (eta <= threshold) {
      v = eta;
      active = ActiveConstraint::quality;
    } else {
      v = 1.0 / alpha;
      active = ActiveConstraint::security;
    }
    note = "printed corollary form (literal); the security measure of the "
           "fallback branch is alpha F^2 / 2, not alpha";
  } else {
    double sec_cap = F * F / (2.0 * alpha);
    v = std::min(eta, sec_cap);
    active = eta < sec_cap    ? ActiveConstraint::quality
             : eta > sec_cap ? ActiveConstraint::security
                             : ActiveConstraint::both_reported;
    note = "scalar design: V = min(eta, F^2/(2 alpha))";
  }

  SymMatrix V(1, {v});
  SymMatrix Wm(1, {W});
  RectMatrix Fm(1, 1, {F});
  DesignResult res{GaussianMechanism(V),
                   active,
                   designer_detail::gaussian_measures(V, Wm, Fm),
                   TheoremPath::cor1,
                   true,
                   note};
  return res;
}

/**
 * Privacy weight from an estimation target: W = C (Pi_x^T Pi_x)^+ C^T, or the
 * worst-case W = C C^T. The result can be merely PSD (e.g. a rank-deficient
 * target); *positive_definite reports which, and P uses it as a trace weight
 * either way.
 */
inline SymMatrix weight_from_estimation_target(const RectMatrix& Pi_x,
                                               const RectMatrix& C,
                                               bool worst_case,
                                               bool* positive_definite = nullptr) {
  SymMatrix W(1);
  if (worst_case) {
    W = outer_gram(C);
  } else {
    if (Pi_x.cols() != C.cols())
      throw DimensionError(
          "weight_from_estimation_target: Pi_x and C must share the state "
          "dimension");
    SymMatrix Gp = pinv_psd(gram(Pi_x));
    W = congruence(Gp, transpose(C));
  }
  if (positive_definite) *positive_definite = is_positive_definite(W);
  return W;
}

/**
 * Scalar query sensitivity over a box: max_j |C_1j| (ub_j - lb_j), the largest
 * response change a single participant can cause.
 */
inline double sensitivity(const RectMatrix& C, const DomainBox& box) {
  if (C.rows() != 1)
    throw DimensionError("sensitivity: defined for scalar queries (one row)");
  if (static_cast<int>(box.lower.size()) != C.cols() ||
      static_cast<int>(box.upper.size()) != C.cols())
    throw DimensionError("sensitivity: box must bound every x coordinate");
  double best = 0.0;
  for (int j = 0; j < C.cols(); ++j) {
    double lo = box.lower[j], hi = box.upper[j];
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw UnboundedSensitivityError(
          "sensitivity: domain box must be bounded in every coordinate");
    if (lo > hi)
      throw InvalidArgumentError("sensitivity: box has lower > upper");
    best = std::max(best, std::abs(C(0, j)) * (hi - lo));
  }
  return best;
}

/**
 * Differentially private scalar design: Laplace with scale b = Delta/epsilon.
 * Feasible against the security floor iff epsilon >= Delta sqrt(2 alpha)
 * (scaled by the attack gain when it is not 1). Measures use the unit weight
 * W = 1.
 */
inline DesignResult dp_design(const DpSpec& dp, double attack_gain = 1.0) {
  if (!(dp.epsilon > 0.0))
    throw InvalidArgumentError("dp_design: epsilon must be positive");
  if (!(dp.delta_sensitivity > 0.0))
    throw InvalidArgumentError(
        "dp_design: sensitivity must be positive (a zero-width domain box is "
        "degenerate: every response is independent of the data)");
  if (!(dp.alpha >= 0.0))
    throw InvalidArgumentError("dp_design: alpha must be nonnegative");
  if (!(attack_gain > 0.0))
    throw InvalidArgumentError("dp_design: attack gain must be positive");

  double b = dp.delta_sensitivity / dp.epsilon;
  NoiseMechanism mech = LaplaceMechanism(b);
  SymMatrix W1(1, {1.0});
  RectMatrix Fm(1, 1, {attack_gain});
  MeasureTriple measures{privacy(mech, W1), quality(mech), security(mech, Fm)};

  double min_eps =
      dp.delta_sensitivity * std::sqrt(2.0 * dp.alpha) / attack_gain;
  bool feasible = measures.security >= dp.alpha - 1e-12;
  std::string diag =
      feasible ? "Laplace scale b = Delta/epsilon meets the security floor"
               : "epsilon = " + designer_detail::fmt(dp.epsilon) +
                     " is below the minimal admissible value Delta sqrt(2 "
                     "alpha) = " +
                     designer_detail::fmt(min_eps) +
                     "; the returned mechanism still uses the requested epsilon";
  DesignResult res{std::move(mech), ActiveConstraint::security, measures,
                   TheoremPath::dp, feasible, std::move(diag)};
  return res;
}

}  // namespace noiseforge
