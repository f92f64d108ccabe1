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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "helpers.hpp"
#include "noiseforge/designer.hpp"
#include "noiseforge/errors.hpp"
#include "noiseforge/matrix.hpp"
#include "noiseforge/mechanisms.hpp"

using namespace noiseforge;
using nf_test::frob_dist;

namespace {

ProblemSpec scalar_spec(double W, double F, double eta, double alpha) {
  return ProblemSpec{RectMatrix(1, 1, {1.0}), RectMatrix(1, 1, {F}),
                     SymMatrix(1, {W}), eta, alpha, std::nullopt};
}

const SymMatrix& covariance_of(const DesignResult& res) {
  return std::get<GaussianMechanism>(res.mechanism).covariance();
}

RectMatrix random_invertible(int dim, std::mt19937& gen) {
  SymMatrix spd = nf_test::random_pd_conditioned(dim, gen, 0.5, 2.5);
  RectMatrix Q = sym_eig(nf_test::random_sym(dim, gen)).eigenvectors;
  return matmul(spd.as_rect(), Q);
}

}  // namespace

TEST_CASE("quality-limited design per the closed form", "[designer]") {
  SECTION("W = I, F = I, eta = 2, alpha = 0.4 gives V = I") {
    ProblemSpec spec{RectMatrix::identity(2), RectMatrix::identity(2),
                     SymMatrix(2, {1.0, 0.0, 0.0, 1.0}), 2.0, 0.4, std::nullopt};
    auto res = design_quality_limited(spec);
    REQUIRE(res.has_value());
    CHECK(frob_dist(covariance_of(*res), SymMatrix(2, {1.0, 0.0, 0.0, 1.0})) <=
          1e-12);
    CHECK(res->active_constraint == ActiveConstraint::quality);
    CHECK(res->theorem_path == TheoremPath::thm1);
    CHECK(res->feasible);
    CHECK(res->measures.quality == Catch::Approx(2.0).margin(1e-12));
    CHECK(res->measures.privacy == Catch::Approx(0.5).margin(1e-12));
    CHECK(res->measures.security == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("scalar eta = 1, alpha = 0.4: V = 1, P = 1, S = 0.5") {
    auto res = design_quality_limited(scalar_spec(1.0, 1.0, 1.0, 0.4));
    REQUIRE(res.has_value());
    CHECK(covariance_of(*res)(0, 0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(res->measures.privacy == Catch::Approx(1.0).margin(1e-12));
    CHECK(res->measures.security == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("scalar eta = 1, alpha = 0.6: condition 1 < 1.2 fails") {
    CHECK_FALSE(design_quality_limited(scalar_spec(1.0, 1.0, 1.0, 0.6)).has_value());
  }
}

TEST_CASE("security-limited design through the SDP", "[designer]") {
  SECTION("scalar alpha = 0.5, eta = 4: V = 1") {
    auto res = design_security_limited(scalar_spec(1.0, 1.0, 4.0, 0.5));
    REQUIRE(res.has_value());
    CHECK(covariance_of(*res)(0, 0) == Catch::Approx(1.0).margin(1e-8));
    CHECK(res->active_constraint == ActiveConstraint::security);
    CHECK(res->theorem_path == TheoremPath::thm2);
    CHECK(res->measures.security == Catch::Approx(0.5).margin(1e-8));
    CHECK(res->measures.quality == Catch::Approx(1.0).margin(1e-8));
    CHECK(res->measures.privacy == Catch::Approx(1.0).margin(1e-8));
  }
  SECTION("F = I = W (m = 2), alpha = 1, eta = 4: V = 0.5 I") {
    ProblemSpec spec{RectMatrix::identity(2), RectMatrix::identity(2),
                     SymMatrix(2, {1.0, 0.0, 0.0, 1.0}), 4.0, 1.0, std::nullopt};
    auto res = design_security_limited(spec);
    REQUIRE(res.has_value());
    CHECK(frob_dist(covariance_of(*res), SymMatrix(2, {0.5, 0.0, 0.0, 0.5})) <=
          1e-8);
    CHECK(res->measures.security == Catch::Approx(1.0).margin(1e-8));
    CHECK(res->measures.quality == Catch::Approx(1.0).margin(1e-8));
    CHECK(res->measures.privacy == Catch::Approx(0.25).margin(1e-8));
  }
  SECTION("scalar alpha = 0.5, eta = 0.5: Tr(V) = 1 exceeds the budget") {
    CHECK_FALSE(design_security_limited(scalar_spec(1.0, 1.0, 0.5, 0.5)).has_value());
  }
  SECTION("alpha = 0 has nothing to bind") {
    CHECK_FALSE(design_security_limited(scalar_spec(1.0, 1.0, 1.0, 0.0)).has_value());
  }
}

TEST_CASE("dispatch picks the covered regime and reports otherwise", "[designer]") {
  SECTION("scalar eta = 1, alpha = 0.3 goes quality-limited") {
    DesignResult res = design(scalar_spec(1.0, 1.0, 1.0, 0.3));
    CHECK(res.theorem_path == TheoremPath::thm1);
    CHECK(res.feasible);
    CHECK(covariance_of(res)(0, 0) == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("scalar eta = 4, alpha = 0.5 goes security-limited") {
    DesignResult res = design(scalar_spec(1.0, 1.0, 4.0, 0.5));
    CHECK(res.theorem_path == TheoremPath::thm2);
    CHECK(res.feasible);
    CHECK(covariance_of(res)(0, 0) == Catch::Approx(1.0).margin(1e-8));
  }
  SECTION("scalar eta = 0.5, alpha = 2 is feasible via the SDP path") {
    DesignResult res = design(scalar_spec(1.0, 1.0, 0.5, 2.0));
    CHECK(res.theorem_path == TheoremPath::thm2);
    CHECK(res.feasible);
    CHECK(covariance_of(res)(0, 0) == Catch::Approx(0.25).margin(1e-8));
    CHECK(res.measures.quality == Catch::Approx(0.25).margin(1e-8));
    CHECK(res.measures.security == Catch::Approx(2.0).margin(1e-8));
    CHECK(res.measures.privacy == Catch::Approx(0.25).margin(1e-8));
  }
  SECTION("anisotropic W can reject both covered regimes") {
    // thm1 needs eta <= 2/3 here, thm2 needs eta >= 1; eta = 0.8 hits the gap
    // even though a design with both constraints active exists.
    ProblemSpec spec{RectMatrix::identity(2), RectMatrix::identity(2),
                     SymMatrix(2, {1.0, 0.0, 0.0, 9.0}), 0.8, 1.0, std::nullopt};
    DesignResult res = design(spec);
    CHECK_FALSE(res.feasible);
    CHECK(res.diagnostics.find("quality-limited condition fails") !=
          std::string::npos);
    CHECK(res.diagnostics.find("quality budget") != std::string::npos);
    CHECK(res.diagnostics.find("not covered") != std::string::npos);
    // The reported candidate saturates the quality budget.
    CHECK(res.measures.quality == Catch::Approx(0.8).margin(1e-9));
  }
  SECTION("alpha = 0 degenerates to the pure quality-limited problem") {
    ProblemSpec spec{RectMatrix::identity(2), RectMatrix(2, 1, {0.0, 0.0}),
                     SymMatrix(2, {1.0, 0.0, 0.0, 4.0}), 2.0, 0.0, std::nullopt};
    DesignResult res = design(spec);
    CHECK(res.feasible);
    CHECK(res.theorem_path == TheoremPath::thm1);
    CHECK(res.measures.quality == Catch::Approx(2.0).margin(1e-12));
  }
  SECTION("rank-deficient F with alpha > 0 propagates infeasibility") {
    ProblemSpec spec{RectMatrix::identity(2), RectMatrix(2, 1, {0.0, 0.0}),
                     SymMatrix(2, {1.0, 0.0, 0.0, 1.0}), 1.0, 0.5, std::nullopt};
    CHECK_THROWS_AS(design(spec), InfeasibleError);
  }
}

TEST_CASE("degenerate SDP optimum is regularized onto the quality budget",
          "[designer]") {
  // F = e1, alpha = 1: X* = 2 e1 e1^T is singular. With eta = 10 the smallest
  // delta with 1/delta + 1/(2 + delta) = 10 solves 10 d^2 + 18 d - 2 = 0.
  ProblemSpec spec{RectMatrix::identity(2), RectMatrix(2, 1, {1.0, 0.0}),
                   SymMatrix(2, {1.0, 0.0, 0.0, 1.0}), 10.0, 1.0, std::nullopt};
  double delta = (std::sqrt(404.0) - 18.0) / 20.0;

  SECTION("default path returns V = (X* + delta I)^{-1} with Tr(V) = eta") {
    auto res = design_security_limited(spec);
    REQUIRE(res.has_value());
    const SymMatrix& V = covariance_of(*res);
    CHECK(trace(V) == Catch::Approx(10.0).margin(1e-8));
    CHECK(V(0, 0) == Catch::Approx(1.0 / (2.0 + delta)).margin(1e-5));
    CHECK(V(1, 1) == Catch::Approx(1.0 / delta).margin(1e-4));
    CHECK(std::abs(V(0, 1)) <= 1e-5);
    CHECK(res->active_constraint == ActiveConstraint::both_reported);
    CHECK(res->feasible);
    CHECK(res->measures.quality == Catch::Approx(10.0).margin(1e-8));
    CHECK(res->measures.security >= 1.0 - 1e-9);
    CHECK(res->diagnostics.find("singular") != std::string::npos);
  }
  SECTION("dispatch lands on the same regularized design") {
    DesignResult res = design(spec);
    CHECK(res.theorem_path == TheoremPath::thm2);
    CHECK(res.measures.quality == Catch::Approx(10.0).margin(1e-8));
  }
  SECTION("strict mode throws and carries the singular optimum") {
    try {
      design_security_limited(spec, DesignOptions{false, true});
      FAIL("expected DegenerateOptimumError");
    } catch (const DegenerateOptimumError& e) {
      CHECK(e.x_star(0, 0) == Catch::Approx(2.0).margin(1e-5));
      CHECK(std::abs(e.x_star(1, 1)) <= 1e-5);
    }
  }
}

TEST_CASE("scalar shortcut agrees with the dispatch over a grid", "[designer]") {
  const double etas[] = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
  const double alphas[] = {0.05, 0.1, 0.3, 0.5, 1.0, 2.0};
  const double wf[][2] = {{1.0, 1.0}, {0.7, 1.3}};
  for (const auto& p : wf) {
    double W = p[0], F = p[1];
    for (double eta : etas)
      for (double alpha : alphas) {
        DesignResult full = design(scalar_spec(W, F, eta, alpha));
        DesignResult shortcut = design_scalar(W, F, eta, alpha);
        double v_full = covariance_of(full)(0, 0);
        double v_short = covariance_of(shortcut)(0, 0);
        INFO("W=" << W << " F=" << F << " eta=" << eta << " alpha=" << alpha);
        CHECK(shortcut.theorem_path == TheoremPath::cor1);
        CHECK(std::abs(v_full - v_short) <= 1e-9);
        if (std::abs(F * F - 2.0 * eta * alpha) > 1e-6)
          CHECK(full.active_constraint == shortcut.active_constraint);
      }
  }
}

TEST_CASE("scalar designs are optimal among admissible variances", "[designer]") {
  std::mt19937 gen(424242);
  std::uniform_real_distribution<double> uw(0.2, 3.0), uf(0.3, 2.0),
      ue(0.1, 4.0), ua(0.05, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    double W = uw(gen), F = uf(gen), eta = ue(gen), alpha = ua(gen);
    DesignResult res = design_scalar(W, F, eta, alpha);
    double v_star = covariance_of(res)(0, 0);
    double p_star = res.measures.privacy;
    double cap = F * F / (2.0 * alpha);
    double v_hi = 1.5 * std::max(eta, cap);
    for (int i = 1; i <= 400; ++i) {
      double v = v_hi * i / 400.0;
      bool admissible = v <= eta + 1e-12 && F * F / (2.0 * v) >= alpha - 1e-12;
      if (!admissible) continue;
      CHECK(v / W <= p_star + 1e-9);
      CHECK(v <= v_star + 1e-9);
    }
  }
}

TEST_CASE("printed scalar fallback differs by the recorded factor", "[designer]") {
  // eta = 4 > F^2/alpha = 2: literal fallback gives 1/alpha = 2, the
  // theorem-consistent form gives F^2/(2 alpha) = 1.
  DesignResult literal =
      design_scalar(1.0, 1.0, 4.0, 0.5, DesignOptions{true, false});
  CHECK(covariance_of(literal)(0, 0) == Catch::Approx(2.0).margin(1e-12));
  DesignResult consistent = design_scalar(1.0, 1.0, 4.0, 0.5);
  CHECK(covariance_of(consistent)(0, 0) == Catch::Approx(1.0).margin(1e-8));
  // Inside the quality branch the two conventions coincide.
  DesignResult same =
      design_scalar(1.0, 1.0, 1.0, 0.4, DesignOptions{true, false});
  CHECK(covariance_of(same)(0, 0) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("scalar edge cases", "[designer]") {
  SECTION("alpha = 0 returns V = eta") {
    DesignResult res = design_scalar(2.0, 1.0, 3.0, 0.0);
    CHECK(covariance_of(res)(0, 0) == Catch::Approx(3.0).margin(1e-12));
    CHECK(res.active_constraint == ActiveConstraint::quality);
  }
  SECTION("boundary eta = F^2/(2 alpha) reports both constraints") {
    DesignResult res = design_scalar(1.0, 1.0, 1.0, 0.5);
    CHECK(covariance_of(res)(0, 0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(res.active_constraint == ActiveConstraint::both_reported);
  }
  SECTION("F = 0 with a positive floor cannot be secured") {
    CHECK_THROWS_AS(design_scalar(1.0, 0.0, 1.0, 0.5), InfeasibleError);
    CHECK(covariance_of(design_scalar(1.0, 0.0, 1.0, 0.0))(0, 0) ==
          Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("validation") {
    CHECK_THROWS_AS(design_scalar(0.0, 1.0, 1.0, 0.5), InvalidArgumentError);
    CHECK_THROWS_AS(design_scalar(1.0, 1.0, 0.0, 0.5), InvalidArgumentError);
    CHECK_THROWS_AS(design_scalar(1.0, 1.0, 1.0, -0.1), InvalidArgumentError);
  }
}

TEST_CASE("feasible designs respect both constraints", "[designer]") {
  std::mt19937 gen(987);
  const double etas[] = {0.6, 2.5};
  const double alphas[] = {0.25, 1.2};
  int feasible_seen = 0;
  for (int rep = 0; rep < 9; ++rep) {
    int m = 1 + rep % 3;
    SymMatrix W = nf_test::random_pd_conditioned(m, gen, 0.3, 3.0);
    RectMatrix F = (rep % 2 == 0) ? random_invertible(m, gen)
                                  : nf_test::random_rect(m, 1, gen);
    for (double eta : etas)
      for (double alpha : alphas) {
        ProblemSpec spec{RectMatrix::identity(m), F, W, eta, alpha, std::nullopt};
        DesignResult res = design(spec);
        INFO("m=" << m << " rep=" << rep << " eta=" << eta << " alpha=" << alpha
                  << " path=" << to_string(res.theorem_path));
        if (!res.feasible) {
          CHECK_FALSE(res.diagnostics.empty());
          continue;
        }
        ++feasible_seen;
        CHECK(res.measures.quality <= eta + 1e-8);
        CHECK(res.measures.security >= alpha - 1e-8);
        CHECK(res.measures.privacy > 0.0);
      }
  }
  CHECK(feasible_seen >= 12);
}

TEST_CASE("the two regimes meet at the applicability boundary", "[designer]") {
  // With F = sqrt(c) W^{1/4} Q (Q orthogonal), F^T W^{-1/2} F = c I, and at
  // eta = c Tr(W^{1/2}) / (2 alpha) both paths produce V = c W^{1/2}/(2 alpha).
  std::mt19937 gen(31415);
  for (int dim = 2; dim <= 3; ++dim) {
    SymMatrix W = nf_test::random_pd_conditioned(dim, gen, 0.5, 3.0);
    RectMatrix Q = sym_eig(nf_test::random_sym(dim, gen)).eigenvectors;
    const double c = 0.8, alpha = 0.7;
    SymMatrix A = sqrt_psd(sym_scale(sqrt_psd(W), c));
    RectMatrix F = matmul(A.as_rect(), Q);
    double eta_b = c * trace(sqrt_psd(W)) / (2.0 * alpha);

    ProblemSpec below{RectMatrix::identity(dim), F, W, eta_b * (1.0 - 1e-8),
                      alpha, std::nullopt};
    ProblemSpec above{RectMatrix::identity(dim), F, W, eta_b * (1.0 + 1e-8),
                      alpha, std::nullopt};
    auto quality_side = design_quality_limited(below);
    auto security_side = design_security_limited(above);
    REQUIRE(quality_side.has_value());
    REQUIRE(security_side.has_value());
    CHECK(frob_dist(covariance_of(*quality_side), covariance_of(*security_side)) <=
          1e-6);

    DesignResult at_boundary =
        design(ProblemSpec{RectMatrix::identity(dim), F, W, eta_b, alpha,
                           std::nullopt});
    CHECK(at_boundary.feasible);
    CHECK(frob_dist(covariance_of(at_boundary), covariance_of(*quality_side)) <=
          1e-6);
  }
}

TEST_CASE("privacy weight from the estimation target", "[designer]") {
  SECTION("identity projection and query give the identity weight") {
    bool pd = false;
    SymMatrix W = weight_from_estimation_target(RectMatrix::identity(2),
                                                RectMatrix::identity(2), false, &pd);
    CHECK(frob_dist(W, SymMatrix(2, {1.0, 0.0, 0.0, 1.0})) <= 1e-12);
    CHECK(pd);
  }
  SECTION("worst case is C C^T") {
    bool pd = false;
    SymMatrix W = weight_from_estimation_target(RectMatrix(1, 2),
                                                RectMatrix(1, 2, {1.0, 2.0}), true,
                                                &pd);
    CHECK(W(0, 0) == Catch::Approx(5.0).margin(1e-12));
    CHECK(pd);
  }
  SECTION("rank-deficient target flags a merely PSD weight") {
    bool pd = true;
    SymMatrix W = weight_from_estimation_target(
        RectMatrix(2, 2, {1.0, 0.0, 0.0, 0.0}), RectMatrix::identity(2), false,
        &pd);
    CHECK(frob_dist(W, SymMatrix(2, {1.0, 0.0, 0.0, 0.0})) <= 1e-12);
    CHECK_FALSE(pd);
  }
  SECTION("state dimensions must agree") {
    CHECK_THROWS_AS(weight_from_estimation_target(RectMatrix::identity(3),
                                                  RectMatrix::identity(2), false),
                    DimensionError);
  }
}

TEST_CASE("query sensitivity over the domain box", "[designer]") {
  SECTION("averaging two entries of the unit box") {
    CHECK(sensitivity(RectMatrix(1, 2, {0.5, 0.5}),
                      DomainBox{{0.0, 0.0}, {1.0, 1.0}}) ==
          Catch::Approx(0.5).margin(1e-15));
  }
  SECTION("scalar hand value") {
    CHECK(sensitivity(RectMatrix(1, 1, {3.0}), DomainBox{{0.0}, {2.0}}) ==
          Catch::Approx(6.0).margin(1e-15));
  }
  SECTION("zero-width box is degenerate") {
    CHECK(sensitivity(RectMatrix(1, 2, {1.0, 4.0}),
                      DomainBox{{1.0, 2.0}, {1.0, 2.0}}) == 0.0);
  }
  SECTION("unbounded or malformed boxes are rejected") {
    double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(
        sensitivity(RectMatrix(1, 1, {1.0}), DomainBox{{0.0}, {inf}}),
        UnboundedSensitivityError);
    CHECK_THROWS_AS(
        sensitivity(RectMatrix(1, 1, {1.0}), DomainBox{{2.0}, {1.0}}),
        InvalidArgumentError);
    CHECK_THROWS_AS(
        sensitivity(RectMatrix(2, 1, {1.0, 1.0}), DomainBox{{0.0}, {1.0}}),
        DimensionError);
    CHECK_THROWS_AS(sensitivity(RectMatrix(1, 2, {1.0, 1.0}),
                                DomainBox{{0.0}, {1.0}}),
                    DimensionError);
  }
}

TEST_CASE("differentially private Laplace design", "[designer]") {
  SECTION("Delta = 1, eps = 1, alpha = 0.5 sits exactly on the floor") {
    DesignResult res = dp_design(DpSpec{1.0, 1.0, 0.5});
    CHECK(res.feasible);
    CHECK(res.theorem_path == TheoremPath::dp);
    CHECK(res.active_constraint == ActiveConstraint::security);
    const auto& lap = std::get<LaplaceMechanism>(res.mechanism);
    CHECK(lap.scale() == Catch::Approx(1.0).margin(1e-15));
    CHECK(res.measures.security == Catch::Approx(0.5).margin(1e-12));
    CHECK(res.measures.quality == Catch::Approx(2.0).margin(1e-12));
    CHECK(res.measures.privacy == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("eps below the minimum is reported with the admissible value") {
    DesignResult res = dp_design(DpSpec{0.5, 1.0, 0.5});
    CHECK_FALSE(res.feasible);
    CHECK(std::get<LaplaceMechanism>(res.mechanism).scale() ==
          Catch::Approx(2.0).margin(1e-15));
    CHECK(res.measures.security == Catch::Approx(0.125).margin(1e-12));
    CHECK(res.diagnostics.find("minimal admissible") != std::string::npos);
    CHECK(res.diagnostics.find("1") != std::string::npos);
  }
  SECTION("the density ratio honors the privacy budget pointwise") {
    // Delta = 2, eps = 4: b = 0.5 and the ratio never exceeds exp(4).
    DesignResult res = dp_design(DpSpec{4.0, 2.0, 1.0});
    CHECK(res.feasible);
    const double delta = 2.0, eps = 4.0;
    double worst = 0.0;
    for (int i = -320; i <= 320; ++i) {
      double y = 0.025 * i;
      for (double shift : {delta, -delta}) {
        double log_ratio =
            log_density(res.mechanism, Vec{y - shift}) -
            log_density(res.mechanism, Vec{y});
        worst = std::max(worst, log_ratio);
      }
    }
    CHECK(worst <= eps + 1e-12);
    CHECK(worst == Catch::Approx(eps).margin(1e-12));  // the bound is tight
  }
  SECTION("validation") {
    CHECK_THROWS_AS(dp_design(DpSpec{0.0, 1.0, 0.5}), InvalidArgumentError);
    CHECK_THROWS_AS(dp_design(DpSpec{1.0, 0.0, 0.5}), InvalidArgumentError);
    CHECK_THROWS_AS(dp_design(DpSpec{1.0, 1.0, -1.0}), InvalidArgumentError);
    CHECK_THROWS_AS(dp_design(DpSpec{1.0, 1.0, 0.5}, 0.0), InvalidArgumentError);
  }
}

TEST_CASE("spec validation names the violated assumption", "[designer]") {
  SymMatrix W2(2, {1.0, 0.0, 0.0, 1.0});
  SECTION("W must be PD") {
    ProblemSpec spec{RectMatrix::identity(2), RectMatrix::identity(2),
                     SymMatrix(2, {1.0, 0.0, 0.0, 0.0}), 1.0, 0.5, std::nullopt};
    CHECK_THROWS_AS(design(spec), NotPsdError);
  }
  SECTION("C must have full row rank") {
    ProblemSpec spec{RectMatrix(2, 2, {1.0, 2.0, 2.0, 4.0}),
                     RectMatrix::identity(2), W2, 1.0, 0.5, std::nullopt};
    CHECK_THROWS_WITH(design(spec), Catch::Matchers::ContainsSubstring("row rank"));
  }
  SECTION("dimension mismatches") {
    CHECK_THROWS_AS(design(ProblemSpec{RectMatrix::identity(3),
                                       RectMatrix::identity(2), W2, 1.0, 0.5,
                                       std::nullopt}),
                    DimensionError);
    CHECK_THROWS_AS(design(ProblemSpec{RectMatrix::identity(2),
                                       RectMatrix(3, 1), W2, 1.0, 0.5,
                                       std::nullopt}),
                    DimensionError);
  }
  SECTION("budget and floor signs") {
    CHECK_THROWS_AS(design(ProblemSpec{RectMatrix::identity(2),
                                       RectMatrix::identity(2), W2, 0.0, 0.5,
                                       std::nullopt}),
                    InvalidArgumentError);
    CHECK_THROWS_AS(design(ProblemSpec{RectMatrix::identity(2),
                                       RectMatrix::identity(2), W2, 1.0, -0.5,
                                       std::nullopt}),
                    InvalidArgumentError);
  }
  SECTION("domain box shape") {
    ProblemSpec spec{RectMatrix::identity(2), RectMatrix::identity(2), W2, 1.0,
                     0.5, DomainBox{{0.0}, {1.0}}};
    CHECK_THROWS_AS(design(spec), DimensionError);
    ProblemSpec flipped{RectMatrix::identity(2), RectMatrix::identity(2), W2,
                        1.0, 0.5, DomainBox{{0.0, 2.0}, {1.0, 1.0}}};
    CHECK_THROWS_AS(design(flipped), InvalidArgumentError);
  }
}
