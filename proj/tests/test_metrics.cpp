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
#include <numbers>

#include "helpers.hpp"
#include "noiseforge/metrics.hpp"

using namespace noiseforge;
using nf_test::make_gaussian_mixture;

TEST_CASE("analytic Fisher information", "[metrics]") {
  FisherEstimate fg = fisher_information(GaussianMechanism(SymMatrix::diagonal({2.0, 4.0})));
  CHECK(fg.matrix(0, 0) == Catch::Approx(0.5).margin(1e-12));
  CHECK(fg.matrix(1, 1) == Catch::Approx(0.25).margin(1e-12));
  CHECK(std::abs(fg.matrix(0, 1)) < 1e-12);
  CHECK(fg.method == FisherMethod::analytic);

  // b = Delta/eps with Delta = 1, eps = 2: Fisher = eps^2/Delta^2 = 4.
  FisherEstimate fl = fisher_information(LaplaceMechanism(0.5));
  CHECK(fl.matrix(0, 0) == Catch::Approx(4.0).margin(1e-12));

  CHECK_THROWS_AS(fisher_information(make_gaussian_mixture(1.0, 0.5)),
                  UnsupportedMethodError);
}

TEST_CASE("Monte Carlo Fisher matches quadrature for a mixture", "[metrics]") {
  NoiseMechanism mix = make_gaussian_mixture(1.0, 0.6);
  FisherEstimate mc =
      fisher_information(mix, FisherMethod::monte_carlo, 1000000, 2029);
  REQUIRE(mc.n_samples.has_value());
  REQUIRE(mc.entry_standard_errors.has_value());

  const auto& gm = std::get<GenericMechanism>(mix);
  double mean = gm.axis_mean()[0], sd = gm.axis_stddev()[0];
  auto integrand = [&](double w) {
    double s = gm.score({w})[0];
    return s * s * std::exp(gm.log_density({w}));
  };
  double iq = integrate(integrand, mean - 12 * sd, mean + 12 * sd, 1e-10, 1e-10).value;
  CHECK(std::abs(mc.matrix(0, 0) - iq) <= 3.0 * (*mc.entry_standard_errors)(0, 0));
}

TEST_CASE("Monte Carlo Fisher is consistent for random Gaussians", "[metrics]") {
  std::mt19937 gen(808);
  for (int d = 1; d <= 4; ++d) {
    SymMatrix V = nf_test::random_pd_conditioned(d, gen, 0.5, 2.5);
    NoiseMechanism mech = GaussianMechanism(V);
    FisherEstimate mc = fisher_information(mech, FisherMethod::monte_carlo, 1000000,
                                           9000 + static_cast<unsigned>(d));
    SymMatrix exact = inverse_spd(V);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double se = (*mc.entry_standard_errors)(i, j);
        INFO("dim " << d << " entry (" << i << "," << j << ")");
        CHECK(std::abs(mc.matrix(i, j) - exact(i, j)) <= 4.0 * std::max(se, 1e-12));
      }
  }
}

TEST_CASE("privacy closed forms and degenerate weight", "[metrics]") {
  CHECK(privacy(GaussianMechanism(SymMatrix::identity(2)), SymMatrix::identity(2)) ==
        Catch::Approx(0.5).margin(1e-14));
  // Scalar: P = V/W.
  CHECK(privacy(GaussianMechanism(SymMatrix::diagonal({0.7})), SymMatrix::diagonal({2.0})) ==
        Catch::Approx(0.35).margin(1e-14));
  CHECK(privacy(LaplaceMechanism(1.0), SymMatrix::diagonal({1.0})) ==
        Catch::Approx(1.0).margin(1e-14));
  CHECK_THROWS_AS(privacy(LaplaceMechanism(1.0), SymMatrix::diagonal({0.0})),
                  InvalidArgumentError);
}

TEST_CASE("quality closed forms and Monte Carlo", "[metrics]") {
  CHECK(quality(GaussianMechanism(SymMatrix::diagonal({1.0, 3.0}))) ==
        Catch::Approx(4.0).margin(1e-14));
  CHECK(quality(LaplaceMechanism(1.0)) == Catch::Approx(2.0).margin(1e-14));

  auto logdens = [](const Vec& w) {
    return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * w[0] * w[0];
  };
  auto sc = [](const Vec& w) -> Vec { return {-w[0]}; };
  auto sampler = [](PhiloxRng& rng) -> Vec { return {rng.normal()}; };
  NoiseMechanism gen_norm = GenericMechanism(1, logdens, sc, sampler);
  QualityEstimate qe = quality_estimate(gen_norm, 1000000, 31);
  REQUIRE(qe.standard_error.has_value());
  CHECK(std::abs(qe.value - 1.0) <= 3.0 * *qe.standard_error);
}

TEST_CASE("security closed forms", "[metrics]") {
  CHECK(security(GaussianMechanism(SymMatrix::identity(2)), RectMatrix::identity(2)) ==
        Catch::Approx(0.5).margin(1e-14));
  // Laplace b = Delta/eps, scalar F: S = lambda_min(F^T F) eps^2 / (2 Delta^2).
  double delta = 1.0, eps = 2.0, fval = 3.0;
  RectMatrix F(1, 1, {fval});
  CHECK(security(LaplaceMechanism(delta / eps), F) ==
        Catch::Approx(fval * fval * eps * eps / (2.0 * delta * delta)).margin(1e-12));
  // Scalar Gaussian: S = F^2 / (2 V).
  CHECK(security(GaussianMechanism(SymMatrix::diagonal({0.8})), RectMatrix(1, 1, {2.0})) ==
        Catch::Approx(4.0 / 1.6).margin(1e-12));
}

TEST_CASE("kl_gaussian_shift hand values", "[metrics]") {
  CHECK(kl_gaussian_shift(SymMatrix::diagonal({1.0}), {2.0}) ==
        Catch::Approx(2.0).margin(1e-14));
  CHECK(kl_gaussian_shift(SymMatrix::diagonal({3.0, 7.0}), {0.0, 0.0}) == 0.0);
  CHECK(kl_gaussian_shift(SymMatrix::diagonal({2.0, 2.0}), {1.0, 1.0}) ==
        Catch::Approx(0.5).margin(1e-14));
  CHECK_THROWS_AS(kl_gaussian_shift(SymMatrix::diagonal({1.0, 0.0}), {1.0, 1.0}),
                  NotPsdError);
}

TEST_CASE("kl_laplace_shift hand values and quadrature cross-check", "[metrics]") {
  CHECK(kl_laplace_shift(1.0, 0.0) == 0.0);
  CHECK(kl_laplace_shift(1.0, 1.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
  double closed = kl_laplace_shift(0.5, 1.0);
  double quad = kl_numeric(LaplaceMechanism(0.5), {1.0}).value;
  CHECK(std::abs(closed - quad) < 1e-8);
}

TEST_CASE("kl_numeric matches closed forms", "[metrics]") {
  CHECK(std::abs(kl_numeric(GaussianMechanism(SymMatrix::diagonal({1.0})), {1.0}).value -
                 0.5) < 1e-8);
  CHECK(std::abs(kl_numeric(LaplaceMechanism(1.0), {2.0}).value -
                 (std::exp(-2.0) + 1.0)) < 1e-8);
  CHECK(std::abs(kl_numeric(GaussianMechanism(SymMatrix::identity(2)), {0.0, 0.0}).value) <
        1e-10);

  SymMatrix V(2, {1.0, 0.3, 0.3, 0.7});
  Vec s{0.8, -0.4};
  CHECK(std::abs(kl_numeric(GaussianMechanism(V), s).value - kl_gaussian_shift(V, s)) <
        1e-8);
}

TEST_CASE("closed-form and quadrature KL agree over a shift grid", "[metrics]") {
  for (double s : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    CHECK(std::abs(kl_numeric(GaussianMechanism(SymMatrix::diagonal({1.3})), {s}).value -
                   kl_gaussian_shift(SymMatrix::diagonal({1.3}), {s})) < 1e-8);
    CHECK(std::abs(kl_numeric(LaplaceMechanism(0.8), {s}).value -
                   kl_laplace_shift(0.8, s)) < 1e-8);
  }
}

TEST_CASE("KL is nonnegative, zero at zero shift", "[metrics]") {
  NoiseMechanism mix = make_gaussian_mixture(0.8, 0.5);
  CHECK(std::abs(kl_numeric(mix, {0.0}).value) < 1e-10);
  for (double s : {0.2, 0.7, 1.5}) CHECK(kl_numeric(mix, {s}).value >= -1e-10);
}

TEST_CASE("kl_sensitivity_limit known limits", "[metrics]") {
  CHECK(kl_sensitivity_limit(GaussianMechanism(SymMatrix::identity(1)),
                             RectMatrix::identity(1)) == Catch::Approx(0.5).margin(1e-4));
  CHECK(kl_sensitivity_limit(LaplaceMechanism(1.0), RectMatrix(1, 1, {1.0})) ==
        Catch::Approx(0.5).margin(1e-3));
  CHECK(kl_sensitivity_limit(GaussianMechanism(SymMatrix::identity(1)),
                             RectMatrix(1, 1, {0.0})) == 0.0);
}

TEST_CASE("kl_sensitivity_limit agrees with the analytic security", "[metrics]") {
  std::mt19937 gen(4040);
  for (int rep = 0; rep < 3; ++rep) {
    SymMatrix V = nf_test::random_pd_conditioned(2, gen, 0.5, 2.0);
    RectMatrix F = nf_test::random_rect(2, 2, gen);
    NoiseMechanism mech = GaussianMechanism(V);
    double exact = security(mech, F);
    double numeric = kl_sensitivity_limit(mech, F);
    CHECK(std::abs(numeric - exact) <= 1e-3 * std::abs(exact));
  }
}

TEST_CASE("kl_sensitivity_limit flags an unstable limit", "[metrics]") {
  // At rho of order 1 the Laplace KL is far from its quadratic regime.
  CHECK_THROWS_AS(kl_sensitivity_limit(LaplaceMechanism(0.2), RectMatrix(1, 1, {1.0}),
                                       {1.0, 0.5}),
                  LimitUnstableError);
}

TEST_CASE("privacy-security product identity (m=1)", "[metrics]") {
  // Analytic path: P * S = lambda_min(F^T F) / (2 W) exactly.
  for (double V : {0.3, 1.0, 2.7}) {
    for (double W : {0.5, 1.0, 4.0}) {
      for (double f : {0.7, 1.0, 3.0}) {
        NoiseMechanism mech = GaussianMechanism(SymMatrix::diagonal({V}));
        double p = privacy(mech, SymMatrix::diagonal({W}));
        double s = security(mech, RectMatrix(1, 1, {f}));
        CHECK(p * s == Catch::Approx(f * f / (2.0 * W)).epsilon(1e-12));
      }
    }
  }
  {
    NoiseMechanism mech = LaplaceMechanism(0.6);
    double p = privacy(mech, SymMatrix::diagonal({2.0}));
    double s = security(mech, RectMatrix(1, 1, {1.5}));
    CHECK(p * s == Catch::Approx(1.5 * 1.5 / (2.0 * 2.0)).epsilon(1e-12));
  }

  // Sampled path with independent Fisher estimates: within Monte Carlo error.
  NoiseMechanism mix = make_gaussian_mixture(1.0, 0.6);
  SymMatrix W = SymMatrix::diagonal({1.3});
  RectMatrix F(1, 1, {0.9});
  FisherEstimate f1 = fisher_information(mix, FisherMethod::monte_carlo, 1000000, 111);
  FisherEstimate f2 = fisher_information(mix, FisherMethod::monte_carlo, 1000000, 222);
  double prod = privacy_from_fisher(f1, W) * security_from_fisher(f2, F);
  CHECK(prod == Catch::Approx(0.9 * 0.9 / (2.0 * 1.3)).epsilon(0.02));
}
