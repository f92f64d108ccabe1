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
// Adaptive Gauss-Kronrod 15/7 quadrature in one and two dimensions.
// Node/weight tables and the error heuristic follow the classic QUADPACK
// dqk15 rule; adaptivity is global worst-interval bisection.

#ifndef NOISEFORGE_QUADRATURE_HPP
#define NOISEFORGE_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "noiseforge/errors.hpp"

namespace noiseforge {

struct QuadResult {
  double value;
  double error;  // estimated absolute error
};

namespace detail {

// Kronrod abscissae (positive half) and weights; Gauss weights for the
// embedded 7-point rule.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
QuadResult gk15_panel(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fv[15];
  double fc = f(center);
  fv[14] = fc;
  for (int i = 0; i < 7; ++i) {
    double x = half * kXgk[i];
    fv[2 * i] = f(center - x);
    fv[2 * i + 1] = f(center + x);
  }
  for (double v : fv)
    if (!std::isfinite(v))
      throw QuadratureDomainError("quadrature: integrand not finite on the domain");

  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  double resabs = std::abs(resk);
  for (int i = 0; i < 7; ++i) {
    double fsum = fv[2 * i] + fv[2 * i + 1];
    resk += kWgk[i] * fsum;
    resabs += kWgk[i] * (std::abs(fv[2 * i]) + std::abs(fv[2 * i + 1]));
    if (i % 2 == 1) resg += kWg[i / 2] * fsum;
  }
  double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int i = 0; i < 7; ++i)
    resasc += kWgk[i] * (std::abs(fv[2 * i] - mean) + std::abs(fv[2 * i + 1] - mean));

  double err = std::abs(resk - resg) * half;
  resasc *= half;
  resabs *= half;
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(err, 50.0 * eps * resabs);
  return {resk * half, err};
}

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace detail

/**
 * Adaptive integral of f over [a, b]; terminates when the summed error
 * estimate drops below max(epsabs, epsrel*|integral|). Optional breakpoints
 * split the initial interval at known kinks so the error estimate stays
 * honest for piecewise-smooth integrands.
 */
template <typename F>
QuadResult integrate(F&& f, double a, double b, double epsabs = 1e-12,
                     double epsrel = 1e-10, int max_panels = 4000,
                     const std::vector<double>* breakpoints = nullptr) {
  if (!(a < b)) {
    if (a == b) return {0.0, 0.0};
    throw InvalidArgumentError("integrate: requires a <= b");
  }
  std::vector<double> cuts{a, b};
  if (breakpoints)
    for (double c : *breakpoints)
      if (c > a && c < b) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());

  std::priority_queue<detail::Interval> heap;
  double total = 0.0, toterr = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i] == cuts[i + 1]) continue;
    QuadResult r = detail::gk15_panel(f, cuts[i], cuts[i + 1]);
    heap.push({cuts[i], cuts[i + 1], r.value, r.error});
    total += r.value;
    toterr += r.error;
  }

  int panels = static_cast<int>(heap.size());
  while (toterr > std::max(epsabs, epsrel * std::abs(total)) && panels < max_panels) {
    detail::Interval worst = heap.top();
    heap.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {  // interval at rounding resolution
      toterr -= worst.error;                 // cannot improve further
      continue;
    }
    QuadResult left = detail::gk15_panel(f, worst.a, mid);
    QuadResult right = detail::gk15_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    toterr += left.error + right.error - worst.error;
    heap.push({worst.a, mid, left.value, left.error});
    heap.push({mid, worst.b, right.value, right.error});
    ++panels;
  }
  return {total, toterr};
}

/**
 * Iterated 2-D integral over [ax,bx] x [ay,by]. The inner integral runs at a
 * tolerance one decade tighter so its error does not dominate the outer
 * estimate.
 */
template <typename F2>
QuadResult integrate_2d(F2&& f, double ax, double bx, double ay, double by,
                        double epsabs = 1e-12, double epsrel = 1e-10,
                        const std::vector<double>* x_breaks = nullptr,
                        const std::vector<double>* y_breaks = nullptr) {
  double width = std::max(bx - ax, 1e-300);
  double inner_epsabs = 0.1 * epsabs / width;
  double inner_epsrel = 0.1 * epsrel;
  auto outer = [&](double x) {
    auto inner = [&](double y) { return f(x, y); };
    return integrate(inner, ay, by, inner_epsabs, inner_epsrel, 4000, y_breaks).value;
  };
  return integrate(outer, ax, bx, epsabs, epsrel, 4000, x_breaks);
}

}  // namespace noiseforge

#endif  // NOISEFORGE_QUADRATURE_HPP
