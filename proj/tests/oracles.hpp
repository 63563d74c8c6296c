// Copyright 2026 The SDA Authors.
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

// Independent numerical oracles for tests. Nothing here calls into the
// library's special functions or samplers, so expected values computed with
// these helpers do not share code paths with what they check.

#ifndef SDA_TESTS_ORACLES_HPP_
#define SDA_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace sda::testing {

// Tanh-sinh (double exponential) quadrature on [a, b]. Tolerates integrable
// endpoint singularities, which Beta densities with shape < 1 have.
inline double Integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-13) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  auto node = [&](double t, double& w, double& lo_dist) {
    const double s = 0.5 * std::numbers::pi * std::sinh(t);
    const double c = std::cosh(s);
    w = 0.5 * std::numbers::pi * std::cosh(t) / (c * c);
    // distance from the nearer endpoint in units of half, 1 - tanh(|s|)
    const double e = std::exp(-2.0 * std::fabs(s));
    lo_dist = 2.0 * e / (1.0 + e);
  };
  double h = 1.0;
  double prev = 0.0;
  double sum = 0.0;
  {
    double w, d;
    node(0.0, w, d);
    sum = w * f(mid);
  }
  for (int k = 1; k <= 4; ++k) {
    const double t = k * h;
    double w, d;
    node(t, w, d);
    const double xr = b - half * d, xl = a + half * d;
    if (xr < b && xr > a) sum += w * f(xr);
    if (xl > a && xl < b) sum += w * f(xl);
  }
  prev = sum * h * half;
  for (int level = 1; level <= 12; ++level) {
    h *= 0.5;
    for (double t = h; t <= 4.5; t += 2.0 * h) {
      double w, d;
      node(t, w, d);
      if (d == 0.0) break;
      const double xr = b - half * d, xl = a + half * d;
      if (xr < b && xr > a) sum += w * f(xr);
      if (xl > a && xl < b) sum += w * f(xl);
    }
    const double cur = sum * h * half;
    if (level >= 4 && std::fabs(cur - prev) <= tol * std::max(1.0, std::fabs(cur))) {
      return cur;
    }
    prev = cur;
  }
  return prev;
}

inline double CentralDiff(const std::function<double(double)>& f, double x,
                          double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// |a - b| relative to the larger magnitude, with an absolute floor.
inline double RelErr(double a, double b, double floor = 1e-12) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

// Beta density from elementary functions only (std::lgamma, not the
// library's).
inline double BetaDensity(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a - 1) * std::log(x) + (b - 1) * std::log1p(-x) +
                  std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b));
}

inline double GammaDensity(double x, double a) {
  if (x <= 0.0) return 0.0;
  return std::exp((a - 1) * std::log(x) - x - std::lgamma(a));
}

// Dirichlet log-density on the simplex from elementary functions.
inline double DirichletLogDensity(const std::vector<double>& z, const std::vector<double>& c) {
  double total = 0.0, out = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (z[i] <= 0.0) return -INFINITY;
    total += c[i];
    out += (c[i] - 1.0) * std::log(z[i]) - std::lgamma(c[i]);
  }
  return out + std::lgamma(total);
}

// Normalized std::gamma_distribution draws: Marsaglia-Tsang, independent of
// the library's inverse-CDF sampler.
template <typename Engine>
std::vector<double> DirichletDraw(const std::vector<double>& c, Engine& engine) {
  std::vector<double> g(c.size());
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    g[i] = std::gamma_distribution<double>(c[i], 1.0)(engine);
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

struct MeanStderr {
  double mean;
  double stderr_;
};

inline MeanStderr Summarize(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

}  // namespace sda::testing

#endif  // SDA_TESTS_ORACLES_HPP_
