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

#include "sda/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "sda/error.hpp"

namespace sda::special {
namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxSeries = 100000;
constexpr int kMaxSolve = 200;
// log(1e-12): below this Gamma quantiles are taken from the leading term.
constexpr double kLogTinyQuantile = -27.631021115928547;

void CheckPositive(double x, const char* fn, const char* arg) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << fn << ": " << arg << " must be positive and finite, got " << x;
    Fail(ErrorCode::kInvalidArgument, os.str());
  }
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double BetaContinuedFraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxSeries; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  std::ostringstream os;
  os << "RegIncBeta: continued fraction did not converge for a=" << a
     << " b=" << b << " x=" << x;
  Fail(ErrorCode::kConvergence, os.str());
}

double GammaSeries(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxSeries; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - Lgamma(a));
    }
  }
  Fail(ErrorCode::kConvergence, "RegIncGamma: series did not converge");
}

// Upper incomplete gamma Q(a, x) by continued fraction, for x >= a + 1.
double GammaContinuedFraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxSeries; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - Lgamma(a)) * h;
    }
  }
  Fail(ErrorCode::kConvergence,
       "RegIncGamma: continued fraction did not converge");
}

// Safeguarded Newton solve of cdf(x) = u on the bracket [lo, hi]. Steps that
// leave the bracket are retried in log space (exact for power-law tails) and
// otherwise replaced by bisection.
template <typename Cdf, typename Pdf>
double SolveCdf(double u, double lo, double hi, double x, Cdf cdf, Pdf pdf,
                const std::string& what) {
  double last_f = 0.0;
  for (int it = 0; it < kMaxSolve; ++it) {
    const double fx = cdf(x);
    const double f = fx - u;
    last_f = f;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double p = pdf(x);
    double next = std::numeric_limits<double>::quiet_NaN();
    if (p > 0.0 && std::isfinite(p)) next = x - f / p;
    if (!(next > lo && next < hi) && fx > 0.0 && p > 0.0 &&
        std::isfinite(p)) {
      next = x * std::exp(-(std::log(fx) - std::log(u)) * fx / (x * p));
    }
    if (!(next > lo && next < hi)) {
      if (lo > 0.0 && hi / lo > 16.0) {
        next = std::sqrt(lo * hi);
      } else if (lo == 0.0) {
        next = hi * 1e-3;
      } else {
        next = 0.5 * (lo + hi);
      }
    }
    const double step = std::fabs(next - x);
    x = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * x ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      const double residual = std::fabs(cdf(x) - u);
      if (residual <= 1e-10) return x;
      std::ostringstream os;
      os << what << ": bracket collapsed at x=" << x
         << " with residual " << residual;
      Fail(ErrorCode::kConvergence, os.str());
    }
  }
  std::ostringstream os;
  os << what << ": no convergence in " << kMaxSolve
     << " iterations; last x=" << x << " residual=" << last_f
     << " bracket=[" << lo << ", " << hi << "]";
  Fail(ErrorCode::kConvergence, os.str());
}

double PickBest(double u, std::initializer_list<double> candidates,
                const auto& cdf) {
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_err = std::numeric_limits<double>::infinity();
  for (double c : candidates) {
    if (!(c > 0.0) || !std::isfinite(c)) continue;
    const double err = std::fabs(cdf(c) - u);
    if (err < best_err) {
      best_err = err;
      best = c;
    }
  }
  return best;
}

BetaShapeDerivs BetaSeriesDerivs(double x, double a, double b) {
  const double lx = std::log(x);
  const double l1x = std::log1p(-x);
  const double psi_ab = Digamma(a + b);
  double ga = lx - 1.0 / a - Digamma(a) + psi_ab;
  double gb = l1x - Digamma(b) + psi_ab;
  double t = std::exp(a * lx + b * l1x - std::log(a) - LogBeta(a, b));
  double sum = t;
  double da = t * ga;
  double db = t * gb;
  if (t == 0.0) return {0.0, 0.0};
  for (int n = 0; n < kMaxSeries; ++n) {
    const double ratio = (a + b + n) / (a + 1.0 + n) * x;
    ga += 1.0 / (a + b + n) - 1.0 / (a + 1.0 + n);
    gb += 1.0 / (a + b + n);
    t *= ratio;
    sum += t;
    da += t * ga;
    db += t * gb;
    const double r = std::max(ratio, x);
    if (r < 1.0 && t * r / (1.0 - r) < 1e-17 * sum) return {da, db};
  }
  Fail(ErrorCode::kConvergence,
       "RegIncBetaShapeDerivs: series did not converge");
}

}  // namespace

double Lgamma(double x) {
  CheckPositive(x, "Lgamma", "x");
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double Digamma(double x) {
  CheckPositive(x, "Digamma", "x");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  const double tail =
      f * (-1.0 / 12 +
           f * (1.0 / 120 +
                f * (-1.0 / 252 +
                     f * (1.0 / 240 +
                          f * (-1.0 / 132 +
                               f * (691.0 / 32760 + f * (-1.0 / 12)))))));
  return result + std::log(x) - 0.5 / x + tail;
}

double Trigamma(double x) {
  CheckPositive(x, "Trigamma", "x");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double f = r * r;
  const double tail =
      r * f *
      (1.0 / 6 +
       f * (-1.0 / 30 +
            f * (1.0 / 42 +
                 f * (-1.0 / 30 +
                      f * (5.0 / 66 + f * (-691.0 / 2730 + f * 7.0 / 6))))));
  return result + r + 0.5 * f + tail;
}

double LogBeta(double a, double b) {
  return Lgamma(a) + Lgamma(b) - Lgamma(a + b);
}

double NormalQuantile(double p) {
  Require(p > 0.0 && p < 1.0, "NormalQuantile: p must lie in (0, 1)");
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - kLow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double RegIncBeta(double x, double a, double b) {
  CheckPositive(a, "RegIncBeta", "a");
  CheckPositive(b, "RegIncBeta", "b");
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << "RegIncBeta: x must lie in [0, 1], got " << x;
    Fail(ErrorCode::kInvalidArgument, os.str());
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - LogBeta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double RegIncGamma(double a, double x) {
  CheckPositive(a, "RegIncGamma", "a");
  if (!(x >= 0.0) || std::isnan(x)) {
    std::ostringstream os;
    os << "RegIncGamma: x must be nonnegative, got " << x;
    Fail(ErrorCode::kInvalidArgument, os.str());
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return GammaSeries(a, x);
  return 1.0 - GammaContinuedFraction(a, x);
}

double BetaPdf(double x, double a, double b) {
  CheckPositive(a, "BetaPdf", "a");
  CheckPositive(b, "BetaPdf", "b");
  if (!(x > 0.0 && x < 1.0)) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                  LogBeta(a, b));
}

double GammaPdf(double x, double shape) {
  CheckPositive(shape, "GammaPdf", "shape");
  if (!(x > 0.0) || std::isinf(x)) return 0.0;
  return std::exp((shape - 1.0) * std::log(x) - x - Lgamma(shape));
}

namespace {

// Newton/bisection solve of RegIncBeta(x, a, b) = u on (0, 1).
double SolveIncBeta(double u, double a, double b) {
  auto cdf = [a, b](double x) { return RegIncBeta(x, a, b); };
  auto pdf = [a, b](double x) { return BetaPdf(x, a, b); };
  // Moment-matched normal guess plus the two power-law tail guesses.
  const double mean = a / (a + b);
  const double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
  const double lbeta = LogBeta(a, b);
  const double normal_guess = mean + sd * NormalQuantile(u);
  const double lower_guess =
      std::exp((std::log(u * a) + lbeta) / a);
  const double upper_guess =
      1.0 - std::exp((std::log((1.0 - u) * b) + lbeta) / b);
  double x0 = PickBest(
      u,
      {normal_guess < 1.0 ? normal_guess : -1.0,
       lower_guess < 1.0 ? lower_guess : -1.0,
       upper_guess < 1.0 ? upper_guess : -1.0},
      cdf);
  if (!(x0 > 0.0 && x0 < 1.0)) x0 = 0.5;
  std::ostringstream what;
  what << "InvRegIncBeta(u=" << u << ", a=" << a << ", b=" << b << ")";
  return SolveCdf(u, 0.0, 1.0, x0, cdf, pdf, what.str());
}

}  // namespace

double InvRegIncBeta(double u, double a, double b) {
  CheckPositive(a, "InvRegIncBeta", "a");
  CheckPositive(b, "InvRegIncBeta", "b");
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream os;
    os << "InvRegIncBeta: u must lie in (0, 1), got " << u;
    Fail(ErrorCode::kInvalidArgument, os.str());
  }
  // Quantiles above 1/2 are solved for 1 - x through I(x; a, b) =
  // 1 - I(1 - x; b, a); 1 - u is exact there and 1 - x keeps full precision.
  if (u > RegIncBeta(0.5, a, b)) return 1.0 - SolveIncBeta(1.0 - u, b, a);
  return SolveIncBeta(u, a, b);
}

double InvRegIncGamma(double u, double a) {
  CheckPositive(a, "InvRegIncGamma", "a");
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream os;
    os << "InvRegIncGamma: u must lie in (0, 1), got " << u;
    Fail(ErrorCode::kInvalidArgument, os.str());
  }
  auto cdf = [a](double x) { return RegIncGamma(a, x); };
  auto pdf = [a](double x) { return GammaPdf(x, a); };
  // Wilson-Hilferty guess and the small-x power-law guess.
  const double z = NormalQuantile(u);
  const double w = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
  const double wh_guess = w > 0.0 ? a * w * w * w : -1.0;
  const double small_guess = std::exp((std::log(u) + Lgamma(a + 1.0)) / a);
  double x0 = PickBest(u, {wh_guess, small_guess}, cdf);
  if (!(x0 > 0.0)) x0 = a;
  double hi = std::max(x0, 1.0) * 2.0;
  for (int i = 0; i < 2000 && cdf(hi) < u; ++i) hi *= 2.0;
  std::ostringstream what;
  what << "InvRegIncGamma(u=" << u << ", a=" << a << ")";
  return SolveCdf(u, 0.0, hi, std::min(x0, hi), cdf, pdf, what.str());
}

double LogInvRegIncGamma(double u, double a) {
  CheckPositive(a, "LogInvRegIncGamma", "a");
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream os;
    os << "LogInvRegIncGamma: u must lie in (0, 1), got " << u;
    Fail(ErrorCode::kInvalidArgument, os.str());
  }
  const double log_small = (std::log(u) + Lgamma(a + 1.0)) / a;
  if (log_small < kLogTinyQuantile) return log_small;
  return std::log(InvRegIncGamma(u, a));
}

double LogInvRegIncGammaShapeDeriv(double a, double log_x) {
  CheckPositive(a, "LogInvRegIncGammaShapeDeriv", "a");
  if (log_x < kLogTinyQuantile) return (Digamma(a + 1.0) - log_x) / a;
  // d log x / da = -(dP/da) / (x pdf(x)).
  const double x = std::exp(log_x);
  return -RegIncGammaShapeDeriv(a, x) / (x * GammaPdf(x, a));
}

BetaShapeDerivs RegIncBetaShapeDerivs(double x, double a, double b) {
  CheckPositive(a, "RegIncBetaShapeDerivs", "a");
  CheckPositive(b, "RegIncBetaShapeDerivs", "b");
  Require(x >= 0.0 && x <= 1.0, "RegIncBetaShapeDerivs: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return {0.0, 0.0};
  if (x > (a + 1.0) / (a + b + 2.0)) {
    const BetaShapeDerivs r = BetaSeriesDerivs(1.0 - x, b, a);
    return {-r.d_b, -r.d_a};
  }
  return BetaSeriesDerivs(x, a, b);
}

double RegIncGammaShapeDeriv(double a, double x) {
  CheckPositive(a, "RegIncGammaShapeDeriv", "a");
  Require(x >= 0.0, "RegIncGammaShapeDeriv: x must be nonnegative");
  if (x == 0.0 || std::isinf(x)) return 0.0;
  const double lx = std::log(x);
  // Terms t_n = x^(a+n) e^-x / Gamma(a+n+1) peak near n = x - a; sum outwards
  // from the peak so nothing underflows before it matters.
  const double peak = std::max(0.0, std::floor(x - a));
  const double log_t0 = (a + peak) * lx - x - Lgamma(a + peak + 1.0);
  const double psi0 = Digamma(a + peak + 1.0);
  double sum = 0.0;
  double deriv = 0.0;
  {
    double t = std::exp(log_t0);
    double psi = psi0;
    for (int i = 0; i < kMaxSeries; ++i) {
      const double n = peak + i;
      sum += t;
      deriv += t * (lx - psi);
      const double ratio = x / (a + n + 1.0);
      t *= ratio;
      psi += 1.0 / (a + n + 1.0);
      if (ratio < 1.0 && t / (1.0 - ratio) < 1e-17 * sum) break;
    }
  }
  {
    double t = std::exp(log_t0);
    double psi = psi0;
    for (double n = peak; n >= 1.0; n -= 1.0) {
      // t_{n-1} = t_n (a + n) / x and psi(a + n) = psi(a + n + 1) - 1/(a + n).
      t *= (a + n) / x;
      psi -= 1.0 / (a + n);
      sum += t;
      deriv += t * (lx - psi);
      if (t < 1e-17 * sum) break;
    }
  }
  return deriv;
}

}  // namespace sda::special
