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

// Scalar special functions: log-gamma and its derivatives, the regularized
// incomplete beta and gamma functions (the Beta and Gamma(shape, 1) CDFs),
// their inverses, and their derivatives with respect to the shape
// parameters. All functions are pure and thread-safe. Arguments outside the
// documented domain throw sda::Error(kInvalidArgument).

#ifndef SDA_SPECIAL_HPP_
#define SDA_SPECIAL_HPP_

namespace sda::special {

// ln Gamma(x), x > 0.
double Lgamma(double x);
// psi(x) = d/dx ln Gamma(x), x > 0.
double Digamma(double x);
// psi'(x), x > 0.
double Trigamma(double x);
// ln B(a, b).
double LogBeta(double a, double b);

// Inverse of the standard normal CDF (Acklam's rational approximation
// refined by one Halley step).
double NormalQuantile(double p);

// I_x(a, b) for x in [0, 1], a, b > 0.
double RegIncBeta(double x, double a, double b);
// P(a, x) for a > 0, x >= 0.
double RegIncGamma(double a, double x);

double BetaPdf(double x, double a, double b);
double GammaPdf(double x, double shape);

// Solves RegIncBeta(x, a, b) = u for u in (0, 1). Throws kConvergence with
// the iterate history summary if 200 iterations do not converge.
double InvRegIncBeta(double u, double a, double b);
// Solves RegIncGamma(a, x) = u for u in (0, 1).
double InvRegIncGamma(double u, double a);
// log InvRegIncGamma(u, a), finite even when the quantile underflows. Below
// x = 1e-12 it uses P(a, x) = x^a / Gamma(a + 1) (1 + O(x)) in closed form.
double LogInvRegIncGamma(double u, double a);
// d/da of LogInvRegIncGamma(u, a) at fixed u, given its value log_x.
double LogInvRegIncGammaShapeDeriv(double a, double log_x);

struct BetaShapeDerivs {
  double d_a;
  double d_b;
};

// dI_x(a,b)/da and dI_x(a,b)/db from the hypergeometric series
//   I_x(a,b) = x^a (1-x)^b / (a B(a,b)) * sum_n (a+b)_n / (a+1)_n x^n,
// differentiated term by term (with the reflection I_x(a,b) = 1 - I_{1-x}(b,a)
// on the upper tail so the series ratio stays below one).
BetaShapeDerivs RegIncBetaShapeDerivs(double x, double a, double b);

// dP(a,x)/da from P(a,x) = sum_n x^(a+n) e^-x / Gamma(a+n+1).
double RegIncGammaShapeDeriv(double a, double x);

}  // namespace sda::special

#endif  // SDA_SPECIAL_HPP_
