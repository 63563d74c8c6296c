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

// Beta, Gamma and Dirichlet distributions used as gate distributions.
//
// Sampling goes through the inverse CDF with explicit uniform noise, so a
// sample is a deterministic function z(params, u). Gradients of z with
// respect to the parameters are obtained implicitly: differentiating
// F(z; params) = u gives dz/dparam = -(dF/dparam) / pdf(z), which needs the
// CDF's shape derivatives but never the derivative of the inverse.
//
// Beta gates are fully factorized: each coordinate has its own (alpha, beta)
// and an independent uniform. Dirichlet gates are normalized Gamma(shape, 1)
// draws, and their gradients compose the per-coordinate Gamma implicit
// gradient with the Jacobian of the normalization. The Gamma draws are kept
// in log space, since small shapes put most of their mass below the smallest
// double.

#ifndef SDA_DISTRIBUTIONS_HPP_
#define SDA_DISTRIBUTIONS_HPP_

#include <span>
#include <variant>
#include <vector>

#include "sda/autodiff.hpp"
#include "sda/random.hpp"

namespace sda {

struct BetaParams {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::size_t dim() const { return alpha.size(); }
  void Validate() const;
};

struct DirichletParams {
  double alpha0 = 1.0;
  std::vector<double> alpha_hat;
  std::size_t dim() const { return alpha_hat.size(); }
  std::vector<double> Concentration() const;
  void Validate() const;
};

struct GammaParams {
  double shape = 1.0;  // rate fixed to 1
};

using ContinuousParams = std::variant<BetaParams, DirichletParams>;

enum class GateFamily { kOneHot, kBox, kSimplex };

// A realized latent gate.
struct GateVector {
  std::vector<double> z;
  GateFamily family = GateFamily::kBox;

  static GateVector OneHot(std::size_t k, std::size_t index);
  // Checks the family invariant (one-hot / box / simplex within 1e-10).
  bool Valid() const;
};

struct GateSample {
  GateVector gate;
  std::vector<double> noise;   // the uniforms that produced the sample
  std::vector<double> log_gammas;  // Dirichlet only: logs of the Gamma draws
};

// Draws one uniform per coordinate from `rng`.
std::vector<double> DrawNoise(std::size_t k, Rng& rng);

GateSample Sample(const BetaParams& params, Rng& rng);
GateSample Sample(const DirichletParams& params, Rng& rng);
GateSample SampleWithNoise(const BetaParams& params, std::span<const double> u);
GateSample SampleWithNoise(const DirichletParams& params,
                           std::span<const double> u);
double SampleGamma(const GammaParams& params, double u);

// Exact log-density. Returns -infinity when z lies outside the support.
double LogPdf(const BetaParams& params, std::span<const double> z);
double LogPdf(const DirichletParams& params, std::span<const double> z);
double LogPdf(const ContinuousParams& params, std::span<const double> z);

// Closed-form KL(q || p). Throws kInvalidArgument on family or dimension
// mismatch.
double KlDivergence(const BetaParams& q, const BetaParams& p);
double KlDivergence(const DirichletParams& q, const DirichletParams& p);
double KlDivergence(const ContinuousParams& q, const ContinuousParams& p);

std::vector<double> Mean(const BetaParams& params);
std::vector<double> Mean(const DirichletParams& params);
std::vector<double> Mean(const ContinuousParams& params);

struct BetaImplicitGrad {
  double d_alpha;
  double d_beta;
};

// dz/dalpha and dz/dbeta for a scalar Beta sample z. Throws kNumeric if the
// density at z is below 1e-300.
BetaImplicitGrad ImplicitGradBeta(double alpha, double beta, double z);
// dz/dshape for a Gamma(shape, 1) sample z.
double ImplicitGradGamma(double shape, double z);
// Jacobian dz_i / dc_j (row-major k x k) of a Dirichlet sample with respect
// to its effective concentration c = alpha0 * alpha_hat, given the logs of
// the Gamma draws that produced it.
std::vector<double> ImplicitGradDirichlet(std::span<const double> concentration,
                                          std::span<const double> log_gammas);

namespace ad {

// Gate sample on the tape with implicit gradients to alpha and beta.
Var BetaSample(Var alpha, Var beta, std::span<const double> noise);
// Gate sample on the tape with implicit gradients to the concentration.
Var DirichletSample(Var concentration, std::span<const double> noise);
// Differentiable closed-form KL(q || p), summed over coordinates.
Var KlBeta(Var q_alpha, Var q_beta, Var p_alpha, Var p_beta);
Var KlDirichlet(Var q_concentration, Var p_concentration);

}  // namespace ad
}  // namespace sda

#endif  // SDA_DISTRIBUTIONS_HPP_
