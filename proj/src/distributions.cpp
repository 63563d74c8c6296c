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

#include "sda/distributions.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sda/error.hpp"
#include "sda/special.hpp"

namespace sda {
namespace {

constexpr double kMinDensity = 1e-300;

// exp(v - logsumexp(v)).
std::vector<double> Normalize(std::span<const double> v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void CheckDims(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(what) + ": dimension mismatch (" +
             std::to_string(expected) + " vs " + std::to_string(got) + ")");
  }
}

}  // namespace

void BetaParams::Validate() const {
  Require(!alpha.empty(), "BetaParams: empty");
  CheckDims(alpha.size(), beta.size(), "BetaParams");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    Require(alpha[i] > 0.0 && std::isfinite(alpha[i]) && beta[i] > 0.0 &&
                std::isfinite(beta[i]),
            "BetaParams: parameters must be positive and finite");
  }
}

std::vector<double> DirichletParams::Concentration() const {
  std::vector<double> c(alpha_hat.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = alpha0 * alpha_hat[i];
  return c;
}

void DirichletParams::Validate() const {
  Require(!alpha_hat.empty(), "DirichletParams: empty");
  Require(alpha0 > 0.0 && std::isfinite(alpha0),
          "DirichletParams: alpha0 must be positive and finite");
  for (double c : Concentration()) {
    Require(c > 0.0 && std::isfinite(c),
            "DirichletParams: concentration must be positive and finite");
  }
}

GateVector GateVector::OneHot(std::size_t k, std::size_t index) {
  Require(index < k, "one-hot index out of range");
  GateVector g;
  g.z.assign(k, 0.0);
  g.z[index] = 1.0;
  g.family = GateFamily::kOneHot;
  return g;
}

bool GateVector::Valid() const {
  if (z.empty()) return false;
  switch (family) {
    case GateFamily::kOneHot: {
      int ones = 0;
      for (double v : z) {
        if (v == 1.0) {
          ++ones;
        } else if (v != 0.0) {
          return false;
        }
      }
      return ones == 1;
    }
    case GateFamily::kBox:
      for (double v : z) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
      }
      return true;
    case GateFamily::kSimplex: {
      double s = 0.0;
      for (double v : z) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
        s += v;
      }
      return std::fabs(s - 1.0) <= 1e-10;
    }
  }
  return false;
}

std::vector<double> DrawNoise(std::size_t k, Rng& rng) {
  std::vector<double> u(k);
  for (double& v : u) v = rng.Uniform();
  return u;
}

GateSample SampleWithNoise(const BetaParams& params, std::span<const double> u) {
  params.Validate();
  CheckDims(params.dim(), u.size(), "beta sample noise");
  GateSample s;
  s.noise.assign(u.begin(), u.end());
  s.gate.family = GateFamily::kBox;
  s.gate.z.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    s.gate.z[i] = special::InvRegIncBeta(u[i], params.alpha[i], params.beta[i]);
  }
  return s;
}

double SampleGamma(const GammaParams& params, double u) {
  return special::InvRegIncGamma(u, params.shape);
}

GateSample SampleWithNoise(const DirichletParams& params,
                           std::span<const double> u) {
  params.Validate();
  CheckDims(params.dim(), u.size(), "dirichlet sample noise");
  GateSample s;
  s.noise.assign(u.begin(), u.end());
  s.gate.family = GateFamily::kSimplex;
  const std::size_t k = u.size();
  if (k == 1) {
    // One-dimensional simplex: z is identically 1.
    s.gate.z = {1.0};
    s.log_gammas = {0.0};
    return s;
  }
  const std::vector<double> c = params.Concentration();
  s.log_gammas.resize(k);
  for (std::size_t j = 0; j < k; ++j) s.log_gammas[j] = special::LogInvRegIncGamma(u[j], c[j]);
  s.gate.z = Normalize(s.log_gammas);
  return s;
}

GateSample Sample(const BetaParams& params, Rng& rng) {
  const auto u = DrawNoise(params.dim(), rng);
  return SampleWithNoise(params, u);
}

GateSample Sample(const DirichletParams& params, Rng& rng) {
  const auto u = DrawNoise(params.dim(), rng);
  return SampleWithNoise(params, u);
}

double LogPdf(const BetaParams& params, std::span<const double> z) {
  params.Validate();
  CheckDims(params.dim(), z.size(), "beta log_pdf");
  double lp = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] > 0.0 && z[i] < 1.0)) return kNegInf;
    const double a = params.alpha[i], b = params.beta[i];
    lp += (a - 1.0) * std::log(z[i]) + (b - 1.0) * std::log1p(-z[i]) -
          special::LogBeta(a, b);
  }
  return lp;
}

double LogPdf(const DirichletParams& params, std::span<const double> z) {
  params.Validate();
  CheckDims(params.dim(), z.size(), "dirichlet log_pdf");
  if (z.size() == 1) return z[0] == 1.0 ? 0.0 : kNegInf;
  double s = 0.0;
  for (double v : z) {
    if (!(v > 0.0 && v < 1.0)) return kNegInf;
    s += v;
  }
  if (std::fabs(s - 1.0) > 1e-10) return kNegInf;
  const std::vector<double> c = params.Concentration();
  double total = 0.0;
  double lp = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    total += c[i];
    lp += (c[i] - 1.0) * std::log(z[i]) - special::Lgamma(c[i]);
  }
  return lp + special::Lgamma(total);
}

double LogPdf(const ContinuousParams& params, std::span<const double> z) {
  return std::visit([z](const auto& p) { return LogPdf(p, z); }, params);
}

double KlDivergence(const BetaParams& q, const BetaParams& p) {
  q.Validate();
  p.Validate();
  CheckDims(q.dim(), p.dim(), "beta KL");
  double kl = 0.0;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    const double qa = q.alpha[i], qb = q.beta[i];
    const double pa = p.alpha[i], pb = p.beta[i];
    kl += special::LogBeta(pa, pb) - special::LogBeta(qa, qb) +
          (qa - pa) * special::Digamma(qa) + (qb - pb) * special::Digamma(qb) +
          (pa - qa + pb - qb) * special::Digamma(qa + qb);
  }
  return kl;
}

double KlDivergence(const DirichletParams& q, const DirichletParams& p) {
  q.Validate();
  p.Validate();
  CheckDims(q.dim(), p.dim(), "dirichlet KL");
  const auto qc = q.Concentration();
  const auto pc = p.Concentration();
  const double q0 = std::accumulate(qc.begin(), qc.end(), 0.0);
  const double p0 = std::accumulate(pc.begin(), pc.end(), 0.0);
  const double psi_q0 = special::Digamma(q0);
  double kl = special::Lgamma(q0) - special::Lgamma(p0);
  for (std::size_t i = 0; i < qc.size(); ++i) {
    kl += special::Lgamma(pc[i]) - special::Lgamma(qc[i]) +
          (qc[i] - pc[i]) * (special::Digamma(qc[i]) - psi_q0);
  }
  return kl;
}

double KlDivergence(const ContinuousParams& q, const ContinuousParams& p) {
  if (q.index() != p.index()) {
    Fail(ErrorCode::kInvalidArgument, "KL: distribution families differ");
  }
  if (std::holds_alternative<BetaParams>(q)) {
    return KlDivergence(std::get<BetaParams>(q), std::get<BetaParams>(p));
  }
  return KlDivergence(std::get<DirichletParams>(q), std::get<DirichletParams>(p));
}

std::vector<double> Mean(const BetaParams& params) {
  params.Validate();
  std::vector<double> m(params.dim());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = params.alpha[i] / (params.alpha[i] + params.beta[i]);
  }
  return m;
}

std::vector<double> Mean(const DirichletParams& params) {
  params.Validate();
  std::vector<double> c = params.Concentration();
  const double total = std::accumulate(c.begin(), c.end(), 0.0);
  for (double& v : c) v /= total;
  return c;
}

std::vector<double> Mean(const ContinuousParams& params) {
  return std::visit([](const auto& p) { return Mean(p); }, params);
}

BetaImplicitGrad ImplicitGradBeta(double alpha, double beta, double z) {
  const double pdf = special::BetaPdf(z, alpha, beta);
  if (!(pdf >= kMinDensity)) {
    std::ostringstream os;
    os << "beta implicit gradient: degenerate sample z=" << z << " (pdf "
       << pdf << ") for alpha=" << alpha << " beta=" << beta;
    Fail(ErrorCode::kNumeric, os.str());
  }
  const auto d = special::RegIncBetaShapeDerivs(z, alpha, beta);
  return {-d.d_a / pdf, -d.d_b / pdf};
}

double ImplicitGradGamma(double shape, double z) {
  const double pdf = special::GammaPdf(z, shape);
  if (!(pdf >= kMinDensity)) {
    std::ostringstream os;
    os << "gamma implicit gradient: degenerate sample z=" << z << " (pdf "
       << pdf << ") for shape=" << shape;
    Fail(ErrorCode::kNumeric, os.str());
  }
  return -special::RegIncGammaShapeDeriv(shape, z) / pdf;
}

std::vector<double> ImplicitGradDirichlet(std::span<const double> concentration,
                                          std::span<const double> log_gammas) {
  const std::size_t k = concentration.size();
  CheckDims(k, log_gammas.size(), "dirichlet implicit gradient");
  std::vector<double> jac(k * k, 0.0);
  if (k == 1) return jac;
  const std::vector<double> z = Normalize(log_gammas);
  for (std::size_t j = 0; j < k; ++j) {
    if (z[j] == 0.0) continue;
    const double dlog = special::LogInvRegIncGammaShapeDeriv(concentration[j], log_gammas[j]);
    if (!std::isfinite(dlog)) {
      std::ostringstream os;
      os << "dirichlet implicit gradient: non-finite d log g / dc at c=" << concentration[j]
         << " log g=" << log_gammas[j];
      Fail(ErrorCode::kNumeric, os.str());
    }
    for (std::size_t i = 0; i < k; ++i) {
      // z = softmax(log g)  =>  dz_i/dc_j = (delta_ij - z_i) z_j dlog g_j/dc_j.
      jac[i * k + j] = ((i == j ? 1.0 : 0.0) - z[i]) * z[j] * dlog;
    }
  }
  return jac;
}

namespace ad {

Var BetaSample(Var alpha, Var beta, std::span<const double> noise) {
  Require(alpha.tape == beta.tape, "beta_sample: operands on different tapes");
  BetaParams params{alpha.value().data(), beta.value().data()};
  GateSample s = SampleWithNoise(params, noise);
  const int ia = alpha.id, ib = beta.id;
  return alpha.tape->Record(
      OpKind::kBetaSample, {ia, ib}, Tensor::Vector(s.gate.z),
      [ia, ib, z = s.gate.z](Tape& t, const Tensor& g) {
        const Tensor& av = t.value(ia);
        const Tensor& bv = t.value(ib);
        Tensor ga(av.shape()), gb(bv.shape());
        for (std::size_t i = 0; i < z.size(); ++i) {
          const auto d = ImplicitGradBeta(av[i], bv[i], z[i]);
          ga[i] = g[i] * d.d_alpha;
          gb[i] = g[i] * d.d_beta;
        }
        t.Accumulate(ia, ga);
        t.Accumulate(ib, gb);
      });
}

Var DirichletSample(Var concentration, std::span<const double> noise) {
  const Tensor& c = concentration.value();
  DirichletParams params{1.0, c.data()};
  GateSample s = SampleWithNoise(params, noise);
  const int ic = concentration.id;
  return concentration.tape->Record(
      OpKind::kDirichletSample, {ic}, Tensor::Vector(s.gate.z),
      [ic, log_gammas = s.log_gammas](Tape& t, const Tensor& g) {
        const Tensor& cv = t.value(ic);
        const std::size_t k = cv.size();
        const auto jac = ImplicitGradDirichlet(cv.values(), log_gammas);
        Tensor gc(cv.shape(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t j = 0; j < k; ++j) gc[j] += g[i] * jac[i * k + j];
        }
        t.Accumulate(ic, gc);
      });
}

Var KlBeta(Var q_alpha, Var q_beta, Var p_alpha, Var p_beta) {
  // lnB(pa,pb) - lnB(qa,qb) + (qa-pa) psi(qa) + (qb-pb) psi(qb)
  //   - ((qa-pa) + (qb-pb)) psi(qa+qb)
  auto log_beta = [](Var a, Var b) {
    return Sub(Add(Lgamma(a), Lgamma(b)), Lgamma(Add(a, b)));
  };
  Var da = Sub(q_alpha, p_alpha);
  Var db = Sub(q_beta, p_beta);
  Var terms = Sub(log_beta(p_alpha, p_beta), log_beta(q_alpha, q_beta));
  terms = Add(terms, Mul(da, Digamma(q_alpha)));
  terms = Add(terms, Mul(db, Digamma(q_beta)));
  terms = Sub(terms, Mul(Add(da, db), Digamma(Add(q_alpha, q_beta))));
  return Sum(terms);
}

Var KlDirichlet(Var q_concentration, Var p_concentration) {
  // lnG(q0) - lnG(p0) + sum[lnG(p_i) - lnG(q_i)] + sum[(q_i - p_i)(psi(q_i) -
  // psi(q0))]
  Var q0 = Sum(q_concentration);
  Var p0 = Sum(p_concentration);
  Var diff = Sub(q_concentration, p_concentration);
  Var kl = Sub(Lgamma(q0), Lgamma(p0));
  kl = Add(kl, Sum(Sub(Lgamma(p_concentration), Lgamma(q_concentration))));
  kl = Add(kl, Sum(Mul(diff, Digamma(q_concentration))));
  kl = Sub(kl, Mul(Digamma(q0), Sum(diff)));
  return kl;
}

}  // namespace ad
}  // namespace sda
