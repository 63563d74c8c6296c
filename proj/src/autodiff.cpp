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

#include "sda/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sda/error.hpp"
#include "sda/special.hpp"

namespace sda {

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace {

std::size_t ShapeSize(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void CheckShape(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) {
      Fail(ErrorCode::kShapeMismatch,
           "tensor dimensions must be positive, got " + ShapeString(shape));
    }
  }
}

[[noreturn]] void ShapeError(const char* op, const Shape& a, const Shape& b) {
  Fail(ErrorCode::kShapeMismatch, std::string(op) + ": incompatible shapes " +
                                      ShapeString(a) + " and " +
                                      ShapeString(b));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(ShapeSize(shape_), fill) {
  CheckShape(shape_);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  CheckShape(shape_);
  if (ShapeSize(shape_) != values_.size()) {
    Fail(ErrorCode::kShapeMismatch,
         "shape " + ShapeString(shape_) + " does not match " +
             std::to_string(values_.size()) + " values");
  }
}

void Tensor::Fill(double v) { std::fill(values_.begin(), values_.end(), v); }

void Tensor::AddFrom(const Tensor& other) {
  if (other.shape_ != shape_) ShapeError("accumulate", shape_, other.shape_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
}

bool Tensor::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::size_t ParameterSet::Add(std::string name, Tensor value) {
  Require(!index_.contains(name), "duplicate parameter name: " + name);
  const std::size_t i = params_.size();
  index_.emplace(name, i);
  params_.push_back({std::move(name), std::move(value)});
  return i;
}

std::size_t ParameterSet::Find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? params_.size() : it->second;
}

std::size_t ParameterSet::Index(const std::string& name) const {
  const std::size_t i = Find(name);
  Require(i < params_.size(), "unknown parameter: " + name);
  return i;
}

std::size_t ParameterSet::TotalValues() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

Gradients::Gradients(const ParameterSet& params) {
  grads_.reserve(params.size());
  for (const auto& p : params) grads_.emplace_back(p.value.shape(), 0.0);
}

void Gradients::Zero() {
  for (auto& g : grads_) g.Fill(0.0);
}

void Gradients::Scale(double c) {
  for (auto& g : grads_) {
    for (double& v : g.values()) v *= c;
  }
}

const char* OpName(OpKind kind) {
  switch (kind) {
    case OpKind::kParam: return "param";
    case OpKind::kConstant: return "constant";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAddConst: return "add_const";
    case OpKind::kScalarMul: return "scalar_mul";
    case OpKind::kMatVec: return "matvec";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kRelu: return "relu";
    case OpKind::kElu: return "elu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kLgamma: return "lgamma";
    case OpKind::kDigamma: return "digamma";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kLogSumExp: return "logsumexp";
    case OpKind::kSum: return "sum";
    case OpKind::kPick: return "pick";
    case OpKind::kConcat: return "concat";
    case OpKind::kEmbedding: return "embedding";
    case OpKind::kConv1d: return "conv1d";
    case OpKind::kMaxPoolTime: return "maxpool_time";
    case OpKind::kDropout: return "dropout";
    case OpKind::kWeightedSum: return "weighted_sum";
    case OpKind::kReshape: return "reshape";
    case OpKind::kBetaSample: return "beta_sample";
    case OpKind::kDirichletSample: return "dirichlet_sample";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape->value(id); }

double Var::item() const {
  const Tensor& v = value();
  Require(v.size() == 1, "item() on non-scalar tensor " + ShapeString(v.shape()));
  return v[0];
}

Var Tape::Param(const ParameterSet& params, std::size_t index) {
  Require(index < params.size(), "parameter index out of range");
  auto it = param_nodes_.find(index);
  if (it != param_nodes_.end()) return {this, it->second};
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({OpKind::kParam, {}, Tensor(), nullptr,
                    static_cast<int>(index), &params[index].value});
  param_nodes_.emplace(index, id);
  return {this, id};
}

Var Tape::Param(const ParameterSet& params, const std::string& name) {
  return Param(params, params.Index(name));
}

Var Tape::Constant(Tensor value) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({OpKind::kConstant, {}, std::move(value), nullptr, -1});
  return {this, id};
}

Var Tape::Record(OpKind kind, std::vector<int> inputs, Tensor value,
                 BackwardFn backward) {
  if (!value.AllFinite()) {
    Fail(ErrorCode::kNumeric, std::string("non-finite output from primitive '") +
                                  OpName(kind) + "'");
  }
  const int id = static_cast<int>(nodes_.size());
  for (int in : inputs) {
    Require(in >= 0 && in < id, "tape inputs must precede their outputs");
  }
  nodes_.push_back({kind, std::move(inputs), std::move(value),
                    std::move(backward), -1});
  return {this, id};
}

Tensor& Tape::GradSlot(int id) {
  Tensor& g = grads_[id];
  if (g.empty()) g = Tensor(value(id).shape(), 0.0);
  return g;
}

void Tape::Accumulate(int id, const Tensor& grad) {
  const Node& node = nodes_[id];
  if (node.kind == OpKind::kConstant) return;
  if (node.param_index >= 0) {
    (*sink_)[node.param_index].AddFrom(grad);
    return;
  }
  GradSlot(id).AddFrom(grad);
}

void Tape::AccumulateRow(int id, std::size_t r, std::span<const double> row) {
  const Node& node = nodes_[id];
  if (node.kind == OpKind::kConstant) return;
  Tensor& target = node.param_index >= 0 ? (*sink_)[node.param_index]
                                          : GradSlot(id);
  const std::size_t width = target.dim(1);
  for (std::size_t c = 0; c < width; ++c) target.at(r, c) += row[c];
}

void Tape::Backward(Var loss, Gradients& grads) {
  Require(loss.tape == this, "loss belongs to a different tape");
  if (value(loss.id).size() != 1) {
    Fail(ErrorCode::kShapeMismatch,
         "backprop requires a scalar loss, got shape " +
             ShapeString(value(loss.id).shape()));
  }
  sink_ = &grads;
  grads_.assign(nodes_.size(), Tensor());
  grads_[loss.id] = Tensor(value(loss.id).shape(), 1.0);
  if (nodes_[loss.id].param_index >= 0) {
    Accumulate(loss.id, grads_[loss.id]);
  }
  for (int id = loss.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.backward || grads_[id].empty()) continue;
    node.backward(*this, grads_[id]);
  }
  grads_.clear();
  sink_ = nullptr;
}

namespace ad {
namespace {

Tape& SameTape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || a.tape != b.tape) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(op) + ": operands must live on the same tape");
  }
  return *a.tape;
}

void CheckSame(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) ShapeError(op, a.shape(), b.shape());
}

// Elementwise unary op with derivative computed from (input, output).
template <typename F, typename D>
Var Unary(OpKind kind, Var a, F f, D dfdx) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const int in = a.id;
  const int out = static_cast<int>(a.tape->size());
  return a.tape->Record(
      kind, {in}, std::move(y),
      [in, out, dfdx](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(in);
        const Tensor& yv = t.value(out);
        Tensor gi(xv.shape());
        for (std::size_t i = 0; i < xv.size(); ++i) {
          gi[i] = g[i] * dfdx(xv[i], yv[i]);
        }
        t.Accumulate(in, gi);
      });
}

}  // namespace

Var Add(Var a, Var b) {
  Tape& t = SameTape(a, b, "add");
  CheckSame("add", a.value(), b.value());
  Tensor y = a.value();
  y.AddFrom(b.value());
  const int ia = a.id, ib = b.id;
  return t.Record(OpKind::kAdd, {ia, ib}, std::move(y),
                  [ia, ib](Tape& tp, const Tensor& g) {
                    tp.Accumulate(ia, g);
                    tp.Accumulate(ib, g);
                  });
}

Var Sub(Var a, Var b) {
  Tape& t = SameTape(a, b, "sub");
  CheckSame("sub", a.value(), b.value());
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  const int ia = a.id, ib = b.id;
  return t.Record(OpKind::kSub, {ia, ib}, std::move(y),
                  [ia, ib](Tape& tp, const Tensor& g) {
                    tp.Accumulate(ia, g);
                    Tensor ng = g;
                    for (double& v : ng.values()) v = -v;
                    tp.Accumulate(ib, ng);
                  });
}

Var Mul(Var a, Var b) {
  Tape& t = SameTape(a, b, "mul");
  CheckSame("mul", a.value(), b.value());
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  const int ia = a.id, ib = b.id;
  return t.Record(OpKind::kMul, {ia, ib}, std::move(y),
                  [ia, ib](Tape& tp, const Tensor& g) {
                    const Tensor& av = tp.value(ia);
                    const Tensor& bv = tp.value(ib);
                    Tensor ga(av.shape()), gb(bv.shape());
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      ga[i] = g[i] * bv[i];
                      gb[i] = g[i] * av[i];
                    }
                    tp.Accumulate(ia, ga);
                    tp.Accumulate(ib, gb);
                  });
}

Var Scale(Var a, double c) {
  return Unary(OpKind::kScale, a, [c](double x) { return c * x; },
               [c](double, double) { return c; });
}

Var AddConst(Var a, double c) {
  return Unary(OpKind::kAddConst, a, [c](double x) { return x + c; },
               [](double, double) { return 1.0; });
}

Var ScalarMul(Var s, Var v) {
  Tape& t = SameTape(s, v, "scalar_mul");
  if (s.value().size() != 1) ShapeError("scalar_mul", s.value().shape(), v.value().shape());
  const double c = s.value()[0];
  Tensor y = v.value();
  for (double& x : y.values()) x *= c;
  const int is = s.id, iv = v.id;
  return t.Record(OpKind::kScalarMul, {is, iv}, std::move(y),
                  [is, iv](Tape& tp, const Tensor& g) {
                    const double cs = tp.value(is)[0];
                    const Tensor& vv = tp.value(iv);
                    double gs = 0.0;
                    Tensor gv(vv.shape());
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      gs += g[i] * vv[i];
                      gv[i] = g[i] * cs;
                    }
                    tp.Accumulate(is, Tensor(tp.value(is).shape(), gs));
                    tp.Accumulate(iv, gv);
                  });
}

Var MatVec(Var x, Var w) {
  Tape& t = SameTape(x, w, "matvec");
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 1 || wv.rank() != 2 || wv.dim(0) != xv.dim(0)) {
    ShapeError("matvec", xv.shape(), wv.shape());
  }
  const std::size_t n = wv.dim(0), p = wv.dim(1);
  Tensor y({p}, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = xv[i];
    if (xi == 0.0) continue;
    const double* row = &wv.data()[i * p];
    for (std::size_t j = 0; j < p; ++j) y[j] += xi * row[j];
  }
  const int ix = x.id, iw = w.id;
  return t.Record(OpKind::kMatVec, {ix, iw}, std::move(y),
                  [ix, iw, n, p](Tape& tp, const Tensor& g) {
                    const Tensor& xv2 = tp.value(ix);
                    const Tensor& wv2 = tp.value(iw);
                    Tensor gx({n}, 0.0);
                    Tensor gw({n, p}, 0.0);
                    for (std::size_t i = 0; i < n; ++i) {
                      double acc = 0.0;
                      const double* row = &wv2.data()[i * p];
                      for (std::size_t j = 0; j < p; ++j) {
                        acc += row[j] * g[j];
                        gw[i * p + j] = xv2[i] * g[j];
                      }
                      gx[i] = acc;
                    }
                    tp.Accumulate(ix, gx);
                    tp.Accumulate(iw, gw);
                  });
}

Var MatMul(Var a, Var b) {
  Tape& t = SameTape(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    ShapeError("matmul", av.shape(), bv.shape());
  }
  const std::size_t m = av.dim(0), n = av.dim(1), p = bv.dim(1);
  Tensor y({m, p}, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = av.at(i, k);
      for (std::size_t j = 0; j < p; ++j) y.at(i, j) += aik * bv.at(k, j);
    }
  }
  const int ia = a.id, ib = b.id;
  return t.Record(OpKind::kMatMul, {ia, ib}, std::move(y),
                  [ia, ib, m, n, p](Tape& tp, const Tensor& g) {
                    const Tensor& av2 = tp.value(ia);
                    const Tensor& bv2 = tp.value(ib);
                    Tensor ga({m, n}, 0.0), gb({n, p}, 0.0);
                    for (std::size_t i = 0; i < m; ++i) {
                      for (std::size_t k = 0; k < n; ++k) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < p; ++j) {
                          acc += g.at(i, j) * bv2.at(k, j);
                          gb.at(k, j) += av2.at(i, k) * g.at(i, j);
                        }
                        ga.at(i, k) = acc;
                      }
                    }
                    tp.Accumulate(ia, ga);
                    tp.Accumulate(ib, gb);
                  });
}

Var Affine(Var x, Var w, Var b) { return Add(MatVec(x, w), b); }

Var Relu(Var a) {
  return Unary(OpKind::kRelu, a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var Elu(Var a) {
  return Unary(OpKind::kElu, a,
               [](double x) { return x > 0.0 ? x : std::expm1(x); },
               [](double x, double y) { return x > 0.0 ? 1.0 : y + 1.0; });
}

Var Sigmoid(Var a) {
  return Unary(OpKind::kSigmoid, a,
               [](double x) {
                 if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                 const double e = std::exp(x);
                 return e / (1.0 + e);
               },
               [](double, double y) { return y * (1.0 - y); });
}

Var Exp(Var a) {
  return Unary(OpKind::kExp, a, [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Var Log(Var a) {
  return Unary(OpKind::kLog, a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var Lgamma(Var a) {
  return Unary(OpKind::kLgamma, a, [](double x) { return special::Lgamma(x); },
               [](double x, double) { return special::Digamma(x); });
}

Var Digamma(Var a) {
  return Unary(OpKind::kDigamma, a,
               [](double x) { return special::Digamma(x); },
               [](double x, double) { return special::Trigamma(x); });
}

Var Softmax(Var a) {
  const Tensor& x = a.value();
  if (x.rank() != 1) ShapeError("softmax", x.shape(), {});
  Tensor y(x.shape());
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) z += (y[i] = std::exp(x[i] - mx));
  for (double& v : y.values()) v /= z;
  const int in = a.id;
  const int out = static_cast<int>(a.tape->size());
  return a.tape->Record(OpKind::kSoftmax, {in}, std::move(y),
                        [in, out](Tape& t, const Tensor& g) {
                          const Tensor& yv = t.value(out);
                          double dot = 0.0;
                          for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * yv[i];
                          Tensor gi(yv.shape());
                          for (std::size_t i = 0; i < g.size(); ++i) {
                            gi[i] = yv[i] * (g[i] - dot);
                          }
                          t.Accumulate(in, gi);
                        });
}

Var LogSoftmax(Var a) {
  const Tensor& x = a.value();
  if (x.rank() != 1) ShapeError("log_softmax", x.shape(), {});
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  double z = 0.0;
  for (double v : x.values()) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - lse;
  const int in = a.id;
  const int out = static_cast<int>(a.tape->size());
  return a.tape->Record(OpKind::kLogSoftmax, {in}, std::move(y),
                        [in, out](Tape& t, const Tensor& g) {
                          const Tensor& yv = t.value(out);
                          double gs = 0.0;
                          for (double v : g.values()) gs += v;
                          Tensor gi(yv.shape());
                          for (std::size_t i = 0; i < g.size(); ++i) {
                            gi[i] = g[i] - std::exp(yv[i]) * gs;
                          }
                          t.Accumulate(in, gi);
                        });
}

Var LogSumExp(Var a) {
  const Tensor& x = a.value();
  if (x.rank() != 1) ShapeError("logsumexp", x.shape(), {});
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  double z = 0.0;
  for (double v : x.values()) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  const int in = a.id;
  return a.tape->Record(OpKind::kLogSumExp, {in}, Tensor::Scalar(lse),
                        [in, lse](Tape& t, const Tensor& g) {
                          const Tensor& xv = t.value(in);
                          Tensor gi(xv.shape());
                          for (std::size_t i = 0; i < xv.size(); ++i) {
                            gi[i] = g[0] * std::exp(xv[i] - lse);
                          }
                          t.Accumulate(in, gi);
                        });
}

Var Sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const int in = a.id;
  return a.tape->Record(OpKind::kSum, {in}, Tensor::Scalar(s),
                        [in](Tape& t, const Tensor& g) {
                          t.Accumulate(in, Tensor(t.value(in).shape(), g[0]));
                        });
}

Var Pick(Var a, std::size_t index) {
  const Tensor& x = a.value();
  if (index >= x.size()) {
    Fail(ErrorCode::kShapeMismatch, "pick: index " + std::to_string(index) +
                                        " out of range for shape " +
                                        ShapeString(x.shape()));
  }
  const int in = a.id;
  return a.tape->Record(OpKind::kPick, {in}, Tensor::Scalar(x[index]),
                        [in, index](Tape& t, const Tensor& g) {
                          Tensor gi(t.value(in).shape(), 0.0);
                          gi[index] = g[0];
                          t.Accumulate(in, gi);
                        });
}

Var Concat(std::span<const Var> parts) {
  Require(!parts.empty(), "concat: no inputs");
  Tape& t = *parts[0].tape;
  std::vector<int> ids;
  std::vector<double> out;
  for (const Var& p : parts) {
    Require(p.tape == &t, "concat: operands must live on the same tape");
    if (p.value().rank() != 1) ShapeError("concat", parts[0].value().shape(), p.value().shape());
    ids.push_back(p.id);
    out.insert(out.end(), p.value().values().begin(), p.value().values().end());
  }
  std::vector<int> inputs = ids;
  return t.Record(OpKind::kConcat, std::move(inputs), Tensor::Vector(std::move(out)),
                  [ids](Tape& tp, const Tensor& g) {
                    std::size_t off = 0;
                    for (int id : ids) {
                      const std::size_t n = tp.value(id).size();
                      Tensor gi({n});
                      for (std::size_t i = 0; i < n; ++i) gi[i] = g[off + i];
                      off += n;
                      tp.Accumulate(id, gi);
                    }
                  });
}

Var Reshape(Var a, Shape shape) {
  const Tensor& x = a.value();
  Tensor y(shape, x.data());
  if (y.size() != x.size()) ShapeError("reshape", x.shape(), shape);
  const int in = a.id;
  return a.tape->Record(OpKind::kReshape, {in}, std::move(y),
                        [in](Tape& t, const Tensor& g) {
                          t.Accumulate(in, Tensor(t.value(in).shape(), g.data()));
                        });
}

Var Embedding(Var table, std::span<const int> ids) {
  const Tensor& tv = table.value();
  if (tv.rank() != 2) ShapeError("embedding", tv.shape(), {ids.size()});
  const std::size_t vocab = tv.dim(0), width = tv.dim(1);
  Require(!ids.empty(), "embedding: empty id sequence");
  Tensor y({ids.size(), width});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const int id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      Fail(ErrorCode::kShapeMismatch, "embedding: id " + std::to_string(id) +
                                          " out of range for table " +
                                          ShapeString(tv.shape()));
    }
    std::copy_n(&tv.data()[id * width], width, &y.values()[t * width]);
  }
  const int in = table.id;
  std::vector<int> rows(ids.begin(), ids.end());
  return table.tape->Record(
      OpKind::kEmbedding, {in}, std::move(y),
      [in, rows = std::move(rows), width](Tape& t, const Tensor& g) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
          t.AccumulateRow(in, static_cast<std::size_t>(rows[r]),
                          g.values().subspan(r * width, width));
        }
      });
}

Var Conv1d(Var x, Var w, Var b, std::size_t width) {
  Tape& t = SameTape(x, w, "conv1d");
  SameTape(x, b, "conv1d");
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (xv.rank() != 2 || wv.rank() != 2 || wv.dim(0) != width * xv.dim(1)) {
    ShapeError("conv1d", xv.shape(), wv.shape());
  }
  const std::size_t len = xv.dim(0), emb = xv.dim(1), filters = wv.dim(1);
  if (bv.rank() != 1 || bv.dim(0) != filters) ShapeError("conv1d", wv.shape(), bv.shape());
  if (len < width) {
    Fail(ErrorCode::kShapeMismatch, "conv1d: sequence length " +
                                        std::to_string(len) +
                                        " shorter than window " +
                                        std::to_string(width));
  }
  const std::size_t out_len = len - width + 1;
  const std::size_t span_len = width * emb;
  Tensor y({out_len, filters});
  for (std::size_t p = 0; p < out_len; ++p) {
    double* out = &y.values()[p * filters];
    std::copy_n(bv.data().data(), filters, out);
    // Window p covers rows p..p+width-1, which are contiguous in x.
    const double* win = &xv.data()[p * emb];
    for (std::size_t r = 0; r < span_len; ++r) {
      const double xr = win[r];
      if (xr == 0.0) continue;
      const double* wr = &wv.data()[r * filters];
      for (std::size_t f = 0; f < filters; ++f) out[f] += xr * wr[f];
    }
  }
  const int ix = x.id, iw = w.id, ib = b.id;
  return t.Record(
      OpKind::kConv1d, {ix, iw, ib}, std::move(y),
      [ix, iw, ib, out_len, emb, filters, span_len](Tape& tp, const Tensor& g) {
        const Tensor& xv2 = tp.value(ix);
        const Tensor& wv2 = tp.value(iw);
        Tensor gx(xv2.shape(), 0.0);
        Tensor gw(wv2.shape(), 0.0);
        Tensor gb({filters}, 0.0);
        for (std::size_t p = 0; p < out_len; ++p) {
          const double* gp = &g.data()[p * filters];
          for (std::size_t f = 0; f < filters; ++f) gb[f] += gp[f];
          const double* win = &xv2.data()[p * emb];
          double* gwin = &gx.values()[p * emb];
          for (std::size_t r = 0; r < span_len; ++r) {
            const double* wr = &wv2.data()[r * filters];
            double* gwr = &gw.values()[r * filters];
            const double xr = win[r];
            double acc = 0.0;
            for (std::size_t f = 0; f < filters; ++f) {
              acc += wr[f] * gp[f];
              gwr[f] += xr * gp[f];
            }
            gwin[r] += acc;
          }
        }
        tp.Accumulate(ix, gx);
        tp.Accumulate(iw, gw);
        tp.Accumulate(ib, gb);
      });
}

Var MaxPoolTime(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2) ShapeError("maxpool_time", xv.shape(), {});
  const std::size_t len = xv.dim(0), filters = xv.dim(1);
  Tensor y({filters});
  std::vector<std::size_t> arg(filters, 0);
  for (std::size_t f = 0; f < filters; ++f) {
    double best = xv.at(0, f);
    for (std::size_t p = 1; p < len; ++p) {
      if (xv.at(p, f) > best) {
        best = xv.at(p, f);
        arg[f] = p;
      }
    }
    y[f] = best;
  }
  const int in = x.id;
  return x.tape->Record(OpKind::kMaxPoolTime, {in}, std::move(y),
                        [in, arg = std::move(arg), filters](Tape& t, const Tensor& g) {
                          Tensor gi(t.value(in).shape(), 0.0);
                          for (std::size_t f = 0; f < filters; ++f) {
                            gi.at(arg[f], f) = g[f];
                          }
                          t.Accumulate(in, gi);
                        });
}

Var Dropout(Var x, double rate, Rng& rng) {
  Require(rate >= 0.0 && rate < 1.0, "dropout: rate must lie in [0, 1)");
  const Tensor& xv = x.value();
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask(xv.shape());
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = rng.Uniform() < rate ? 0.0 : keep_scale;
    y[i] = xv[i] * mask[i];
  }
  const int in = x.id;
  return x.tape->Record(OpKind::kDropout, {in}, std::move(y),
                        [in, mask = std::move(mask)](Tape& t, const Tensor& g) {
                          Tensor gi(mask.shape());
                          for (std::size_t i = 0; i < g.size(); ++i) gi[i] = g[i] * mask[i];
                          t.Accumulate(in, gi);
                        });
}

Var WeightedSum(std::span<const Var> parts, Var z) {
  Require(!parts.empty(), "weighted_sum: no inputs");
  const Tensor& zv = z.value();
  if (zv.rank() != 1 || zv.size() != parts.size()) {
    Fail(ErrorCode::kShapeMismatch,
         "weighted_sum: gate of shape " + ShapeString(zv.shape()) +
             " for " + std::to_string(parts.size()) + " channels");
  }
  Tape& t = *z.tape;
  const Shape& shape = parts[0].value().shape();
  // Start from -0.0 and skip exact zero weights so that a one-hot gate
  // reproduces the selected channel bit for bit.
  Tensor y(shape, -0.0);
  std::vector<int> inputs;
  std::vector<int> ids;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    Require(parts[i].tape == &t, "weighted_sum: operands must live on the same tape");
    CheckSame("weighted_sum", parts[0].value(), parts[i].value());
    ids.push_back(parts[i].id);
    const double zi = zv[i];
    if (zi == 0.0) continue;
    const Tensor& h = parts[i].value();
    for (std::size_t j = 0; j < h.size(); ++j) y[j] += zi * h[j];
  }
  inputs = ids;
  inputs.push_back(z.id);
  const int iz = z.id;
  return t.Record(OpKind::kWeightedSum, std::move(inputs), std::move(y),
                  [ids, iz](Tape& tp, const Tensor& g) {
                    const Tensor& zv2 = tp.value(iz);
                    Tensor gz(zv2.shape(), 0.0);
                    for (std::size_t i = 0; i < ids.size(); ++i) {
                      const Tensor& h = tp.value(ids[i]);
                      double dot = 0.0;
                      Tensor gh(h.shape());
                      for (std::size_t j = 0; j < h.size(); ++j) {
                        dot += g[j] * h[j];
                        gh[j] = g[j] * zv2[i];
                      }
                      gz[i] = dot;
                      tp.Accumulate(ids[i], gh);
                    }
                    tp.Accumulate(iz, gz);
                  });
}

}  // namespace ad
}  // namespace sda
