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

// Reverse-mode automatic differentiation over small dense tensors.
//
// A Tape records primitives in evaluation order. Each node owns its output
// value and a closure that pushes the output gradient back to its inputs.
// Parameters live outside the tape in a ParameterSet; Tape::Param() binds a
// parameter as a leaf and Tape::Backward() accumulates into a Gradients buffer
// indexed like the ParameterSet, so one buffer can sum a whole mini-batch.

#ifndef SDA_AUTODIFF_HPP_
#define SDA_AUTODIFF_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sda/random.hpp"

namespace sda {

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Scalar(double v) { return Tensor({1}, {v}); }
  static Tensor Vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return values_[r * shape_[1] + c];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }

  void Fill(double v);
  void AddFrom(const Tensor& other);  // this += other, shapes must match
  bool AllFinite() const;

 private:
  Shape shape_;
  std::vector<double> values_;
};

struct Parameter {
  std::string name;
  Tensor value;
};

// Named, ordered parameter collection. Indices are stable once added.
class ParameterSet {
 public:
  std::size_t Add(std::string name, Tensor value);
  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  // Returns size() when absent.
  std::size_t Find(const std::string& name) const;
  std::size_t Index(const std::string& name) const;  // throws when absent
  std::size_t TotalValues() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Gradient accumulator aligned with a ParameterSet.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet& params);
  void Zero();
  void Scale(double c);
  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_[i]; }
  const Tensor& operator[](std::size_t i) const { return grads_[i]; }

 private:
  std::vector<Tensor> grads_;
};

enum class OpKind {
  kParam,
  kConstant,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddConst,
  kScalarMul,
  kMatVec,
  kMatMul,
  kRelu,
  kElu,
  kSigmoid,
  kExp,
  kLog,
  kLgamma,
  kDigamma,
  kSoftmax,
  kLogSoftmax,
  kLogSumExp,
  kSum,
  kPick,
  kConcat,
  kEmbedding,
  kConv1d,
  kMaxPoolTime,
  kDropout,
  kWeightedSum,
  kReshape,
  kBetaSample,
  kDirichletSample,
};

const char* OpName(OpKind kind);

class Tape;

// Lightweight handle to a tape node.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  double item() const;  // value of a size-1 tensor
  bool valid() const { return tape != nullptr && id >= 0; }
};

class Tape {
 public:
  // Pushes the output gradient to the inputs, via Tape::Accumulate.
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Binds parameter `index` of `params` as a leaf. Repeated calls return the
  // same node. All Param() calls on one tape must use the same set. The leaf
  // refers to the parameter's storage, so `params` must outlive the tape and
  // stay unmodified while it is in use.
  Var Param(const ParameterSet& params, std::size_t index);
  Var Param(const ParameterSet& params, const std::string& name);
  Var Constant(Tensor value);

  // Generic primitive recording: validates finiteness, then appends.
  Var Record(OpKind kind, std::vector<int> inputs, Tensor value,
             BackwardFn backward);

  const Tensor& value(int id) const {
    const Node& n = nodes_[id];
    return n.ref != nullptr ? *n.ref : n.value;
  }
  OpKind kind(int id) const { return nodes_[id].kind; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss. Parameter gradients are added into
  // `grads` (which is not zeroed here).
  void Backward(Var loss, Gradients& grads);

  // Used by backward closures.
  void Accumulate(int id, const Tensor& grad);
  // Adds `row` into row `r` of a rank-2 node's gradient without
  // materialising a dense gradient for the rest of the node.
  void AccumulateRow(int id, std::size_t r, std::span<const double> row);

 private:
  struct Node {
    OpKind kind;
    std::vector<int> inputs;
    Tensor value;
    BackwardFn backward;
    int param_index = -1;
    const Tensor* ref = nullptr;  // parameter leaves only
  };

  Tensor& GradSlot(int id);

  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, int> param_nodes_;
  std::vector<Tensor> grads_;
  Gradients* sink_ = nullptr;
};

// Primitives. All check shapes and throw Error(kShapeMismatch) naming the
// shapes involved; outputs containing non-finite values throw Error(kNumeric)
// naming the primitive.
namespace ad {

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double c);
Var AddConst(Var a, double c);
// s has one element; result is s * v.
Var ScalarMul(Var s, Var v);
// x: [n], w: [n, p] -> [p]
Var MatVec(Var x, Var w);
// a: [m, n], b: [n, p] -> [m, p]
Var MatMul(Var a, Var b);
// x: [n], w: [n, p], b: [p] -> x w + b
Var Affine(Var x, Var w, Var b);
Var Relu(Var a);
Var Elu(Var a);  // alpha = 1
Var Sigmoid(Var a);
Var Exp(Var a);
Var Log(Var a);
Var Lgamma(Var a);
Var Digamma(Var a);
Var Softmax(Var a);     // rank 1
Var LogSoftmax(Var a);  // rank 1
Var LogSumExp(Var a);   // rank 1 -> [1]
Var Sum(Var a);         // -> [1]
Var Pick(Var a, std::size_t index);  // -> [1]
Var Concat(std::span<const Var> parts);  // rank-1 parts
// Same values, new shape with equal element count.
Var Reshape(Var a, Shape shape);
// table: [V, E], ids in [0, V) -> [T, E]
Var Embedding(Var table, std::span<const int> ids);
// x: [T, E], w: [width * E, F], b: [F] -> [T - width + 1, F], valid padding.
Var Conv1d(Var x, Var w, Var b, std::size_t width);
// x: [T, F] -> [F]; ties go to the lowest time index.
Var MaxPoolTime(Var x);
// Inverted dropout with keep-scaling 1 / (1 - rate). The mask is drawn from
// `rng` and kept on the tape.
Var Dropout(Var x, double rate, Rng& rng);
// sum_i z[i] * parts[i]; z: [k], parts: k tensors of equal shape.
Var WeightedSum(std::span<const Var> parts, Var z);

}  // namespace ad
}  // namespace sda

#endif  // SDA_AUTODIFF_HPP_
