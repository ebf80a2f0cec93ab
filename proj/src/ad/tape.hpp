// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "ad/array.hpp"

namespace clar::ad {

class Tape;

// Handle to a tape node. Cheap to copy; invalid until assigned.
class Var {
 public:
  Var() = default;
  Var(Tape* t, int id) : tape_(t), id_(id) {}
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  const Array& value() const;
  const Shape& shape() const;
  int64_t size() const { return value().size(); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Define-by-run reverse-mode tape. Rebuilt for every training step; single
// threaded; node order is the execution order, so replay is deterministic.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Binds an external parameter array. Cached by address: binding the same
  // array twice returns the same node, so gradients from every use point
  // accumulate. trainable=false marks a frozen input (no gradient).
  Var leaf(const Array& param, bool trainable = true);

  // Anonymous constant (no gradient).
  Var constant(Array value);
  Var constant_scalar(double x) { return constant(Array::scalar(x)); }

  // Runs reverse accumulation from a scalar loss.
  void backward(const Var& loss);

  // Gradient of the last backward() w.r.t. a bound leaf. Throws if the array
  // was never bound. A leaf unreachable from the loss has an all-zero grad.
  Array grad_array(const Array& param) const;
  bool has_leaf(const Array& param) const;

  // --- internal API used by the op implementations and custom nodes ---
  int add_node(Array val, bool needs_grad);
  void set_back(int id, std::function<void(Tape&)> back);
  const Array& val(int id) const { return nodes_[id].val; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  double* grad_data(int id) { return nodes_[id].grad.data(); }
  const double* grad_data(int id) const { return nodes_[id].grad.data(); }
  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Array val;
    std::vector<double> grad;
    bool needs_grad = false;
    std::function<void(Tape&)> back;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Array*, int> leaf_ids_;
  bool ran_backward_ = false;
};

// Elementwise (operands must share shape and tape).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var square(Var a);
Var vexp(Var a);
Var vlog(Var a);
Var vtanh(Var a);
Var vsigmoid(Var a);
// max(x, floor); subgradient passes 1 only where x > floor
Var clamp_min(Var a, double floor);

// Reductions to scalar shape {}.
Var vsum(Var a);
Var vmean(Var a);

// Structure ops.
Var reshape(Var a, Shape s);
Var select_row(Var a, int row);      // [C,T] -> [T]
Var shift_right(Var a);              // along last dim, zero fill at t=0
Var reverse_last(Var a);             // reverse along last dim

// y[o,t] = sum_ci sum_k w[o,ci,k] * x[ci, t-(K-1-k)*d], taps before t=0 read 0.
// w[o,ci,K-1] is the tap on the current sample.
Var causal_conv1d(Var x, Var w, int dilation);
Var add_channel_bias(Var x, Var b);  // [C,T] + [C]

}  // namespace clar::ad
