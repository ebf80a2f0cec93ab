// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "ad/tape.hpp"

#include <cmath>

namespace clar::ad {

const Array& Var::value() const {
  require(valid(), "use of unbound Var");
  return tape_->val(id_);
}

const Shape& Var::shape() const { return value().shape; }

Var Tape::leaf(const Array& param, bool trainable) {
  auto it = leaf_ids_.find(&param);
  if (it != leaf_ids_.end()) {
    require(nodes_[it->second].needs_grad == trainable,
            "array bound twice with different trainable flags");
    return Var(this, it->second);
  }
  const int id = add_node(param, trainable);
  leaf_ids_.emplace(&param, id);
  return Var(this, id);
}

Var Tape::constant(Array value) { return Var(this, add_node(std::move(value), false)); }

int Tape::add_node(Array val, bool needs_grad) {
  Node n;
  n.val = std::move(val);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::set_back(int id, std::function<void(Tape&)> back) { nodes_[id].back = std::move(back); }

void Tape::backward(const Var& loss) {
  require(loss.valid() && loss.tape() == this, "backward on a Var from another tape");
  require(loss.value().size() == 1, "backward requires a scalar loss, got shape " +
                                        shape_str(loss.value().shape));
  for (auto& n : nodes_) {
    if (n.needs_grad)
      n.grad.assign(n.val.v.size(), 0.0);
    else
      n.grad.clear();
  }
  ran_backward_ = true;
  if (!nodes_[loss.id()].needs_grad) return;  // loss independent of any trainable leaf
  nodes_[loss.id()].grad[0] = 1.0;
  for (int i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.needs_grad && n.back) n.back(*this);
  }
}

Array Tape::grad_array(const Array& param) const {
  auto it = leaf_ids_.find(&param);
  require(it != leaf_ids_.end(), "grad_array: array was never bound to this tape");
  require(ran_backward_, "grad_array before backward()");
  const Node& n = nodes_[it->second];
  Array g(param.shape);
  if (n.needs_grad) g.v = n.grad;
  return g;
}

bool Tape::has_leaf(const Array& param) const { return leaf_ids_.count(&param) != 0; }

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  require(a.valid() && b.valid() && a.tape() == b.tape(),
          std::string(op) + ": operands from different tapes");
  return *a.tape();
}

void check_same_shape(Var a, Var b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                      " vs " + shape_str(b.shape()));
}

// Builds an output node from computed values; wires the backward closure only
// when some input needs a gradient.
Var make(Tape& t, Array out, bool needs, std::function<void(Tape&)> back) {
  const int id = t.add_node(std::move(out), needs);
  if (needs) t.set_back(id, std::move(back));
  return Var(&t, id);
}

// Elementwise binary helper.
template <class Fwd, class Bwd>
Var binary_op(Var a, Var b, const char* name, Fwd fwd, Bwd bwd) {
  Tape& t = same_tape(a, b, name);
  check_same_shape(a, b, name);
  const Array& av = a.value();
  const Array& bv = b.value();
  Array out(av.shape);
  const int64_t n = av.size();
  for (int64_t i = 0; i < n; ++i) out.v[i] = fwd(av.v[i], bv.v[i]);
  const bool needs = t.needs_grad(a.id()) || t.needs_grad(b.id());
  const int ia = a.id(), ib = b.id();
  const int io = t.num_nodes();  // id the node will get
  return make(t, std::move(out), needs, [=](Tape& tp) {
    const double* g = tp.grad_data(io);
    const double* xa = tp.val(ia).data();
    const double* xb = tp.val(ib).data();
    double* ga = tp.needs_grad(ia) ? tp.grad_data(ia) : nullptr;
    double* gb = tp.needs_grad(ib) ? tp.grad_data(ib) : nullptr;
    for (int64_t i = 0; i < n; ++i) {
      double da, db;
      bwd(xa[i], xb[i], da, db);
      if (ga) ga[i] += g[i] * da;
      if (gb) gb[i] += g[i] * db;
    }
  });
}

// Elementwise unary helper; dfn receives (x, y) and returns dy/dx.
template <class Fwd, class Dfn>
Var unary_op(Var a, const char* name, Fwd fwd, Dfn dfn) {
  require(a.valid(), std::string(name) + ": unbound Var");
  Tape& t = *a.tape();
  const Array& av = a.value();
  Array out(av.shape);
  const int64_t n = av.size();
  for (int64_t i = 0; i < n; ++i) out.v[i] = fwd(av.v[i]);
  const bool needs = t.needs_grad(a.id());
  const int ia = a.id();
  const int io = t.num_nodes();
  return make(t, std::move(out), needs, [=](Tape& tp) {
    const double* g = tp.grad_data(io);
    const double* x = tp.val(ia).data();
    const double* y = tp.val(io).data();
    double* ga = tp.grad_data(ia);
    for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * dfn(x[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary_op(a, b, "add", [](double x, double y) { return x + y; },
                   [](double, double, double& da, double& db) { da = 1.0; db = 1.0; });
}

Var sub(Var a, Var b) {
  return binary_op(a, b, "sub", [](double x, double y) { return x - y; },
                   [](double, double, double& da, double& db) { da = 1.0; db = -1.0; });
}

Var mul(Var a, Var b) {
  return binary_op(a, b, "mul", [](double x, double y) { return x * y; },
                   [](double x, double y, double& da, double& db) { da = y; db = x; });
}

Var scale(Var a, double c) {
  return unary_op(a, "scale", [c](double x) { return c * x; },
                  [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary_op(a, "add_scalar", [c](double x) { return x + c; },
                  [](double, double) { return 1.0; });
}

Var square(Var a) {
  return unary_op(a, "square", [](double x) { return x * x; },
                  [](double x, double) { return 2.0 * x; });
}

Var vexp(Var a) {
  return unary_op(a, "exp", [](double x) { return std::exp(x); },
                  [](double, double y) { return y; });
}

Var vlog(Var a) {
  return unary_op(a, "log", [](double x) { return std::log(x); },
                  [](double x, double) { return 1.0 / x; });
}

Var vtanh(Var a) {
  return unary_op(a, "tanh", [](double x) { return std::tanh(x); },
                  [](double, double y) { return 1.0 - y * y; });
}

Var vsigmoid(Var a) {
  return unary_op(a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                  [](double, double y) { return y * (1.0 - y); });
}

Var clamp_min(Var a, double floor) {
  return unary_op(a, "clamp_min", [floor](double x) { return x > floor ? x : floor; },
                  [floor](double x, double) { return x > floor ? 1.0 : 0.0; });
}

Var vsum(Var a) {
  require(a.valid(), "sum: unbound Var");
  Tape& t = *a.tape();
  const Array& av = a.value();
  double s = 0.0;
  for (double x : av.v) s += x;
  const bool needs = t.needs_grad(a.id());
  const int ia = a.id();
  const int io = t.num_nodes();
  const int64_t n = av.size();
  return make(t, Array::scalar(s), needs, [=](Tape& tp) {
    const double g = tp.grad_data(io)[0];
    double* ga = tp.grad_data(ia);
    for (int64_t i = 0; i < n; ++i) ga[i] += g;
  });
}

Var vmean(Var a) { return scale(vsum(a), 1.0 / double(a.value().size())); }

Var reshape(Var a, Shape s) {
  require(a.valid(), "reshape: unbound Var");
  Tape& t = *a.tape();
  const Array& av = a.value();
  require(shape_size(s) == av.size(),
          "reshape: size mismatch " + shape_str(av.shape) + " -> " + shape_str(s));
  Array out(std::move(s), av.v);
  const bool needs = t.needs_grad(a.id());
  const int ia = a.id();
  const int io = t.num_nodes();
  const int64_t n = av.size();
  return make(t, std::move(out), needs, [=](Tape& tp) {
    const double* g = tp.grad_data(io);
    double* ga = tp.grad_data(ia);
    for (int64_t i = 0; i < n; ++i) ga[i] += g[i];
  });
}

Var select_row(Var a, int row) {
  require(a.valid(), "select_row: unbound Var");
  Tape& t = *a.tape();
  const Array& av = a.value();
  require(av.shape.size() == 2, "select_row expects [C,T], got " + shape_str(av.shape));
  const int C = av.shape[0];
  const int64_t T = av.shape[1];
  require(row >= 0 && row < C, "select_row: row out of range");
  Array out(Shape{static_cast<int>(T)});
  for (int64_t i = 0; i < T; ++i) out.v[i] = av.v[row * T + i];
  const bool needs = t.needs_grad(a.id());
  const int ia = a.id();
  const int io = t.num_nodes();
  return make(t, std::move(out), needs, [=](Tape& tp) {
    const double* g = tp.grad_data(io);
    double* ga = tp.grad_data(ia);
    for (int64_t i = 0; i < T; ++i) ga[row * T + i] += g[i];
  });
}

namespace {
// Rows-by-T view of the last dimension.
void last_dim(const Array& a, int64_t& rows, int64_t& T) {
  require(!a.shape.empty(), "op requires at least one dimension");
  T = a.shape.back();
  rows = a.size() / T;
}
}  // namespace

Var shift_right(Var a) {
  require(a.valid(), "shift_right: unbound Var");
  Tape& t = *a.tape();
  const Array& av = a.value();
  int64_t rows, T;
  last_dim(av, rows, T);
  Array out(av.shape);
  for (int64_t r = 0; r < rows; ++r) {
    out.v[r * T] = 0.0;
    for (int64_t i = 1; i < T; ++i) out.v[r * T + i] = av.v[r * T + i - 1];
  }
  const bool needs = t.needs_grad(a.id());
  const int ia = a.id();
  const int io = t.num_nodes();
  return make(t, std::move(out), needs, [=](Tape& tp) {
    const double* g = tp.grad_data(io);
    double* ga = tp.grad_data(ia);
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t i = 1; i < T; ++i) ga[r * T + i - 1] += g[r * T + i];
  });
}

Var reverse_last(Var a) {
  require(a.valid(), "reverse_last: unbound Var");
  Tape& t = *a.tape();
  const Array& av = a.value();
  int64_t rows, T;
  last_dim(av, rows, T);
  Array out(av.shape);
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t i = 0; i < T; ++i) out.v[r * T + i] = av.v[r * T + (T - 1 - i)];
  const bool needs = t.needs_grad(a.id());
  const int ia = a.id();
  const int io = t.num_nodes();
  return make(t, std::move(out), needs, [=](Tape& tp) {
    const double* g = tp.grad_data(io);
    double* ga = tp.grad_data(ia);
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t i = 0; i < T; ++i) ga[r * T + (T - 1 - i)] += g[r * T + i];
  });
}

Var causal_conv1d(Var x, Var w, int dilation) {
  Tape& t = same_tape(x, w, "causal_conv1d");
  const Array& xv = x.value();
  const Array& wv = w.value();
  require(xv.shape.size() == 2, "causal_conv1d: input must be [Cin,T], got " + shape_str(xv.shape));
  require(wv.shape.size() == 3,
          "causal_conv1d: weight must be [Cout,Cin,K], got " + shape_str(wv.shape));
  require(dilation >= 1, "causal_conv1d: dilation must be >= 1");
  const int Cin = xv.shape[0];
  const int64_t T = xv.shape[1];
  const int Cout = wv.shape[0];
  const int K = wv.shape[2];
  require(wv.shape[1] == Cin, "causal_conv1d: weight Cin " + std::to_string(wv.shape[1]) +
                                  " does not match input channels " + std::to_string(Cin));

  Array out(Shape{Cout, static_cast<int>(T)});
  {
    const double* xp = xv.data();
    const double* wp = wv.data();
    double* yp = out.data();
    for (int o = 0; o < Cout; ++o)
      for (int ci = 0; ci < Cin; ++ci)
        for (int k = 0; k < K; ++k) {
          const int64_t shift = int64_t(K - 1 - k) * dilation;
          if (shift >= T) continue;
          const double wk = wp[(int64_t(o) * Cin + ci) * K + k];
          const double* xr = xp + int64_t(ci) * T;
          double* yr = yp + int64_t(o) * T;
          for (int64_t i = shift; i < T; ++i) yr[i] += wk * xr[i - shift];
        }
  }

  const bool needs = t.needs_grad(x.id()) || t.needs_grad(w.id());
  const int ix = x.id(), iw = w.id();
  const int io = t.num_nodes();
  return make(t, std::move(out), needs, [=](Tape& tp) {
    const double* g = tp.grad_data(io);
    const double* xp = tp.val(ix).data();
    const double* wp = tp.val(iw).data();
    if (tp.needs_grad(ix)) {
      double* gx = tp.grad_data(ix);
      for (int o = 0; o < Cout; ++o)
        for (int ci = 0; ci < Cin; ++ci)
          for (int k = 0; k < K; ++k) {
            const int64_t shift = int64_t(K - 1 - k) * dilation;
            if (shift >= T) continue;
            const double wk = wp[(int64_t(o) * Cin + ci) * K + k];
            const double* gr = g + int64_t(o) * T;
            double* gxr = gx + int64_t(ci) * T;
            for (int64_t i = shift; i < T; ++i) gxr[i - shift] += wk * gr[i];
          }
    }
    if (tp.needs_grad(iw)) {
      double* gw = tp.grad_data(iw);
      for (int o = 0; o < Cout; ++o)
        for (int ci = 0; ci < Cin; ++ci)
          for (int k = 0; k < K; ++k) {
            const int64_t shift = int64_t(K - 1 - k) * dilation;
            if (shift >= T) continue;
            const double* gr = g + int64_t(o) * T;
            const double* xr = xp + int64_t(ci) * T;
            double acc = 0.0;
            for (int64_t i = shift; i < T; ++i) acc += gr[i] * xr[i - shift];
            gw[(int64_t(o) * Cin + ci) * K + k] += acc;
          }
    }
  });
}

Var add_channel_bias(Var x, Var b) {
  Tape& t = same_tape(x, b, "add_channel_bias");
  const Array& xv = x.value();
  const Array& bv = b.value();
  require(xv.shape.size() == 2, "add_channel_bias: input must be [C,T]");
  require(bv.shape.size() == 1 && bv.shape[0] == xv.shape[0],
          "add_channel_bias: bias shape " + shape_str(bv.shape) + " does not match input " +
              shape_str(xv.shape));
  const int C = xv.shape[0];
  const int64_t T = xv.shape[1];
  Array out(xv.shape);
  for (int c = 0; c < C; ++c)
    for (int64_t i = 0; i < T; ++i) out.v[c * T + i] = xv.v[c * T + i] + bv.v[c];
  const bool needs = t.needs_grad(x.id()) || t.needs_grad(b.id());
  const int ix = x.id(), ib = b.id();
  const int io = t.num_nodes();
  return make(t, std::move(out), needs, [=](Tape& tp) {
    const double* g = tp.grad_data(io);
    if (tp.needs_grad(ix)) {
      double* gx = tp.grad_data(ix);
      for (int64_t i = 0; i < int64_t(C) * T; ++i) gx[i] += g[i];
    }
    if (tp.needs_grad(ib)) {
      double* gb = tp.grad_data(ib);
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int64_t i = 0; i < T; ++i) acc += g[c * T + i];
        gb[c] += acc;
      }
    }
  });
}

}  // namespace clar::ad
