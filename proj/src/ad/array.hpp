// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace clar::ad {

// Shape {} is a scalar (size 1); {C, T} is a C-by-T row-major matrix.
using Shape = std::vector<int>;

int64_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

// Dense 64-bit real tensor. Plain value type; gradients live on the tape.
struct Array {
  Shape shape;
  std::vector<double> v;

  Array() = default;
  explicit Array(Shape s) : shape(std::move(s)), v(static_cast<size_t>(shape_size(shape)), 0.0) {}
  Array(Shape s, std::vector<double> data);

  static Array scalar(double x);
  static Array full(Shape s, double x);

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  bool same_shape(const Array& o) const { return shape == o.shape; }
  bool all_finite() const;
};

}  // namespace clar::ad
