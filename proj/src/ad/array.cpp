// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "ad/array.hpp"

#include <cmath>
#include <sstream>

namespace clar::ad {

int64_t shape_size(const Shape& s) {
  int64_t n = 1;
  for (int d : s) {
    require(d > 0, "shape dimensions must be positive, got " + shape_str(s));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

Array::Array(Shape s, std::vector<double> data) : shape(std::move(s)), v(std::move(data)) {
  require(shape_size(shape) == static_cast<int64_t>(v.size()),
          "array data length does not match shape " + shape_str(shape));
}

Array Array::scalar(double x) {
  Array a{Shape{}};
  a.v[0] = x;
  return a;
}

Array Array::full(Shape s, double x) {
  Array a(std::move(s));
  for (auto& e : a.v) e = x;
  return a;
}

bool Array::all_finite() const {
  for (double e : v)
    if (!std::isfinite(e)) return false;
  return true;
}

}  // namespace clar::ad
