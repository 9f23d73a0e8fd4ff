#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "spnet/errors.hpp"

namespace spnet {

/// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(size_t(element_count(shape)), 0.0);
  }

  static int64_t element_count(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int e : shape) n *= e;
    return n;
  }

  int64_t size() const { return int64_t(data.size()); }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  int dim(int i) const { return shape[size_t(i)]; }

  void require_shape(const std::vector<int>& expected, const char* what) const {
    if (shape != expected) {
      std::string msg = std::string(what) + ": expected shape (";
      for (size_t i = 0; i < expected.size(); ++i)
        msg += (i ? "," : "") + std::to_string(expected[i]);
      msg += "), got (";
      for (size_t i = 0; i < shape.size(); ++i) msg += (i ? "," : "") + std::to_string(shape[i]);
      msg += ")";
      throw ShapeMismatch(msg);
    }
  }
};

}  // namespace spnet
