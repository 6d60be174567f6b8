#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "csforge/util.hpp"

namespace csforge {

// Dense row-major array of doubles. Rank 0 (scalars), 1 (vectors) and 2
// (matrices) are what the models need; nothing broadcasts.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (size_of(shape) != data.size()) {
      throw ContractError("Tensor: shape/data size mismatch");
    }
  }

  static std::size_t size_of(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> shape) {
    std::size_t n = size_of(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Tensor scalar(double v) { return Tensor({}, {v}); }

  static Tensor vec(std::vector<double> d) {
    std::size_t n = d.size();
    return Tensor({n}, std::move(d));
  }

  static Tensor mat(std::size_t rows, std::size_t cols, std::vector<double> d) {
    return Tensor({rows, cols}, std::move(d));
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool is_scalar() const { return data.size() == 1 && shape.size() <= 1; }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }
  double scalar_value() const {
    if (!is_scalar()) throw ContractError("Tensor: not a scalar");
    return data[0];
  }

  bool finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i > 0) s += ",";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

}  // namespace csforge
