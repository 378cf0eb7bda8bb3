#include "uavad/nn/num_array.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "uavad/error.hpp"

namespace uavad::nn {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

NumArray::NumArray(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(product(shape_), fill) {}

NumArray::NumArray(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (product(shape_) != values_.size()) {
    throw ShapeError("shape " + shape_string(shape_) + " does not hold " + std::to_string(values_.size()) +
                     " values");
  }
}

NumArray NumArray::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return NumArray({n}, std::move(values));
}

NumArray NumArray::reshaped(std::vector<std::size_t> shape) const { return NumArray(std::move(shape), values_); }

void NumArray::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool NumArray::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace uavad::nn
