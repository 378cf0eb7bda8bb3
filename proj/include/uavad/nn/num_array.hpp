#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace uavad::nn {

/// Dense row-major array of doubles with an explicit shape.
class NumArray {
 public:
  NumArray() = default;
  explicit NumArray(std::vector<std::size_t> shape, double fill = 0.0);
  NumArray(std::vector<std::size_t> shape, std::vector<double> values);

  static NumArray vector(std::vector<double> values);
  static NumArray zeros_like(const NumArray& other) { return NumArray(other.shape_); }

  [[nodiscard]] const std::vector<std::size_t>& shape() const { return shape_; }
  [[nodiscard]] std::size_t rank() const { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] const std::vector<double>& vec() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Same values, new shape. Throws ShapeError if the element count differs.
  [[nodiscard]] NumArray reshaped(std::vector<std::size_t> shape) const;
  void fill(double v);
  [[nodiscard]] bool all_finite() const;

  bool operator==(const NumArray&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

[[nodiscard]] std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace uavad::nn
