#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "uavad/nn/num_array.hpp"
#include "uavad/nn/rng.hpp"

namespace uavad::nn {

/// A trainable array with its gradient accumulator and Adam moments.
struct Param {
  NumArray value;
  NumArray grad;
  NumArray adam_m;
  NumArray adam_v;

  explicit Param(NumArray v)
      : value(std::move(v)),
        grad(NumArray::zeros_like(value)),
        adam_m(NumArray::zeros_like(value)),
        adam_v(NumArray::zeros_like(value)) {}
};

/// Named parameters, iterated in lexicographic name order.
class ParamSet {
 public:
  using Map = std::map<std::string, Param>;

  /// Throws ConfigError on a duplicate name.
  Param& add(const std::string& name, NumArray value);
  [[nodiscard]] Param& at(const std::string& name);
  [[nodiscard]] const Param& at(const std::string& name) const;
  [[nodiscard]] bool contains(const std::string& name) const { return params_.contains(name); }
  [[nodiscard]] std::size_t count() const { return params_.size(); }
  /// Total number of scalar parameters.
  [[nodiscard]] std::size_t total_size() const;
  void zero_grad();

  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  [[nodiscard]] Map::const_iterator begin() const { return params_.begin(); }
  [[nodiscard]] Map::const_iterator end() const { return params_.end(); }

 private:
  Map params_;
};

struct AdamSettings {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update at step t >= 1, then zeroes every
/// gradient. Throws DivergenceError naming the parameter if a gradient is
/// not finite; in that case no parameter is modified.
void adam_step(ParamSet& params, const AdamSettings& settings, std::int64_t t);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void init_glorot_uniform(NumArray& w, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace uavad::nn
