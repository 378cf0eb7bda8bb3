#include "uavad/nn/params.hpp"

#include <cmath>

#include "uavad/error.hpp"

namespace uavad::nn {

Param& ParamSet::add(const std::string& name, NumArray value) {
  auto [it, inserted] = params_.try_emplace(name, std::move(value));
  if (!inserted) throw ConfigError("duplicate parameter name '" + name + "'");
  return it->second;
}

Param& ParamSet::at(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ShapeError("unknown parameter '" + name + "'");
  return it->second;
}

const Param& ParamSet::at(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ShapeError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

void adam_step(ParamSet& params, const AdamSettings& settings, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("adam_step: step index must be >= 1");
  for (const auto& [name, p] : params) {
    if (!p.grad.all_finite()) throw DivergenceError("non-finite gradient in parameter '" + name + "'");
  }
  const double b1 = settings.beta1;
  const double b2 = settings.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (auto& [name, p] : params) {
    auto value = p.value.values();
    auto grad = p.grad.values();
    auto m = p.adam_m.values();
    auto v = p.adam_v.values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= settings.lr * m_hat / (std::sqrt(v_hat) + settings.epsilon);
      grad[i] = 0.0;
    }
  }
}

void init_glorot_uniform(NumArray& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& x : w.values()) x = (2.0 * rng.uniform() - 1.0) * limit;
}

}  // namespace uavad::nn
