#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavad/model.hpp"

namespace uavad {

struct GradCheckItem {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t components = 0;

  [[nodiscard]] bool passed() const { return max_rel_error < tolerance; }
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps components whose true
/// gradient is near zero from being judged on round-off alone.
[[nodiscard]] double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Central differences with step h on every layer kernel (random small
/// instances, tolerance 1e-6) and on the full loss of a 4x4x2 model with
/// n_h = 3 and a batch of 2 for every variant (tolerance 1e-4).
[[nodiscard]] std::vector<GradCheckItem> run_gradcheck(std::uint64_t seed = 1, double h = 1e-5);

/// Full-model check only: batch-summed total loss against every parameter.
[[nodiscard]] GradCheckItem check_model_gradients(Variant variant, std::uint64_t seed, double h = 1e-5);

}  // namespace uavad
