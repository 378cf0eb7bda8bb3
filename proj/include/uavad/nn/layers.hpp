#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "uavad/nn/num_array.hpp"

// Forward and backward kernels for the fixed layer sequence of the
// reconstruction networks. Backward functions accumulate parameter
// gradients into the caller's buffers and return the input gradient.

namespace uavad::nn {

/// y = W x + b with W of shape [n_out x n_in].
[[nodiscard]] NumArray dense_forward(const NumArray& x, const NumArray& W, const NumArray& b);
/// Adds dL/dW and dL/db into dW, db. Returns dL/dx, or an empty array when
/// need_dx is false.
NumArray dense_backward(const NumArray& x, const NumArray& W, const NumArray& dy, NumArray& dW, NumArray& db,
                        bool need_dx = true);

[[nodiscard]] NumArray relu_forward(const NumArray& x);
[[nodiscard]] NumArray relu_backward(const NumArray& x, const NumArray& dy);

/// Logistic function. Outputs are kept strictly inside (0, 1) even where
/// 1 / (1 + exp(-x)) rounds to 0 or 1.
[[nodiscard]] NumArray sigmoid_forward(const NumArray& x);
/// Takes the forward output y, not the input.
[[nodiscard]] NumArray sigmoid_backward(const NumArray& y, const NumArray& dy);

/// Per-pixel channel mixing: y[h,w,o] = sum_c K[o,c] x[h,w,c] + b[o].
/// x is [H x W x C_in], K is [C_out x C_in].
[[nodiscard]] NumArray conv1x1_forward(const NumArray& x, const NumArray& K, const NumArray& b);
NumArray conv1x1_backward(const NumArray& x, const NumArray& K, const NumArray& dy, NumArray& dK, NumArray& db,
                          bool need_dx = true);

[[nodiscard]] NumArray concat(const NumArray& a, const NumArray& b, std::size_t axis);
/// Splits dy back into the gradients of the two concatenated operands.
[[nodiscard]] std::pair<NumArray, NumArray> concat_backward(const NumArray& dy,
                                                            const std::vector<std::size_t>& a_shape,
                                                            const std::vector<std::size_t>& b_shape,
                                                            std::size_t axis);

/// z = mu + exp(log_var / 2) * eps.
[[nodiscard]] NumArray reparameterize(const NumArray& mu, const NumArray& log_var, const NumArray& eps);

struct ReparamGrad {
  NumArray d_mu;
  NumArray d_log_var;
};

[[nodiscard]] ReparamGrad reparameterize_backward(const NumArray& log_var, const NumArray& eps, const NumArray& dz);

}  // namespace uavad::nn
