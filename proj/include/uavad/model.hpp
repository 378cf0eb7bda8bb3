#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include <json.hpp>

#include "uavad/grid.hpp"
#include "uavad/nn/num_array.hpp"
#include "uavad/nn/params.hpp"
#include "uavad/nn/rng.hpp"

namespace uavad {

/// The four network variants. Only uav_adnet has both the GPS input and the
/// copy-crop link from the input grid to the output convolution.
enum class Variant { uav_adnet, uav_adnet_wo_gps, cvae, vae };

inline constexpr std::array<Variant, 4> kAllVariants = {Variant::uav_adnet, Variant::uav_adnet_wo_gps,
                                                        Variant::cvae, Variant::vae};

[[nodiscard]] std::string_view variant_name(Variant v);
[[nodiscard]] Variant variant_from_name(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::uav_adnet;
  GridSpec grid = GridSpec::default_spec();
  int n_o = kNumCategories;
  int n_h = 32;
  int hidden1 = 128;

  [[nodiscard]] bool use_gps() const { return variant == Variant::uav_adnet || variant == Variant::cvae; }
  [[nodiscard]] bool use_copy_crop() const {
    return variant == Variant::uav_adnet || variant == Variant::uav_adnet_wo_gps;
  }
  /// Length of the flattened input grid.
  [[nodiscard]] std::size_t input_size() const { return grid.num_cells() * static_cast<std::size_t>(n_o); }
  /// Width of the decoder dense layer; equals input_size() so it reshapes to the grid.
  [[nodiscard]] std::size_t hidden3() const { return input_size(); }

  static ModelConfig for_variant(Variant v, int n_h = 32) {
    ModelConfig c;
    c.variant = v;
    c.n_h = n_h;
    return c;
  }

  bool operator==(const ModelConfig&) const = default;
};

/// Affine map from raw degrees to network GPS inputs:
/// ((lat - lat_ref) * scale, (lon - lon_ref) * scale).
struct GpsNormalization {
  double lat_ref = 0.0;
  double lon_ref = 0.0;
  double scale = 1e4;

  [[nodiscard]] std::array<double, 2> apply(const GpsLabel& l) const {
    return {(l.latitude - lat_ref) * scale, (l.longitude - lon_ref) * scale};
  }
  bool operator==(const GpsNormalization&) const = default;
};

struct Model {
  ModelConfig config;
  GpsNormalization gps_norm;
  nn::ParamSet params;
};

/// Builds parameters with Glorot-uniform weights and zero biases.
[[nodiscard]] Model init_model(const ModelConfig& config, const GpsNormalization& gps_norm, nn::Rng& rng);

/// Throws ShapeError unless every parameter has the shape the config implies.
void validate_params(const ModelConfig& config, const nn::ParamSet& params);

/// Activations of one forward pass, kept for the backward pass.
struct ForwardCache {
  nn::NumArray x;
  nn::NumArray h1_pre;
  nn::NumArray h1;
  nn::NumArray mu;
  nn::NumArray log_var;
  nn::NumArray eps;
  nn::NumArray dec_in;
  nn::NumArray h3_pre;
  nn::NumArray conv_in;
  nn::NumArray x_hat;  // [cells_y x cells_x x n_o]
};

struct ForwardResult {
  nn::NumArray x_hat;  // flat, length input_size()
  nn::NumArray mu;
  nn::NumArray log_var;
};

/// gps must be present exactly when the variant uses GPS. eps defaults to zero
/// (posterior mean).
[[nodiscard]] ForwardCache forward_cached(const Model& model, std::span<const double> x,
                                          const std::optional<GpsLabel>& gps, const nn::NumArray* eps = nullptr);
[[nodiscard]] ForwardResult forward(const Model& model, std::span<const double> x,
                                    const std::optional<GpsLabel>& gps, const nn::NumArray* eps = nullptr);

struct LossBreakdown {
  double total;
  double rec;
  double reg;
};

/// Reconstruction probabilities are clamped to this interval inside the loss.
inline constexpr double kLossClamp = 1e-7;

/// Single-sample loss: element-summed binary cross-entropy plus the closed-form
/// KL divergence of N(mu, exp(log_var)) from N(0, I). Throws DivergenceError
/// naming the non-finite term.
[[nodiscard]] LossBreakdown loss(std::span<const double> x, std::span<const double> x_hat, std::span<const double> mu,
                                 std::span<const double> log_var);

/// Gradients of weight * loss with respect to x_hat, mu and log_var.
struct LossGrad {
  nn::NumArray d_x_hat;
  nn::NumArray d_mu;
  nn::NumArray d_log_var;
};

[[nodiscard]] LossGrad loss_gradient(const ForwardCache& cache, double weight);

/// Accumulates parameter gradients for one sample into model.params.
void backward(Model& model, const ForwardCache& cache, const LossGrad& grad);

[[nodiscard]] nlohmann::json to_json(const ModelConfig& c);
[[nodiscard]] ModelConfig model_config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const GpsNormalization& g);
[[nodiscard]] GpsNormalization gps_normalization_from_json(const nlohmann::json& j);

}  // namespace uavad
