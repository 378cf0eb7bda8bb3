#include "uavad/model.hpp"

#include <algorithm>
#include <cmath>

#include "uavad/error.hpp"
#include "uavad/nn/layers.hpp"

namespace uavad {

namespace {

struct Shapes {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> entries;
};

Shapes expected_shapes(const ModelConfig& c) {
  const auto in = c.input_size();
  const auto h1 = static_cast<std::size_t>(c.hidden1);
  const auto nh = static_cast<std::size_t>(c.n_h);
  const auto no = static_cast<std::size_t>(c.n_o);
  const std::size_t dec_in = nh + (c.use_gps() ? 2 : 0);
  const std::size_t conv_in = c.use_copy_crop() ? 2 * no : no;
  return {{{"dense1.weight", {h1, in}},
           {"dense1.bias", {h1}},
           {"mu.weight", {nh, h1}},
           {"mu.bias", {nh}},
           {"log_var.weight", {nh, h1}},
           {"log_var.bias", {nh}},
           {"dense3.weight", {c.hidden3(), dec_in}},
           {"dense3.bias", {c.hidden3()}},
           {"conv.weight", {no, conv_in}},
           {"conv.bias", {no}}}};
}

void check_config(const ModelConfig& c) {
  if (c.n_o < 1 || c.n_h < 1 || c.hidden1 < 1) throw ConfigError("model widths must be positive");
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::uav_adnet: return "uav_adnet";
    case Variant::uav_adnet_wo_gps: return "uav_adnet_wo_gps";
    case Variant::cvae: return "cvae";
    case Variant::vae: return "vae";
  }
  return "?";
}

Variant variant_from_name(std::string_view name) {
  for (const auto v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) +
                    "' (expected uav_adnet, uav_adnet_wo_gps, cvae or vae)");
}

Model init_model(const ModelConfig& config, const GpsNormalization& gps_norm, nn::Rng& rng) {
  check_config(config);
  Model m{config, gps_norm, {}};
  for (const auto& [name, shape] : expected_shapes(config).entries) {
    nn::NumArray value(shape);
    if (shape.size() == 2) nn::init_glorot_uniform(value, shape[1], shape[0], rng);
    m.params.add(name, std::move(value));
  }
  return m;
}

void validate_params(const ModelConfig& config, const nn::ParamSet& params) {
  const auto expected = expected_shapes(config).entries;
  if (params.count() != expected.size()) {
    throw ShapeError("expected " + std::to_string(expected.size()) + " parameter arrays, got " +
                     std::to_string(params.count()));
  }
  for (const auto& [name, shape] : expected) {
    if (!params.contains(name)) throw ShapeError("missing parameter '" + name + "'");
    const auto& actual = params.at(name).value.shape();
    if (actual != shape) {
      throw ShapeError("parameter '" + name + "' has shape " + nn::shape_string(actual) + ", expected " +
                       nn::shape_string(shape));
    }
  }
}

ForwardCache forward_cached(const Model& model, std::span<const double> x, const std::optional<GpsLabel>& gps,
                            const nn::NumArray* eps) {
  const auto& c = model.config;
  const auto& p = model.params;
  if (x.size() != c.input_size()) {
    throw ShapeError("input length " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(c.input_size()));
  }
  if (gps.has_value() != c.use_gps()) {
    throw ConfigError(std::string("variant ") + std::string(variant_name(c.variant)) +
                      (c.use_gps() ? " requires a GPS label" : " does not take a GPS label"));
  }
  const auto rows = static_cast<std::size_t>(c.grid.cells_y());
  const auto cols = static_cast<std::size_t>(c.grid.cells_x());
  const auto no = static_cast<std::size_t>(c.n_o);

  ForwardCache f;
  f.x = nn::NumArray({x.size()}, std::vector<double>(x.begin(), x.end()));
  f.h1_pre = nn::dense_forward(f.x, p.at("dense1.weight").value, p.at("dense1.bias").value);
  f.h1 = nn::relu_forward(f.h1_pre);
  f.mu = nn::dense_forward(f.h1, p.at("mu.weight").value, p.at("mu.bias").value);
  f.log_var = nn::dense_forward(f.h1, p.at("log_var.weight").value, p.at("log_var.bias").value);
  f.eps = eps ? *eps : nn::NumArray(f.mu.shape());
  const auto z = nn::reparameterize(f.mu, f.log_var, f.eps);
  if (c.use_gps()) {
    const auto l = model.gps_norm.apply(*gps);
    f.dec_in = nn::concat(z, nn::NumArray::vector({l[0], l[1]}), 0);
  } else {
    f.dec_in = z;
  }
  f.h3_pre = nn::dense_forward(f.dec_in, p.at("dense3.weight").value, p.at("dense3.bias").value);
  auto h3 = nn::relu_forward(f.h3_pre).reshaped({rows, cols, no});
  f.conv_in = c.use_copy_crop() ? nn::concat(h3, f.x.reshaped({rows, cols, no}), 2) : std::move(h3);
  const auto logits = nn::conv1x1_forward(f.conv_in, p.at("conv.weight").value, p.at("conv.bias").value);
  f.x_hat = nn::sigmoid_forward(logits);
  return f;
}

ForwardResult forward(const Model& model, std::span<const double> x, const std::optional<GpsLabel>& gps,
                      const nn::NumArray* eps) {
  auto f = forward_cached(model, x, gps, eps);
  return {f.x_hat.reshaped({f.x_hat.size()}), std::move(f.mu), std::move(f.log_var)};
}

LossBreakdown loss(std::span<const double> x, std::span<const double> x_hat, std::span<const double> mu,
                   std::span<const double> log_var) {
  if (x.size() != x_hat.size() || mu.size() != log_var.size()) throw ShapeError("loss: shape mismatch");
  double rec = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = std::clamp(x_hat[i], kLossClamp, 1.0 - kLossClamp);
    rec -= x[i] * std::log(p) + (1.0 - x[i]) * std::log(1.0 - p);
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    reg += -log_var[i] - 1.0 + std::exp(log_var[i]) + mu[i] * mu[i];
  }
  reg *= 0.5;
  if (!std::isfinite(rec)) throw DivergenceError("reconstruction loss is not finite");
  if (!std::isfinite(reg)) throw DivergenceError("KL regularizer is not finite");
  return {rec + reg, rec, reg};
}

LossGrad loss_gradient(const ForwardCache& cache, double weight) {
  LossGrad g{nn::NumArray(cache.x_hat.shape()), nn::NumArray(cache.mu.shape()), nn::NumArray(cache.mu.shape())};
  for (std::size_t i = 0; i < cache.x.size(); ++i) {
    const double p = cache.x_hat[i];
    if (p < kLossClamp || p > 1.0 - kLossClamp) continue;  // flat inside the clamp
    const double t = cache.x[i];
    g.d_x_hat[i] = weight * (-t / p + (1.0 - t) / (1.0 - p));
  }
  for (std::size_t i = 0; i < cache.mu.size(); ++i) {
    g.d_mu[i] = weight * cache.mu[i];
    g.d_log_var[i] = weight * 0.5 * (std::exp(cache.log_var[i]) - 1.0);
  }
  return g;
}

void backward(Model& model, const ForwardCache& f, const LossGrad& grad) {
  const auto& c = model.config;
  auto& p = model.params;
  const auto no = static_cast<std::size_t>(c.n_o);

  const auto d_logits = nn::sigmoid_backward(f.x_hat, grad.d_x_hat);
  auto& conv_w = p.at("conv.weight");
  const auto d_conv_in = nn::conv1x1_backward(f.conv_in, conv_w.value, d_logits, conv_w.grad, p.at("conv.bias").grad);
  nn::NumArray d_h3;
  if (c.use_copy_crop()) {
    const auto& s = f.conv_in.shape();
    d_h3 = nn::concat_backward(d_conv_in, {s[0], s[1], no}, {s[0], s[1], no}, 2).first;
  } else {
    d_h3 = d_conv_in;
  }
  const auto d_h3_pre = nn::relu_backward(f.h3_pre, d_h3.reshaped(f.h3_pre.shape()));
  auto& w3 = p.at("dense3.weight");
  const auto d_dec_in = nn::dense_backward(f.dec_in, w3.value, d_h3_pre, w3.grad, p.at("dense3.bias").grad);
  nn::NumArray d_z = d_dec_in;
  if (c.use_gps()) d_z = nn::concat_backward(d_dec_in, f.mu.shape(), {2}, 0).first;

  auto rg = nn::reparameterize_backward(f.log_var, f.eps, d_z);
  for (std::size_t i = 0; i < rg.d_mu.size(); ++i) {
    rg.d_mu[i] += grad.d_mu[i];
    rg.d_log_var[i] += grad.d_log_var[i];
  }
  auto& w_mu = p.at("mu.weight");
  auto& w_lv = p.at("log_var.weight");
  auto d_h1 = nn::dense_backward(f.h1, w_mu.value, rg.d_mu, w_mu.grad, p.at("mu.bias").grad);
  const auto d_h1_lv = nn::dense_backward(f.h1, w_lv.value, rg.d_log_var, w_lv.grad, p.at("log_var.bias").grad);
  for (std::size_t i = 0; i < d_h1.size(); ++i) d_h1[i] += d_h1_lv[i];
  const auto d_h1_pre = nn::relu_backward(f.h1_pre, d_h1);
  auto& w1 = p.at("dense1.weight");
  nn::dense_backward(f.x, w1.value, d_h1_pre, w1.grad, p.at("dense1.bias").grad, /*need_dx=*/false);
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"variant", variant_name(c.variant)},
          {"grid", to_json(c.grid)},
          {"n_o", c.n_o},
          {"n_h", c.n_h},
          {"hidden1", c.hidden1},
          {"hidden3", c.hidden3()},
          {"use_gps", c.use_gps()},
          {"use_copy_crop", c.use_copy_crop()}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.variant = variant_from_name(j.at("variant").get<std::string>());
  c.grid = grid_spec_from_json(j.at("grid"));
  c.n_o = j.at("n_o").get<int>();
  c.n_h = j.at("n_h").get<int>();
  c.hidden1 = j.at("hidden1").get<int>();
  check_config(c);
  if (j.contains("hidden3") && j.at("hidden3").get<std::size_t>() != c.hidden3()) {
    throw ShapeError("hidden3 must equal cells_x * cells_y * n_o");
  }
  return c;
}

nlohmann::json to_json(const GpsNormalization& g) {
  return {{"lat_ref", g.lat_ref}, {"lon_ref", g.lon_ref}, {"scale", g.scale}};
}

GpsNormalization gps_normalization_from_json(const nlohmann::json& j) {
  return {j.at("lat_ref").get<double>(), j.at("lon_ref").get<double>(), j.at("scale").get<double>()};
}

}  // namespace uavad
