#include "uavad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "uavad/nn/layers.hpp"
#include "uavad/nn/rng.hpp"

namespace uavad {

namespace {

using nn::NumArray;

NumArray random_array(std::vector<std::size_t> shape, nn::Rng& rng, double scale = 1.0) {
  NumArray a(std::move(shape));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = scale * rng.gaussian();
  return a;
}

// Compares analytic with central-difference gradients of f over every
// component of the arrays in `wrt`.
double max_error(const std::function<double()>& f, const std::vector<NumArray*>& wrt,
                 const std::vector<const NumArray*>& analytic, double h, std::size_t& components) {
  double worst = 0.0;
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    NumArray& a = *wrt[k];
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double saved = a[i];
      a[i] = saved + h;
      const double up = f();
      a[i] = saved - h;
      const double down = f();
      a[i] = saved;
      worst = std::max(worst, relative_error((*analytic[k])[i], (up - down) / (2.0 * h)));
      ++components;
    }
  }
  return worst;
}

double weighted_sum(const NumArray& y, const NumArray& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

GradCheckItem layer_item(std::string name) { return {std::move(name), 0.0, 1e-6, 0}; }

GradCheckItem check_dense(nn::Rng& rng, double h) {
  auto item = layer_item("dense");
  auto x = random_array({5}, rng);
  auto W = random_array({3, 5}, rng);
  auto b = random_array({3}, rng);
  const auto w = random_array({3}, rng);
  auto dW = NumArray::zeros_like(W);
  auto db = NumArray::zeros_like(b);
  const auto dx = nn::dense_backward(x, W, w, dW, db);
  item.max_rel_error = max_error([&] { return weighted_sum(nn::dense_forward(x, W, b), w); }, {&x, &W, &b},
                                 {&dx, &dW, &db}, h, item.components);
  return item;
}

GradCheckItem check_relu(nn::Rng& rng, double h) {
  auto item = layer_item("relu");
  auto x = random_array({7}, rng);
  // keep components away from the kink
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) < 0.1) x[i] += 0.2;
  }
  const auto w = random_array({7}, rng);
  const auto dx = nn::relu_backward(x, w);
  item.max_rel_error =
      max_error([&] { return weighted_sum(nn::relu_forward(x), w); }, {&x}, {&dx}, h, item.components);
  return item;
}

GradCheckItem check_sigmoid(nn::Rng& rng, double h) {
  auto item = layer_item("sigmoid");
  auto x = random_array({7}, rng, 2.0);
  const auto w = random_array({7}, rng);
  const auto dx = nn::sigmoid_backward(nn::sigmoid_forward(x), w);
  item.max_rel_error =
      max_error([&] { return weighted_sum(nn::sigmoid_forward(x), w); }, {&x}, {&dx}, h, item.components);
  return item;
}

GradCheckItem check_conv(nn::Rng& rng, double h) {
  auto item = layer_item("conv1x1");
  auto x = random_array({3, 2, 4}, rng);
  auto K = random_array({2, 4}, rng);
  auto b = random_array({2}, rng);
  const auto w = random_array({3, 2, 2}, rng);
  auto dK = NumArray::zeros_like(K);
  auto db = NumArray::zeros_like(b);
  const auto dx = nn::conv1x1_backward(x, K, w, dK, db);
  item.max_rel_error = max_error([&] { return weighted_sum(nn::conv1x1_forward(x, K, b), w); }, {&x, &K, &b},
                                 {&dx, &dK, &db}, h, item.components);
  return item;
}

GradCheckItem check_concat(nn::Rng& rng, double h) {
  auto item = layer_item("concat");
  auto a = random_array({2, 3, 2}, rng);
  auto b = random_array({2, 3, 1}, rng);
  const auto w = random_array({2, 3, 3}, rng);
  const auto [da, db] = nn::concat_backward(w, a.shape(), b.shape(), 2);
  item.max_rel_error =
      max_error([&] { return weighted_sum(nn::concat(a, b, 2), w); }, {&a, &b}, {&da, &db}, h, item.components);
  return item;
}

GradCheckItem check_reparam(nn::Rng& rng, double h) {
  auto item = layer_item("reparameterize");
  auto mu = random_array({4}, rng);
  auto lv = random_array({4}, rng);
  const auto eps = random_array({4}, rng);
  const auto w = random_array({4}, rng);
  const auto g = nn::reparameterize_backward(lv, eps, w);
  item.max_rel_error = max_error([&] { return weighted_sum(nn::reparameterize(mu, lv, eps), w); }, {&mu, &lv},
                                 {&g.d_mu, &g.d_log_var}, h, item.components);
  return item;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckItem check_model_gradients(Variant variant, std::uint64_t seed, double h) {
  nn::Rng rng(seed);
  ModelConfig cfg = ModelConfig::for_variant(variant, 3);
  cfg.grid = GridSpec(400, 400, 4, 4);
  cfg.n_o = 2;
  cfg.hidden1 = 6;
  Model model = init_model(cfg, GpsNormalization{56.17, 10.19, 1e4}, rng);

  constexpr int kBatch = 2;
  std::vector<std::vector<double>> xs;
  std::vector<GpsLabel> gps;
  std::vector<NumArray> eps;
  for (int s = 0; s < kBatch; ++s) {
    std::vector<double> x(cfg.input_size());
    for (auto& v : x) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
    xs.push_back(std::move(x));
    gps.emplace_back(56.17 + 1e-4 * rng.gaussian(), 10.19 + 1e-4 * rng.gaussian());
    eps.push_back(random_array({static_cast<std::size_t>(cfg.n_h)}, rng));
  }
  auto gps_arg = [&](int s) { return cfg.use_gps() ? std::optional<GpsLabel>(gps[s]) : std::nullopt; };

  model.params.zero_grad();
  for (int s = 0; s < kBatch; ++s) {
    const auto cache = forward_cached(model, xs[s], gps_arg(s), &eps[s]);
    backward(model, cache, loss_gradient(cache, 1.0));
  }
  auto total = [&] {
    double l = 0.0;
    for (int s = 0; s < kBatch; ++s) {
      const auto f = forward(model, xs[s], gps_arg(s), &eps[s]);
      l += loss(xs[s], f.x_hat.values(), f.mu.values(), f.log_var.values()).total;
    }
    return l;
  };

  GradCheckItem item{"model/" + std::string(variant_name(variant)), 0.0, 1e-4, 0};
  std::vector<NumArray*> values;
  std::vector<const NumArray*> grads;
  for (auto& [name, p] : model.params) {
    values.push_back(&p.value);
    grads.push_back(&p.grad);
  }
  item.max_rel_error = max_error(total, values, grads, h, item.components);
  return item;
}

std::vector<GradCheckItem> run_gradcheck(std::uint64_t seed, double h) {
  nn::Rng rng(seed);
  std::vector<GradCheckItem> out;
  out.push_back(check_dense(rng, h));
  out.push_back(check_relu(rng, h));
  out.push_back(check_sigmoid(rng, h));
  out.push_back(check_conv(rng, h));
  out.push_back(check_concat(rng, h));
  out.push_back(check_reparam(rng, h));
  for (const auto v : kAllVariants) out.push_back(check_model_gradients(v, seed + 1, h));
  return out;
}

}  // namespace uavad
