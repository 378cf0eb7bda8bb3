#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "uavad/checkpoint.hpp"
#include "uavad/error.hpp"
#include "uavad/model.hpp"
#include "uavad/nn/rng.hpp"
#include "uavad/train.hpp"

using namespace uavad;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_config(Variant v) {
  auto c = ModelConfig::for_variant(v, 3);
  c.grid = GridSpec(400, 400, 4, 4);
  c.n_o = 2;
  c.hidden1 = 6;
  return c;
}

std::vector<double> random_input(std::size_t n, nn::Rng& rng, double p = 0.3) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform() < p ? 1.0 : 0.0;
  return x;
}

double batch_loss(const Model& m, const std::vector<std::vector<double>>& xs, const std::vector<GpsLabel>& gps,
                  const std::vector<nn::NumArray>& eps) {
  double l = 0.0;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    const auto g = m.config.use_gps() ? std::optional<GpsLabel>(gps[s]) : std::nullopt;
    const auto f = forward(m, xs[s], g, &eps[s]);
    l += loss(xs[s], f.x_hat.values(), f.mu.values(), f.log_var.values()).total;
  }
  return l;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("uavad_adnet_" + name); }

}  // namespace

TEST_CASE("parameter shapes") {
  nn::Rng rng(1);
  const auto m = init_model(ModelConfig::for_variant(Variant::uav_adnet), {}, rng);
  CHECK(m.params.at("dense1.weight").value.shape() == std::vector<std::size_t>{128, 2048});
  CHECK(m.params.at("mu.weight").value.shape() == std::vector<std::size_t>{32, 128});
  CHECK(m.params.at("dense3.weight").value.shape() == std::vector<std::size_t>{2048, 34});
  CHECK(m.params.at("conv.weight").value.shape() == std::vector<std::size_t>{8, 16});
  CHECK(m.params.at("dense1.bias").value == nn::NumArray({128}));

  const auto v = init_model(ModelConfig::for_variant(Variant::vae), {}, rng);
  CHECK(v.params.at("dense3.weight").value.shape() == std::vector<std::size_t>{2048, 32});
  CHECK(v.params.at("conv.weight").value.shape() == std::vector<std::size_t>{8, 8});
  CHECK(ModelConfig::for_variant(Variant::cvae).use_gps());
  CHECK_FALSE(ModelConfig::for_variant(Variant::uav_adnet_wo_gps).use_gps());
  CHECK(ModelConfig::for_variant(Variant::uav_adnet_wo_gps).use_copy_crop());
}

TEST_CASE("forward contract") {
  nn::Rng rng(2);
  const auto m = init_model(ModelConfig::for_variant(Variant::uav_adnet), {56.17, 10.19, 1e4}, rng);
  const auto x = random_input(2048, rng, 0.01);
  const GpsLabel g(56.1701, 10.1902);
  const auto a = forward(m, x, g);
  const auto b = forward(m, x, g);
  CHECK(a.x_hat == b.x_hat);
  for (const double p : a.x_hat.values()) {
    REQUIRE(p > 0.0);
    REQUIRE(p < 1.0);
  }
  CHECK_THROWS_AS((void)forward(m, x, std::nullopt), ConfigError);
  CHECK_THROWS_AS((void)forward(m, std::vector<double>(100, 0.0), g), ShapeError);

  const auto vae = init_model(ModelConfig::for_variant(Variant::vae), {}, rng);
  CHECK_THROWS_AS((void)forward(vae, x, g), ConfigError);
}

TEST_CASE("loss examples") {
  const std::vector<double> x{1, 0};
  const std::vector<double> half{0.5, 0.5};
  const std::vector<double> zero1{0.0};
  const std::vector<double> one1{1.0};
  const auto l = loss(x, half, zero1, zero1);
  CHECK(l.rec == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  CHECK(l.reg == 0.0);
  CHECK(loss(x, half, one1, zero1).reg == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<double> near{1 - 1e-9, 1e-9};
  CHECK(loss(x, near, zero1, zero1).rec <= 1e-6);

  nn::Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> mu{rng.gaussian() * 3};
    const std::vector<double> lv{rng.gaussian() * 3};
    REQUIRE(loss(x, half, mu, lv).reg >= 0.0);
  }
  const std::vector<double> inf{INFINITY};
  CHECK_THROWS_AS((void)loss(x, half, zero1, inf), DivergenceError);
}

TEST_CASE("full-model gradients match finite differences") {
  for (const auto v : kAllVariants) {
    CAPTURE(variant_name(v));
    nn::Rng rng(11);
    Model m = init_model(tiny_config(v), {56.17, 10.19, 1e4}, rng);
    std::vector<std::vector<double>> xs;
    std::vector<GpsLabel> gps;
    std::vector<nn::NumArray> eps;
    for (int s = 0; s < 2; ++s) {
      xs.push_back(random_input(32, rng));
      gps.emplace_back(56.17 + 1e-4 * rng.gaussian(), 10.19 + 1e-4 * rng.gaussian());
      nn::NumArray e({3});
      for (std::size_t i = 0; i < 3; ++i) e[i] = rng.gaussian();
      eps.push_back(e);
    }
    m.params.zero_grad();
    for (int s = 0; s < 2; ++s) {
      const auto g = m.config.use_gps() ? std::optional<GpsLabel>(gps[s]) : std::nullopt;
      const auto cache = forward_cached(m, xs[s], g, &eps[s]);
      backward(m, cache, loss_gradient(cache, 1.0));
    }
    const double h = 1e-5;
    for (auto& [name, p] : m.params) {
      double worst = 0.0;
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double keep = p.value[i];
        p.value[i] = keep + h;
        const double up = batch_loss(m, xs, gps, eps);
        p.value[i] = keep - h;
        const double down = batch_loss(m, xs, gps, eps);
        p.value[i] = keep;
        const double num = (up - down) / (2 * h);
        const double a = p.grad[i];
        worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-6}));
      }
      CAPTURE(name);
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("checkpoint round trip and errors") {
  nn::Rng rng(4);
  Checkpoint c{init_model(ModelConfig::for_variant(Variant::cvae), {56.17, 10.19, 1e4}, rng), {7, 12.5, 99}};
  const auto path = temp_path("ckpt.json");
  save_checkpoint(c, path);
  const auto back = load_checkpoint(path);
  CHECK(back.meta == c.meta);
  CHECK(back.model.gps_norm == c.model.gps_norm);
  for (int i = 0; i < 10; ++i) {
    const auto x = random_input(2048, rng, 0.02);
    const GpsLabel g(56.17 + 1e-4 * rng.gaussian(), 10.19);
    CHECK(forward(c.model, x, g).x_hat == forward(back.model, x, g).x_hat);
  }

  auto j = checkpoint_to_json(c);
  j["format_version"] = 2;
  CHECK_THROWS_AS((void)checkpoint_from_json(j), CheckpointVersionError);

  j = checkpoint_to_json(c);
  j["params"]["mu.bias"]["shape"] = {31};
  j["params"]["mu.bias"]["data"].erase(0);
  CHECK_THROWS_AS((void)checkpoint_from_json(j), CheckpointShapeError);

  std::string text;
  {
    std::ifstream in(path);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << text.substr(0, text.size() / 2);
  }
  CHECK_THROWS_AS((void)load_checkpoint(path), CorruptFileError);
  fs::remove(path);
  CHECK_THROWS_AS((void)load_checkpoint(path), ConfigError);
}

namespace {

std::vector<GridRecord> toy_records(int n, std::uint64_t seed) {
  nn::Rng rng(seed);
  std::vector<GridRecord> out;
  for (int i = 0; i < n; ++i) {
    GridTensor g(GridSpec::default_spec());
    g.set(2, 3, Category::car);
    g.set(static_cast<int>(rng.uniform_int(0, 15)), 9, Category::pedestrian);
    out.push_back({g, GpsLabel(56.17 + 1e-5 * rng.gaussian(), 10.19)});
  }
  return out;
}

}  // namespace

TEST_CASE("training smoke run") {
  const auto data = toy_records(64, 1);
  std::vector<GridRecord> same(64, data[0]);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.max_epochs = 1;
  tc.seed = 5;
  const auto r = train(ModelConfig::for_variant(Variant::uav_adnet), same, toy_records(8, 2), tc);
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].last_batch_loss < r.history[0].first_batch_loss);
  CHECK(r.checkpoint.meta.epochs_run == 1);
}

TEST_CASE("training is deterministic and stops early") {
  const auto train_set = toy_records(48, 3);
  const auto val_set = toy_records(16, 4);
  TrainConfig tc;
  tc.batch_size = 16;
  tc.max_epochs = 4;
  tc.seed = 9;
  const auto a = train(ModelConfig::for_variant(Variant::cvae), train_set, val_set, tc);
  const auto b = train(ModelConfig::for_variant(Variant::cvae), train_set, val_set, tc);
  CHECK(a.history == b.history);
  CHECK(checkpoint_to_json(a.checkpoint) == checkpoint_to_json(b.checkpoint));

  tc.patience = 1;
  tc.max_epochs = 200;
  tc.lr = 0.05;
  const auto c = train(ModelConfig::for_variant(Variant::vae), train_set, val_set, tc);
  CHECK(c.history.size() < 200);
  double best = c.history[0].val_loss;
  for (const auto& s : c.history) best = std::min(best, s.val_loss);
  CHECK(c.checkpoint.meta.best_val_loss == best);
}

TEST_CASE("training input validation") {
  auto data = toy_records(16, 5);
  TrainConfig tc;
  tc.max_epochs = 1;
  tc.batch_size = 0;
  CHECK_THROWS_AS((void)train(ModelConfig::for_variant(Variant::vae), data, data, tc), ConfigError);
  tc.batch_size = 8;
  for (auto& r : data) r.gps.reset();
  CHECK_THROWS_AS((void)train(ModelConfig::for_variant(Variant::cvae), data, data, tc), ConfigError);
  CHECK_NOTHROW((void)train(ModelConfig::for_variant(Variant::vae), data, data, tc));
}
