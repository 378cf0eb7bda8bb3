#include "uavad/train.hpp"

#include <algorithm>
#include <numeric>

#include "uavad/error.hpp"
#include "uavad/log.hpp"
#include "uavad/nn/rng.hpp"

namespace uavad {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (gps_normalization && !(gps_normalization->scale > 0.0)) throw ConfigError("GPS scale must be positive");
}

std::vector<double> model_input(const GridTensor& g) { return flatten(g); }

std::optional<GpsLabel> model_gps(const Model& m, const std::optional<GpsLabel>& l) {
  if (!m.config.use_gps()) return std::nullopt;
  if (!l) throw ConfigError(std::string("variant ") + std::string(variant_name(m.config.variant)) +
                            " needs a GPS label on every scene");
  return l;
}

EvalLoss evaluate_loss(const Model& model, std::span<const GridRecord> data) {
  EvalLoss out;
  if (data.empty()) return out;
  for (const auto& rec : data) {
    const auto x = model_input(rec.grid);
    const auto f = forward(model, x, model_gps(model, rec.gps));
    const auto l = loss(x, f.x_hat.values(), f.mu.values(), f.log_var.values());
    double se = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) se += (x[i] - f.x_hat[i]) * (x[i] - f.x_hat[i]);
    out.total += l.total;
    out.rec += l.rec;
    out.reg += l.reg;
    out.mse += se / static_cast<double>(x.size());
  }
  const auto n = static_cast<double>(data.size());
  out.total /= n;
  out.rec /= n;
  out.reg /= n;
  out.mse /= n;
  return out;
}

namespace {

GpsNormalization default_normalization(std::span<const GridRecord> data) {
  double lat = 0.0;
  double lon = 0.0;
  for (const auto& r : data) {
    if (!r.gps) throw ConfigError("GPS normalization needs a GPS label on every training scene");
    lat += r.gps->latitude;
    lon += r.gps->longitude;
  }
  const auto n = static_cast<double>(data.size());
  return {lat / n, lon / n, 1e4};
}

}  // namespace

TrainResult train(const ModelConfig& config, std::span<const GridRecord> train_set,
                  std::span<const GridRecord> val_set, const TrainConfig& tc, const EpochCallback& on_epoch) {
  tc.validate();
  if (train_set.empty() || val_set.empty()) throw ConfigError("training and validation sets must be non-empty");
  if (config.n_o != kNumCategories) throw ConfigError("training requires n_o = 8");
  for (const auto* set : {&train_set, &val_set}) {
    for (const auto& r : *set) {
      if (!(r.grid.spec() == config.grid)) throw ConfigError("dataset grid spec does not match the model config");
    }
  }

  nn::Rng rng(tc.seed);
  nn::Rng init_rng = rng.split();
  nn::Rng shuffle_rng = rng.split();
  nn::Rng eps_rng = rng.split();

  if (config.use_gps()) {
    for (const auto* set : {&train_set, &val_set}) {
      for (const auto& r : *set) {
        if (!r.gps) throw ConfigError(std::string(variant_name(config.variant)) + " needs a GPS label on every scene");
      }
    }
  }
  GpsNormalization gps_norm;
  if (tc.gps_normalization) {
    gps_norm = *tc.gps_normalization;
  } else if (config.use_gps()) {
    gps_norm = default_normalization(train_set);
  }
  Model model = init_model(config, gps_norm, init_rng);
  const nn::AdamSettings adam{tc.lr, tc.beta1, tc.beta2, 1e-8};

  logger().info("training {} ({} params) on {} samples, validating on {}; eps resampled per sample",
                variant_name(config.variant), model.params.total_size(), train_set.size(), val_set.size());

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  Model best = model;
  double best_val = 0.0;
  int since_best = 0;
  std::int64_t step = 0;
  const auto batch = static_cast<std::size_t>(tc.batch_size);

  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    EpochStats stats;
    stats.epoch = epoch;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double weight = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& rec = train_set[order[k]];
        const auto x = model_input(rec.grid);
        nn::NumArray eps({static_cast<std::size_t>(config.n_h)});
        for (auto& e : eps.values()) e = eps_rng.gaussian();
        const auto cache = forward_cached(model, x, model_gps(model, rec.gps), &eps);
        LossBreakdown l{};
        try {
          l = loss(x, cache.x_hat.values(), cache.mu.values(), cache.log_var.values());
        } catch (const DivergenceError& e) {
          throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(n_batches) + ": " +
                                e.what());
        }
        batch_loss += weight * l.total;
        backward(model, cache, loss_gradient(cache, weight));
      }
      try {
        nn::adam_step(model.params, adam, ++step);
      } catch (const DivergenceError& e) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(n_batches) + ": " +
                              e.what());
      }
      if (n_batches == 0) stats.first_batch_loss = batch_loss;
      stats.last_batch_loss = batch_loss;
      stats.train_loss += batch_loss;
      ++n_batches;
    }
    stats.train_loss /= static_cast<double>(n_batches);
    const auto val = evaluate_loss(model, val_set);
    stats.val_loss = val.total;
    stats.val_mse = val.mse;
    result.history.push_back(stats);
    logger().info("{} epoch {}: train {:.4f} val {:.4f} (rec {:.4f} reg {:.4f}) mse {:.6f}",
                  variant_name(config.variant), epoch, stats.train_loss, val.total, val.rec, val.reg, val.mse);
    if (on_epoch) on_epoch(stats);

    if (epoch == 1 || val.total < best_val) {
      best_val = val.total;
      best = model;
      since_best = 0;
    } else if (++since_best >= tc.patience) {
      logger().info("early stop after epoch {} (best val {:.4f})", epoch, best_val);
      break;
    }
  }

  result.checkpoint = {std::move(best), {static_cast<int>(result.history.size()), best_val, tc.seed}};
  return result;
}

nlohmann::json to_json(const EpochStats& s) {
  return {{"epoch", s.epoch},
          {"train_loss", s.train_loss},
          {"val_loss", s.val_loss},
          {"val_mse", s.val_mse},
          {"first_batch_loss", s.first_batch_loss},
          {"last_batch_loss", s.last_batch_loss}};
}

}  // namespace uavad
