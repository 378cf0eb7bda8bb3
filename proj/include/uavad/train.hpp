#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "uavad/checkpoint.hpp"
#include "uavad/grid.hpp"
#include "uavad/model.hpp"

namespace uavad {

struct TrainConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 64;
  int max_epochs = 60;
  int patience = 5;
  std::uint64_t seed = 0;
  /// Defaults to the mean training GPS with scale 1e4 when absent.
  std::optional<GpsNormalization> gps_normalization;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean of batch losses
  double val_loss = 0.0;    // mean total loss, eps = 0
  double val_mse = 0.0;
  double first_batch_loss = 0.0;
  double last_batch_loss = 0.0;

  bool operator==(const EpochStats&) const = default;
};

struct TrainResult {
  Checkpoint checkpoint;  // parameters of the best validation epoch
  std::vector<EpochStats> history;
};

struct EvalLoss {
  double total = 0.0;
  double rec = 0.0;
  double reg = 0.0;
  double mse = 0.0;
};

/// Model input for a grid: the flattened tensor.
[[nodiscard]] std::vector<double> model_input(const GridTensor& g);
/// GPS argument for forward(): the label when the variant uses GPS, else none.
/// Throws ConfigError when a GPS variant gets no label.
[[nodiscard]] std::optional<GpsLabel> model_gps(const Model& m, const std::optional<GpsLabel>& l);

/// Mean loss terms and reconstruction MSE over a dataset with eps = 0.
[[nodiscard]] EvalLoss evaluate_loss(const Model& model, std::span<const GridRecord> data);

using EpochCallback = std::function<void(const EpochStats&)>;

/// Mini-batch Adam on the batch-mean loss with a fresh standard-normal eps per
/// sample. Stops after `patience` epochs without a validation-loss improvement
/// or at max_epochs. Throws DivergenceError naming epoch and batch.
[[nodiscard]] TrainResult train(const ModelConfig& config, std::span<const GridRecord> train_set,
                                std::span<const GridRecord> val_set, const TrainConfig& tc,
                                const EpochCallback& on_epoch = {});

[[nodiscard]] nlohmann::json to_json(const EpochStats& s);

}  // namespace uavad
