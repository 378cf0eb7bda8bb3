#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "uavad/model.hpp"

namespace uavad {

inline constexpr int kCheckpointFormatVersion = 1;

struct TrainingMeta {
  int epochs_run = 0;
  double best_val_loss = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const TrainingMeta&) const = default;
};

struct Checkpoint {
  Model model;
  TrainingMeta meta;
};

/// Versioned JSON document: format_version, config, gps_normalization,
/// params (name -> {shape, data}, lexicographic name order), training_meta.
[[nodiscard]] nlohmann::json checkpoint_to_json(const Checkpoint& c);

/// Throws CheckpointVersionError, CheckpointShapeError or CorruptFileError.
[[nodiscard]] Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
/// Throws ConfigError if the file cannot be opened, otherwise as checkpoint_from_json.
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace uavad
