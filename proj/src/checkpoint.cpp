#include "uavad/checkpoint.hpp"

#include <fstream>

#include "uavad/error.hpp"

namespace uavad {

nlohmann::json checkpoint_to_json(const Checkpoint& c) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, p] : c.model.params) {
    params[name] = {{"shape", p.value.shape()}, {"data", p.value.vec()}};
  }
  return {{"format_version", kCheckpointFormatVersion},
          {"config", to_json(c.model.config)},
          {"gps_normalization", to_json(c.model.gps_norm)},
          {"params", std::move(params)},
          {"training_meta",
           {{"epochs_run", c.meta.epochs_run}, {"best_val_loss", c.meta.best_val_loss}, {"seed", c.meta.seed}}}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  int version = 0;
  try {
    version = j.at("format_version").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(std::string("checkpoint has no readable format_version: ") + e.what());
  }
  if (version != kCheckpointFormatVersion) {
    throw CheckpointVersionError("checkpoint format_version " + std::to_string(version) + " is not supported (expected " +
                                 std::to_string(kCheckpointFormatVersion) + ")");
  }
  Checkpoint c;
  try {
    c.model.config = model_config_from_json(j.at("config"));
    c.model.gps_norm = gps_normalization_from_json(j.at("gps_normalization"));
    const auto& meta = j.at("training_meta");
    c.meta = {meta.at("epochs_run").get<int>(), meta.at("best_val_loss").get<double>(),
              meta.at("seed").get<std::uint64_t>()};
    for (const auto& [name, entry] : j.at("params").items()) {
      auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      auto data = entry.at("data").get<std::vector<double>>();
      try {
        c.model.params.add(name, nn::NumArray(std::move(shape), std::move(data)));
      } catch (const ShapeError& e) {
        throw CheckpointShapeError("parameter '" + name + "': " + e.what());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw CorruptFileError(std::string("invalid checkpoint config: ") + e.what());
  } catch (const ShapeError& e) {
    throw CheckpointShapeError(e.what());
  }
  try {
    validate_params(c.model.config, c.model.params);
  } catch (const ShapeError& e) {
    throw CheckpointShapeError(e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint to " + path.string());
  out << checkpoint_to_json(c).dump() << '\n';
  if (!out) throw ConfigError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptFileError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace uavad
