#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "uavad/grid.hpp"
#include "uavad/model.hpp"

namespace uavad {

struct FlaggedCell {
  Category category;
  int row;
  int col;
  double reconstruction_prob;

  bool operator==(const FlaggedCell&) const = default;
};

/// Cells present in the input but dropped by the thresholded reconstruction.
struct AnomalyReport {
  std::vector<FlaggedCell> anomalies;     // x = 1, x_hat < threshold; sorted by (row, col, category)
  std::vector<FlaggedCell> hallucinated;  // x = 0, x_hat >= threshold; diagnostics only
  double threshold = 0.5;
  Variant model_variant = Variant::uav_adnet;
  std::optional<GpsLabel> gps;

  [[nodiscard]] bool flags(const Cell& c) const;
};

inline constexpr double kDefaultThreshold = 0.5;

/// Reconstructs x with eps = 0 and compares it with the input. gps must be
/// present exactly when the model's variant uses GPS.
[[nodiscard]] AnomalyReport detect(const Model& model, const GridTensor& x, const std::optional<GpsLabel>& gps,
                                   double threshold = kDefaultThreshold);

/// One report per record of a grid or benchmark JSON Lines file, in order.
/// The record's GPS is used only by GPS variants.
[[nodiscard]] std::vector<AnomalyReport> detect_batch(const Model& model, const std::filesystem::path& records,
                                                      double threshold = kDefaultThreshold);

[[nodiscard]] nlohmann::json to_json(const AnomalyReport& r);

}  // namespace uavad
