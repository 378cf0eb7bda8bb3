#include "uavad/detector.hpp"

#include <algorithm>

#include "uavad/error.hpp"
#include "uavad/jsonl.hpp"
#include "uavad/train.hpp"

namespace uavad {

bool AnomalyReport::flags(const Cell& c) const {
  return std::any_of(anomalies.begin(), anomalies.end(), [&](const FlaggedCell& f) {
    return f.row == c.row && f.col == c.col && f.category == c.category;
  });
}

AnomalyReport detect(const Model& model, const GridTensor& x, const std::optional<GpsLabel>& gps, double threshold) {
  if (!(x.spec() == model.config.grid) || model.config.n_o != kNumCategories) {
    throw ConfigError("input grid spec does not match the checkpoint");
  }
  if (gps.has_value() != model.config.use_gps()) {
    throw ConfigError(std::string("variant ") + std::string(variant_name(model.config.variant)) +
                      (model.config.use_gps() ? " requires a GPS label" : " does not take a GPS label"));
  }
  const auto input = model_input(x);
  const auto f = forward(model, input, gps);
  AnomalyReport r;
  r.threshold = threshold;
  r.model_variant = model.config.variant;
  r.gps = gps;
  const int cols = x.spec().cells_x();
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double p = f.x_hat[i];
    const bool kept = p >= threshold;
    if ((input[i] == 1.0) == kept) continue;
    const auto cell = i / kNumCategories;
    const FlaggedCell fc{static_cast<Category>(i % kNumCategories), static_cast<int>(cell / cols),
                         static_cast<int>(cell % cols), p};
    (kept ? r.hallucinated : r.anomalies).push_back(fc);
  }
  return r;
}

std::vector<AnomalyReport> detect_batch(const Model& model, const std::filesystem::path& records, double threshold) {
  std::vector<AnomalyReport> out;
  for_each_jsonl(records, [&](const nlohmann::json& j, std::size_t) {
    const auto rec = parse_grid_record(j, model.config.grid);
    out.push_back(detect(model, rec.grid, model_gps(model, rec.gps), threshold));
  });
  return out;
}

nlohmann::json to_json(const AnomalyReport& r) {
  auto list = [](const std::vector<FlaggedCell>& cells) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& c : cells) {
      a.push_back({{"category", category_name(c.category)},
                   {"row", c.row},
                   {"col", c.col},
                   {"reconstruction_prob", c.reconstruction_prob}});
    }
    return a;
  };
  return {{"anomalies", list(r.anomalies)},
          {"hallucinated", list(r.hallucinated)},
          {"threshold", r.threshold},
          {"model_variant", variant_name(r.model_variant)},
          {"gps", r.gps ? nlohmann::json{r.gps->latitude, r.gps->longitude} : nlohmann::json(nullptr)}};
}

}  // namespace uavad
