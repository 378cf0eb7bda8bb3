#include "uavad/evaluation.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "uavad/error.hpp"
#include "uavad/train.hpp"

namespace uavad {

MetricCounts reconstruction_counts(const GridTensor& x, const GridTensor& x_hat_bin) {
  if (!(x.spec() == x_hat_bin.spec())) throw ShapeError("reconstruction_counts: grid specs differ");
  MetricCounts c;
  const auto a = x.raw();
  const auto b = x_hat_bin.raw();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      ++c.tp;
    } else if (!a[i] && b[i]) {
      ++c.fp;
    } else if (a[i] && !b[i]) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

PrecisionRecallF1 prf1(const MetricCounts& c) {
  const double precision = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  return {precision, recall, f1};
}

double anomaly_accuracy(std::span<const AnomalyReport> reports, std::span<const AnomalyCase> cases) {
  if (reports.size() != cases.size()) {
    throw ShapeError("anomaly_accuracy: " + std::to_string(reports.size()) + " reports for " +
                     std::to_string(cases.size()) + " cases");
  }
  if (cases.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (reports[i].flags(cases[i].injected)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(cases.size());
}

double mse(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size()) throw ShapeError("mse: length mismatch");
  if (x.empty()) return 0.0;
  double se = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) se += (x[i] - x_hat[i]) * (x[i] - x_hat[i]);
  return se / static_cast<double>(x.size());
}

GridTensor binarize(std::span<const double> x_hat, const GridSpec& spec, double threshold) {
  std::vector<double> bits(x_hat.size());
  std::transform(x_hat.begin(), x_hat.end(), bits.begin(), [&](double p) { return p >= threshold ? 1.0 : 0.0; });
  return unflatten(bits, spec);
}

ReconstructionEval evaluate_reconstruction(const Model& model, std::span<const GridRecord> scenes, double threshold,
                                           std::span<const GpsLabel> gps_override) {
  if (!gps_override.empty() && gps_override.size() != scenes.size()) {
    throw ShapeError("GPS override must align with the scenes");
  }
  ReconstructionEval out;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto gps = gps_override.empty() ? scenes[i].gps : std::optional<GpsLabel>(gps_override[i]);
    const auto x = model_input(scenes[i].grid);
    const auto f = forward(model, x, model_gps(model, gps));
    out.counts += reconstruction_counts(scenes[i].grid, binarize(f.x_hat.values(), scenes[i].grid.spec(), threshold));
    out.mse += mse(x, f.x_hat.values());
  }
  if (!scenes.empty()) out.mse /= static_cast<double>(scenes.size());
  out.scores = prf1(out.counts);
  return out;
}

std::string benchmark_file_name(AnomalyTask t) {
  switch (t) {
    case AnomalyTask::task1_private: return "task1.jsonl";
    case AnomalyTask::task2_public: return "task2.jsonl";
    case AnomalyTask::task3_suspicious: return "task3.jsonl";
  }
  return "?";
}

std::map<AnomalyTask, std::vector<BenchmarkRecord>> load_benchmarks(const std::filesystem::path& dir,
                                                                    const GridSpec& spec) {
  std::map<AnomalyTask, std::vector<BenchmarkRecord>> out;
  for (const auto t : kAllTasks) {
    const auto path = dir / benchmark_file_name(t);
    if (!std::filesystem::exists(path)) throw ConfigError("missing benchmark file " + path.string());
    out[t] = read_benchmark(path, spec);
  }
  return out;
}

BenchmarkResult run_benchmark(const WorldSpec& world, const Dataset& data, std::span<const Model> models,
                              const std::map<AnomalyTask, std::vector<BenchmarkRecord>>& benchmarks,
                              double threshold) {
  if (models.empty()) throw ConfigError("run_benchmark: no checkpoints given");
  if (!(data.grid == world.grid)) throw ConfigError("dataset grid spec differs from the world's");
  std::set<Variant> seen;
  for (const auto& m : models) {
    if (!(m.config.grid == world.grid)) {
      throw ConfigError(std::string("checkpoint ") + std::string(variant_name(m.config.variant)) +
                        " has a different grid spec");
    }
    if (!seen.insert(m.config.variant).second) {
      throw ConfigError("two checkpoints share variant " + std::string(variant_name(m.config.variant)));
    }
  }

  BenchmarkResult result;
  result.test_scenes = data.test.size();
  std::map<AnomalyTask, std::vector<AnomalyCase>> cases;
  for (const auto& [task, records] : benchmarks) {
    auto& list = cases[task];
    for (std::size_t i = 0; i < records.size(); ++i) {
      list.push_back({task, records[i].injected, i, world.nearest_waypoint(records[i].gps)});
    }
    result.task_cases[task] = records.size();
  }

  for (const auto v : kAllVariants) {
    const auto it = std::find_if(models.begin(), models.end(), [&](const Model& m) { return m.config.variant == v; });
    if (it == models.end()) continue;
    const Model& model = *it;
    VariantResult vr;
    const auto rec = evaluate_reconstruction(model, data.test, threshold);
    vr.reconstruction = rec.scores;
    vr.counts = rec.counts;
    vr.val_mse = evaluate_reconstruction(model, data.val, threshold).mse;
    for (const auto& [task, records] : benchmarks) {
      std::vector<AnomalyReport> reports;
      reports.reserve(records.size());
      for (const auto& r : records) reports.push_back(detect(model, r.grid, model_gps(model, r.gps), threshold));
      vr.task_accuracy[task] = anomaly_accuracy(reports, cases.at(task));
    }
    result.variants.emplace_back(v, std::move(vr));
  }
  return result;
}

nlohmann::json to_json(const BenchmarkResult& r) {
  nlohmann::json variants = nlohmann::json::object();
  for (const auto& [v, vr] : r.variants) {
    nlohmann::json e = {{"precision", vr.reconstruction.precision},
                        {"recall", vr.reconstruction.recall},
                        {"f1", vr.reconstruction.f1},
                        {"val_mse", vr.val_mse},
                        {"counts", {{"tp", vr.counts.tp}, {"fp", vr.counts.fp}, {"fn", vr.counts.fn}, {"tn", vr.counts.tn}}}};
    for (const auto t : kAllTasks) {
      const auto key = fmt::format("task{}_acc", static_cast<int>(t) + 1);
      const auto it = vr.task_accuracy.find(t);
      e[key] = it == vr.task_accuracy.end() ? nlohmann::json(nullptr) : nlohmann::json(it->second);
    }
    variants[std::string(variant_name(v))] = e;
  }
  nlohmann::json cases = nlohmann::json::object();
  for (const auto& [t, n] : r.task_cases) cases[std::string(task_name(t))] = n;
  return {{"variants", variants}, {"task_cases", cases}, {"test_scenes", r.test_scenes}};
}

std::string format_table(const BenchmarkResult& r) {
  std::string out = fmt::format("{:<18} {:>9} {:>9} {:>9} {:>8} {:>8} {:>8} {:>10}\n", "model", "precision", "recall",
                                "f1", "task1", "task2", "task3", "val_mse");
  auto acc = [](const VariantResult& vr, AnomalyTask t) {
    const auto it = vr.task_accuracy.find(t);
    return it == vr.task_accuracy.end() ? std::string("-") : fmt::format("{:.4f}", it->second);
  };
  for (const auto& [v, vr] : r.variants) {
    out += fmt::format("{:<18} {:>9.4f} {:>9.4f} {:>9.4f} {:>8} {:>8} {:>8} {:>10.6f}\n", variant_name(v),
                       vr.reconstruction.precision, vr.reconstruction.recall, vr.reconstruction.f1,
                       acc(vr, AnomalyTask::task1_private), acc(vr, AnomalyTask::task2_public),
                       acc(vr, AnomalyTask::task3_suspicious), vr.val_mse);
  }
  return out;
}

}  // namespace uavad
