#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavad/detector.hpp"
#include "uavad/grid.hpp"
#include "uavad/model.hpp"
#include "uavad/sim.hpp"

namespace uavad {

struct MetricCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  [[nodiscard]] std::uint64_t total() const { return tp + fp + fn + tn; }
  MetricCounts& operator+=(const MetricCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const MetricCounts&) const = default;
};

/// Per-element confusion counts of a binarized reconstruction against its input.
[[nodiscard]] MetricCounts reconstruction_counts(const GridTensor& x, const GridTensor& x_hat_bin);

struct PrecisionRecallF1 {
  double precision;
  double recall;
  double f1;
};

/// Empty denominators give precision 1 (tp + fp = 0), recall 1 (tp + fn = 0)
/// and f1 0 (precision + recall = 0).
[[nodiscard]] PrecisionRecallF1 prf1(const MetricCounts& c);

/// Fraction of cases whose injected (category, row, col) is among the
/// aligned report's anomalies. Throws ShapeError on a length mismatch.
[[nodiscard]] double anomaly_accuracy(std::span<const AnomalyReport> reports, std::span<const AnomalyCase> cases);

/// Mean squared error per element.
[[nodiscard]] double mse(std::span<const double> x, std::span<const double> x_hat);

/// Elements with probability >= threshold become 1.
[[nodiscard]] GridTensor binarize(std::span<const double> x_hat, const GridSpec& spec, double threshold);

struct ReconstructionEval {
  MetricCounts counts;
  PrecisionRecallF1 scores{};
  double mse = 0.0;  // averaged over scenes
};

/// Reconstruction quality over scenes. gps_override, when given, replaces the
/// scene labels (index-aligned) to probe GPS conditioning.
[[nodiscard]] ReconstructionEval evaluate_reconstruction(const Model& model, std::span<const GridRecord> scenes,
                                                         double threshold = kDefaultThreshold,
                                                         std::span<const GpsLabel> gps_override = {});

struct VariantResult {
  PrecisionRecallF1 reconstruction{};
  MetricCounts counts;
  std::map<AnomalyTask, double> task_accuracy;
  double val_mse = 0.0;
};

struct BenchmarkResult {
  std::vector<std::pair<Variant, VariantResult>> variants;  // canonical variant order
  std::map<AnomalyTask, std::size_t> task_cases;
  std::size_t test_scenes = 0;
};

/// Evaluates every model on the held-out normal scenes and on each task's
/// benchmark records. Models must be distinct variants sharing one grid.
[[nodiscard]] BenchmarkResult run_benchmark(const WorldSpec& world, const Dataset& data,
                                            std::span<const Model> models,
                                            const std::map<AnomalyTask, std::vector<BenchmarkRecord>>& benchmarks,
                                            double threshold = kDefaultThreshold);

/// Reads task1.jsonl, task2.jsonl and task3.jsonl from dir. Throws
/// ConfigError naming the first missing file.
[[nodiscard]] std::map<AnomalyTask, std::vector<BenchmarkRecord>> load_benchmarks(const std::filesystem::path& dir,
                                                                                 const GridSpec& spec);
[[nodiscard]] std::string benchmark_file_name(AnomalyTask t);

[[nodiscard]] nlohmann::json to_json(const BenchmarkResult& r);
/// Aligned text table, one row per variant.
[[nodiscard]] std::string format_table(const BenchmarkResult& r);

}  // namespace uavad
