#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uavad/grid.hpp"
#include "uavad/nn/rng.hpp"
#include "uavad/world.hpp"

namespace uavad {

struct Scene {
  GridTensor grid;
  GpsLabel gps;
  std::size_t waypoint = 0;
};

/// Draws one normal scene at a waypoint: for every placement rule a count
/// uniform in [min, max] (scaled by the waypoint weight), placed on distinct
/// free cells of the rule's zones. GPS is the waypoint position plus gaussian
/// jitter.
[[nodiscard]] Scene sample_scene(const WorldSpec& world, std::size_t waypoint_index, nn::Rng& rng);

struct SplitFractions {
  double train = 0.6;
  double val = 0.1;
  double test = 0.3;
};

struct SplitSizes {
  std::size_t train;
  std::size_t val;
  std::size_t test;

  bool operator==(const SplitSizes&) const = default;
};

/// val and test are rounded to nearest; train takes the remainder.
[[nodiscard]] SplitSizes split_sizes(std::size_t n, const SplitFractions& f = {});

struct Dataset {
  GridSpec grid = GridSpec::default_spec();
  std::vector<GridRecord> train;
  std::vector<GridRecord> val;
  std::vector<GridRecord> test;
};

/// Scenes cycle through the waypoints round-robin; the first split.train
/// scenes form the training set, then validation, then test.
[[nodiscard]] Dataset generate_dataset(const WorldSpec& world, std::size_t n_samples, std::uint64_t seed,
                                       const SplitFractions& split = {});

/// Writes train.jsonl, val.jsonl, test.jsonl and manifest.json into dir.
void write_dataset(const Dataset& data, const WorldSpec& world, std::uint64_t seed, const std::filesystem::path& dir);

/// generate_dataset followed by write_dataset. Requires n_samples >= 10.
Dataset build_dataset(const WorldSpec& world, std::size_t n_samples, std::uint64_t seed,
                      const std::filesystem::path& dir, const SplitFractions& split = {});

[[nodiscard]] Dataset load_dataset(const std::filesystem::path& dir);
[[nodiscard]] std::vector<GridRecord> read_grid_file(const std::filesystem::path& path, const GridSpec& spec);
void write_grid_file(const std::filesystem::path& path, std::span<const GridRecord> records);

// Anomaly injection ----------------------------------------------------------

enum class AnomalyTask { task1_private, task2_public, task3_suspicious };

inline constexpr std::array<AnomalyTask, 3> kAllTasks = {AnomalyTask::task1_private, AnomalyTask::task2_public,
                                                         AnomalyTask::task3_suspicious};

[[nodiscard]] std::string_view task_name(AnomalyTask t);
[[nodiscard]] AnomalyTask task_from_name(std::string_view name);
/// 1, 2 or 3.
[[nodiscard]] AnomalyTask task_from_number(int n);

struct AnomalyCase {
  AnomalyTask task;
  Cell injected;
  std::size_t scene_index = 0;
  std::size_t waypoint_index = 0;
};

struct Injection {
  GridTensor grid;
  AnomalyCase anomaly;
};

/// Number of redraws allowed when the drawn target cell is already occupied.
inline constexpr int kMaxInjectionDraws = 100;

/// Any object on the building's back side, or a vehicle on its left side.
[[nodiscard]] Injection inject_task1(const GridTensor& scene, const Waypoint& wp, nn::Rng& rng);
/// Pedestrian on a road, bicycle on a road or pedestrian road, or a car, bus,
/// van, truck or trailer on a bike road.
[[nodiscard]] Injection inject_task2(const GridTensor& scene, const Waypoint& wp, nn::Rng& rng);
/// A placement from the rare list.
[[nodiscard]] Injection inject_task3(const GridTensor& scene, const Waypoint& wp,
                                     std::span<const RarePlacement> rare_list, nn::Rng& rng);

[[nodiscard]] Injection inject(AnomalyTask task, const GridTensor& scene, const WorldSpec& world,
                               std::size_t waypoint_index, nn::Rng& rng);

/// One line of an anomaly benchmark file.
struct BenchmarkRecord {
  AnomalyTask task;
  GridTensor grid;
  GpsLabel gps;
  Cell injected;
};

struct Benchmark {
  std::vector<BenchmarkRecord> records;
  std::vector<AnomalyCase> cases;  // aligned with records
  std::size_t skipped = 0;         // scenes where injection was infeasible
};

/// One injection per eligible scene, in scene order.
[[nodiscard]] Benchmark build_benchmark(const WorldSpec& world, std::span<const GridRecord> scenes, AnomalyTask task,
                                        std::uint64_t seed);

[[nodiscard]] nlohmann::json to_json(const BenchmarkRecord& r);
[[nodiscard]] BenchmarkRecord benchmark_record_from_json(const nlohmann::json& j, const GridSpec& spec);
void write_benchmark(const std::filesystem::path& path, std::span<const BenchmarkRecord> records);
/// Errors name the offending line.
[[nodiscard]] std::vector<BenchmarkRecord> read_benchmark(const std::filesystem::path& path, const GridSpec& spec);

}  // namespace uavad
