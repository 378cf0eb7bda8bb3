#include "uavad/sim.hpp"

#include <algorithm>
#include <cmath>

#include "uavad/error.hpp"
#include "uavad/jsonl.hpp"

namespace uavad {

namespace {

struct Placement {
  Category category;
  CellIndex cell;
};

std::vector<CellIndex> cells_in(const Waypoint& wp, const std::set<ZoneKind>& zones) {
  std::vector<CellIndex> out;
  for (const auto z : zones) {
    const auto cells = wp.cells_of(z);
    out.insert(out.end(), cells.begin(), cells.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void add_pairs(std::vector<Placement>& out, const Waypoint& wp, ZoneKind zone, std::initializer_list<Category> cats) {
  for (const auto& cell : wp.cells_of(zone)) {
    for (const auto c : cats) out.push_back({c, cell});
  }
}

Injection inject_from(AnomalyTask task, const GridTensor& scene, const std::vector<Placement>& candidates,
                      nn::Rng& rng) {
  if (candidates.empty()) {
    throw InjectionInfeasible(std::string(task_name(task)) + ": waypoint has no violating placements");
  }
  for (int draw = 0; draw < kMaxInjectionDraws; ++draw) {
    const auto& p = candidates[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
    if (scene.at(p.cell.row, p.cell.col, p.category)) continue;
    Injection inj{scene, {task, {p.cell.row, p.cell.col, p.category}, 0, 0}};
    inj.grid.set(p.cell.row, p.cell.col, p.category);
    return inj;
  }
  throw InjectionInfeasible(std::string(task_name(task)) + ": every drawn target cell was occupied after " +
                            std::to_string(kMaxInjectionDraws) + " draws");
}

constexpr std::initializer_list<Category> kAllCategories = {
    Category::car,   Category::pedestrian, Category::bus,       Category::van,
    Category::truck, Category::bicycle,    Category::motorbike, Category::trailer};

constexpr std::initializer_list<Category> kVehicles = {Category::car,     Category::bus,       Category::van,
                                                       Category::truck,   Category::bicycle,   Category::motorbike,
                                                       Category::trailer};

}  // namespace

Scene sample_scene(const WorldSpec& world, std::size_t waypoint_index, nn::Rng& rng) {
  if (waypoint_index >= world.waypoints.size()) {
    throw ConfigError("waypoint index " + std::to_string(waypoint_index) + " out of range");
  }
  const auto& wp = world.waypoints[waypoint_index];
  GridTensor grid(world.grid);
  for (const auto& rule : world.rules) {
    const auto drawn = rng.uniform_int(rule.min_count, rule.max_count);
    auto n = static_cast<std::size_t>(std::llround(static_cast<double>(drawn) * rule.weight(waypoint_index)));
    std::vector<CellIndex> free;
    for (const auto& c : cells_in(wp, rule.allowed_zones)) {
      if (!grid.at(c.row, c.col, rule.category)) free.push_back(c);
    }
    n = std::min(n, free.size());
    for (std::size_t k = 0; k < n; ++k) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(k),
                                                              static_cast<std::int64_t>(free.size()) - 1));
      std::swap(free[k], free[j]);
      grid.set(free[k].row, free[k].col, rule.category);
    }
  }
  const double lat = wp.gps.latitude + wp.gps_jitter * rng.gaussian();
  const double lon = wp.gps.longitude + wp.gps_jitter * rng.gaussian();
  return {std::move(grid), GpsLabel(lat, lon), waypoint_index};
}

SplitSizes split_sizes(std::size_t n, const SplitFractions& f) {
  const auto val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * f.val));
  const auto test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * f.test));
  if (val + test > n) throw ConfigError("split fractions exceed the sample count");
  return {n - val - test, val, test};
}

Dataset generate_dataset(const WorldSpec& world, std::size_t n_samples, std::uint64_t seed,
                         const SplitFractions& split) {
  if (n_samples < 10) throw ConfigError("need at least 10 samples, got " + std::to_string(n_samples));
  const auto sizes = split_sizes(n_samples, split);
  nn::Rng rng(seed);
  Dataset d;
  d.grid = world.grid;
  for (std::size_t i = 0; i < n_samples; ++i) {
    auto s = sample_scene(world, i % world.waypoints.size(), rng);
    auto& bucket = i < sizes.train ? d.train : (i < sizes.train + sizes.val ? d.val : d.test);
    bucket.push_back({std::move(s.grid), s.gps});
  }
  return d;
}

void write_grid_file(const std::filesystem::path& path, std::span<const GridRecord> records) {
  std::vector<nlohmann::json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r.grid, r.gps));
  write_jsonl(path, lines);
}

std::vector<GridRecord> read_grid_file(const std::filesystem::path& path, const GridSpec& spec) {
  std::vector<GridRecord> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(parse_grid_record(j, spec)); });
  return out;
}

void write_dataset(const Dataset& data, const WorldSpec& world, std::uint64_t seed, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  write_grid_file(dir / "train.jsonl", data.train);
  write_grid_file(dir / "val.jsonl", data.val);
  write_grid_file(dir / "test.jsonl", data.test);
  const nlohmann::json manifest = {
      {"grid", to_json(data.grid)},
      {"world_seed", world.seed},
      {"seed", seed},
      {"n_samples", data.train.size() + data.val.size() + data.test.size()},
      {"split", {{"train", data.train.size()}, {"val", data.val.size()}, {"test", data.test.size()}}},
      {"files", {{"train", "train.jsonl"}, {"val", "val.jsonl"}, {"test", "test.jsonl"}}}};
  write_json(dir / "manifest.json", manifest);
}

Dataset build_dataset(const WorldSpec& world, std::size_t n_samples, std::uint64_t seed,
                      const std::filesystem::path& dir, const SplitFractions& split) {
  auto d = generate_dataset(world, n_samples, seed, split);
  write_dataset(d, world, seed, dir);
  return d;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  Dataset d;
  try {
    d.grid = grid_spec_from_json(manifest.at("grid"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError((dir / "manifest.json").string() + ": " + e.what());
  }
  d.train = read_grid_file(dir / "train.jsonl", d.grid);
  d.val = read_grid_file(dir / "val.jsonl", d.grid);
  d.test = read_grid_file(dir / "test.jsonl", d.grid);
  return d;
}

// Injection --------------------------------------------------------------------

std::string_view task_name(AnomalyTask t) {
  switch (t) {
    case AnomalyTask::task1_private: return "task1_private";
    case AnomalyTask::task2_public: return "task2_public";
    case AnomalyTask::task3_suspicious: return "task3_suspicious";
  }
  return "?";
}

AnomalyTask task_from_name(std::string_view name) {
  for (const auto t : kAllTasks) {
    if (task_name(t) == name) return t;
  }
  throw ConfigError("unknown anomaly task '" + std::string(name) + "'");
}

AnomalyTask task_from_number(int n) {
  if (n < 1 || n > 3) throw ConfigError("task must be 1, 2 or 3");
  return kAllTasks[static_cast<std::size_t>(n - 1)];
}

Injection inject_task1(const GridTensor& scene, const Waypoint& wp, nn::Rng& rng) {
  std::vector<Placement> candidates;
  add_pairs(candidates, wp, ZoneKind::forbidden_backside, kAllCategories);
  add_pairs(candidates, wp, ZoneKind::forbidden_leftside, kVehicles);
  return inject_from(AnomalyTask::task1_private, scene, candidates, rng);
}

Injection inject_task2(const GridTensor& scene, const Waypoint& wp, nn::Rng& rng) {
  std::vector<Placement> candidates;
  add_pairs(candidates, wp, ZoneKind::road, {Category::pedestrian, Category::bicycle});
  add_pairs(candidates, wp, ZoneKind::pedestrian_road, {Category::bicycle});
  add_pairs(candidates, wp, ZoneKind::bike_road,
            {Category::car, Category::bus, Category::van, Category::truck, Category::trailer});
  std::sort(candidates.begin(), candidates.end(), [](const Placement& a, const Placement& b) {
    return std::tie(a.cell, a.category) < std::tie(b.cell, b.category);
  });
  return inject_from(AnomalyTask::task2_public, scene, candidates, rng);
}

Injection inject_task3(const GridTensor& scene, const Waypoint& wp, std::span<const RarePlacement> rare_list,
                       nn::Rng& rng) {
  std::vector<Placement> candidates;
  for (const auto& rare : rare_list) add_pairs(candidates, wp, rare.zone, {rare.category});
  return inject_from(AnomalyTask::task3_suspicious, scene, candidates, rng);
}

Injection inject(AnomalyTask task, const GridTensor& scene, const WorldSpec& world, std::size_t waypoint_index,
                 nn::Rng& rng) {
  const auto& wp = world.waypoints.at(waypoint_index);
  Injection inj = [&] {
    switch (task) {
      case AnomalyTask::task1_private: return inject_task1(scene, wp, rng);
      case AnomalyTask::task2_public: return inject_task2(scene, wp, rng);
      case AnomalyTask::task3_suspicious: return inject_task3(scene, wp, world.rare_list, rng);
    }
    throw ConfigError("unknown task");
  }();
  inj.anomaly.waypoint_index = waypoint_index;
  return inj;
}

Benchmark build_benchmark(const WorldSpec& world, std::span<const GridRecord> scenes, AnomalyTask task,
                          std::uint64_t seed) {
  nn::Rng rng(seed);
  Benchmark b;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!(scenes[i].grid.spec() == world.grid)) throw ConfigError("scene grid spec does not match the world");
    nn::Rng scene_rng = rng.split();
    if (!scenes[i].gps) throw ConfigError("scene " + std::to_string(i) + " has no GPS label to locate its waypoint");
    const auto wp = world.nearest_waypoint(*scenes[i].gps);
    try {
      auto inj = inject(task, scenes[i].grid, world, wp, scene_rng);
      inj.anomaly.scene_index = i;
      b.records.push_back({task, std::move(inj.grid), *scenes[i].gps, inj.anomaly.injected});
      b.cases.push_back(inj.anomaly);
    } catch (const InjectionInfeasible&) {
      ++b.skipped;
    }
  }
  return b;
}

nlohmann::json to_json(const BenchmarkRecord& r) {
  auto j = to_json(r.grid, r.gps);
  return {{"task", task_name(r.task)},
          {"gps", j.at("gps")},
          {"cells", j.at("cells")},
          {"injected", {category_name(r.injected.category), r.injected.row, r.injected.col}}};
}

BenchmarkRecord benchmark_record_from_json(const nlohmann::json& j, const GridSpec& spec) {
  auto grid = parse_grid_record(j, spec);
  const auto& inj = j.at("injected");
  if (!inj.is_array() || inj.size() != 3) throw ConfigError("injected must be [category, row, col]");
  const Cell cell{inj.at(1).get<int>(), inj.at(2).get<int>(), category_from_name(inj.at(0).get<std::string>())};
  if (cell.row < 0 || cell.row >= spec.cells_y() || cell.col < 0 || cell.col >= spec.cells_x()) {
    throw ConfigError("injected cell outside grid");
  }
  if (!grid.gps) throw ConfigError("benchmark record has no gps");
  return {task_from_name(j.at("task").get<std::string>()), std::move(grid.grid), *grid.gps, cell};
}

void write_benchmark(const std::filesystem::path& path, std::span<const BenchmarkRecord> records) {
  std::vector<nlohmann::json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_jsonl(path, lines);
}

std::vector<BenchmarkRecord> read_benchmark(const std::filesystem::path& path, const GridSpec& spec) {
  std::vector<BenchmarkRecord> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(benchmark_record_from_json(j, spec)); });
  return out;
}

}  // namespace uavad
