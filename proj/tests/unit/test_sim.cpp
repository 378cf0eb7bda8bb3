#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "uavad/audit.hpp"
#include "uavad/error.hpp"
#include "uavad/sim.hpp"
#include "uavad/world.hpp"

using namespace uavad;
namespace fs = std::filesystem;

namespace {

// 4x4 world with two waypoints.
//   A: row 0 backside, row 1 leftside, row 2 road, row 3 bike_road
//   B: rows 0-1 car_park, row 2 pedestrian_road, row 3 roof
nlohmann::json small_world_json() {
  return nlohmann::json::parse(R"({
    "grid": {"image_width": 400, "image_height": 400, "cells_x": 4, "cells_y": 4},
    "seed": 3,
    "waypoints": [
      {"name": "A", "gps": [56.0, 10.0], "gps_jitter": 1e-6, "zones": [
        {"kind": "forbidden_backside", "rect": [0, 0, 0, 3]},
        {"kind": "forbidden_leftside", "rect": [1, 0, 1, 3]},
        {"kind": "road", "rect": [2, 0, 2, 3]},
        {"kind": "bike_road", "rect": [3, 0, 3, 3]}]},
      {"name": "B", "gps": [56.001, 10.0], "gps_jitter": 1e-6, "zones": [
        {"kind": "car_park", "rect": [0, 0, 1, 3]},
        {"kind": "pedestrian_road", "rect": [2, 0, 2, 3]},
        {"kind": "roof", "rect": [3, 0, 3, 3]}]}
    ],
    "rules": [
      {"category": "car", "zones": ["car_park", "road"], "count": [1, 3]},
      {"category": "pedestrian", "zones": ["pedestrian_road", "forbidden_leftside"], "count": [0, 2]}
    ],
    "rare_list": [["pedestrian", "roof"], ["truck", "car_park"], ["bicycle", "car_park"]]
  })");
}

WorldSpec default_world() { return load_world(UAVAD_WORLD); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("uavad_sim_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("world loading and validation") {
  const auto w = world_from_json(small_world_json());
  CHECK(w.waypoints.size() == 2);
  CHECK(w.waypoints[0].zone(1, 2) == ZoneKind::forbidden_leftside);
  CHECK(w.waypoints[1].cells_of(ZoneKind::roof).size() == 4);
  CHECK(w.nearest_waypoint(GpsLabel(56.0009, 10.0)) == 1);

  auto j = small_world_json();
  j["waypoints"][1]["zones"].erase(2);
  CHECK_THROWS_AS((void)world_from_json(j), ConfigError);

  j = small_world_json();
  j["rules"][0]["count"] = {4, 2};
  CHECK_THROWS_AS((void)world_from_json(j), ConfigError);

  j = small_world_json();
  j["rules"].push_back({{"category", "truck"}, {"zones", {"car_park"}}, {"count", {0, 1}}});
  CHECK_THROWS_AS((void)world_from_json(j), ConfigError);

  j = small_world_json();
  j["rules"][0]["zones"] = {"grass"};
  CHECK_THROWS_AS((void)world_from_json(j), ConfigError);

  j = small_world_json();
  j["waypoints"].erase(1);
  CHECK_THROWS_AS((void)world_from_json(j), ConfigError);

  CHECK(world_from_json(to_json(w)).waypoints[1].zone_map == w.waypoints[1].zone_map);
  CHECK_NOTHROW((void)default_world());
}

TEST_CASE("scene sampling") {
  auto j = small_world_json();
  j["rules"][0]["count"] = {0, 0};
  j["rules"][1]["count"] = {0, 0};
  const auto empty = world_from_json(j);
  nn::Rng rng(1);
  CHECK(sample_scene(empty, 0, rng).grid.popcount() == 0);

  j = small_world_json();
  j["rules"][0]["zones"] = {"car_park"};
  j["rules"][0]["weights"] = {0.0, 1.0};
  const auto parked = world_from_json(j);
  for (int i = 0; i < 50; ++i) {
    const auto s = sample_scene(parked, 1, rng);
    for (const auto& c : s.grid.cells()) {
      if (c.category == Category::car) CHECK(parked.waypoints[1].zone(c.row, c.col) == ZoneKind::car_park);
    }
  }

  const auto w = default_world();
  nn::Rng a(77);
  nn::Rng b(77);
  for (std::size_t wp = 0; wp < w.waypoints.size(); ++wp) {
    const auto sa = sample_scene(w, wp, a);
    const auto sb = sample_scene(w, wp, b);
    CHECK(sa.grid == sb.grid);
    CHECK(sa.gps == sb.gps);
  }
}

TEST_CASE("normal scenes obey every rule") {
  const auto w = default_world();
  nn::Rng rng(5);
  for (int i = 0; i < 600; ++i) {
    const auto wp = static_cast<std::size_t>(i) % w.waypoints.size();
    const auto s = sample_scene(w, wp, rng);
    CHECK(audit_scene(s.grid, w.waypoints[wp]).empty());
    for (const auto& c : s.grid.cells()) {
      REQUIRE_FALSE(is_rare(c.category, w.waypoints[wp].zone(c.row, c.col), w.rare_list));
    }
  }
}

TEST_CASE("split sizes") {
  CHECK(split_sizes(15000) == SplitSizes{9000, 1500, 4500});
  CHECK(split_sizes(10) == SplitSizes{6, 1, 3});
  CHECK(split_sizes(100) == SplitSizes{60, 10, 30});
}

TEST_CASE("dataset files are deterministic") {
  const auto w = default_world();
  const auto d1 = temp_dir("a");
  const auto d2 = temp_dir("b");
  const auto data = build_dataset(w, 100, 17, d1);
  (void)build_dataset(w, 100, 17, d2);
  CHECK(data.train.size() == 60);
  CHECK(data.val.size() == 10);
  CHECK(data.test.size() == 30);
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "manifest.json"}) {
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  const auto manifest = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest.at("seed") == 17);
  const auto back = load_dataset(d1);
  CHECK(back.test.size() == 30);
  CHECK(back.test[4].grid == data.test[4].grid);
  CHECK(back.test[4].gps == data.test[4].gps);
  CHECK_THROWS_AS((void)generate_dataset(w, 9, 1), ConfigError);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("rule auditor") {
  CHECK(breaks_private_rule(Category::pedestrian, ZoneKind::forbidden_backside));
  CHECK(breaks_private_rule(Category::car, ZoneKind::forbidden_leftside));
  CHECK_FALSE(breaks_private_rule(Category::pedestrian, ZoneKind::forbidden_leftside));
  CHECK(breaks_public_rule(Category::car, ZoneKind::bike_road));
  CHECK_FALSE(breaks_public_rule(Category::motorbike, ZoneKind::bike_road));
  CHECK_FALSE(breaks_public_rule(Category::bicycle, ZoneKind::bike_road));
  CHECK_FALSE(breaks_public_rule(Category::pedestrian, ZoneKind::zebra_crossing));
  CHECK(breaks_public_rule(Category::pedestrian, ZoneKind::road));
  CHECK(breaks_public_rule(Category::bicycle, ZoneKind::pedestrian_road));
  const auto rare = default_rare_list();
  CHECK(is_rare(Category::truck, ZoneKind::car_park, rare));
  CHECK(is_rare(Category::pedestrian, ZoneKind::roof, rare));
  CHECK_FALSE(is_rare(Category::car, ZoneKind::car_park, rare));
}

TEST_CASE("injections break exactly the intended rule") {
  const auto w = default_world();
  nn::Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    const auto wp_i = static_cast<std::size_t>(i) % w.waypoints.size();
    const auto& wp = w.waypoints[wp_i];
    const auto scene = sample_scene(w, wp_i, rng).grid;
    for (const auto task : kAllTasks) {
      if (task == AnomalyTask::task1_private && wp.cells_of(ZoneKind::forbidden_backside).empty() &&
          wp.cells_of(ZoneKind::forbidden_leftside).empty()) {
        CHECK_THROWS_AS((void)inject(task, scene, w, wp_i, rng), InjectionInfeasible);
        continue;
      }
      const auto inj = inject(task, scene, w, wp_i, rng);
      const auto& c = inj.anomaly.injected;
      CHECK_FALSE(scene.at(c.row, c.col, c.category));
      CHECK(inj.grid.at(c.row, c.col, c.category));
      CHECK(inj.grid.popcount() == scene.popcount() + 1);
      const auto zone = wp.zone(c.row, c.col);
      switch (task) {
        case AnomalyTask::task1_private:
          CHECK(breaks_private_rule(c.category, zone));
          break;
        case AnomalyTask::task2_public:
          CHECK(breaks_public_rule(c.category, zone));
          break;
        case AnomalyTask::task3_suspicious:
          CHECK(is_rare(c.category, zone, w.rare_list));
          CHECK(audit_scene(inj.grid, wp).empty());
          break;
      }
    }
  }
}

TEST_CASE("injection on the small world") {
  const auto w = world_from_json(small_world_json());
  const GridTensor empty(w.grid);
  nn::Rng rng(2);
  bool saw_pedestrian_backside = false;
  for (int i = 0; i < 200; ++i) {
    const auto c = inject_task1(empty, w.waypoints[0], rng).anomaly.injected;
    const auto zone = w.waypoints[0].zone(c.row, c.col);
    CHECK_FALSE((c.category == Category::pedestrian && zone == ZoneKind::forbidden_leftside));
    saw_pedestrian_backside |= c.category == Category::pedestrian && zone == ZoneKind::forbidden_backside;
  }
  CHECK(saw_pedestrian_backside);
  CHECK_THROWS_AS((void)inject_task1(empty, w.waypoints[1], rng), InjectionInfeasible);

  // every candidate slot taken: the redraw limit is reached
  GridTensor full(w.grid);
  for (const auto& cell : w.waypoints[1].cells_of(ZoneKind::roof)) full.set(cell.row, cell.col, Category::pedestrian);
  for (const auto& cell : w.waypoints[1].cells_of(ZoneKind::car_park)) {
    full.set(cell.row, cell.col, Category::truck);
    full.set(cell.row, cell.col, Category::bicycle);
  }
  CHECK_THROWS_AS((void)inject_task3(full, w.waypoints[1], w.rare_list, rng), InjectionInfeasible);
}

TEST_CASE("benchmark files") {
  const auto w = default_world();
  const auto data = generate_dataset(w, 60, 4);
  const auto b = build_benchmark(w, data.test, AnomalyTask::task2_public, 12);
  CHECK(b.records.size() + b.skipped == data.test.size());
  CHECK(b.records.size() == b.cases.size());
  const auto again = build_benchmark(w, data.test, AnomalyTask::task2_public, 12);
  CHECK(again.records.size() == b.records.size());
  for (std::size_t i = 0; i < b.records.size(); ++i) CHECK(again.records[i].grid == b.records[i].grid);

  const auto t1 = build_benchmark(w, data.test, AnomalyTask::task1_private, 12);
  CHECK(t1.skipped > 0);  // the south waypoint has no forbidden zone

  const auto dir = temp_dir("bench");
  write_benchmark(dir / "t2.jsonl", b.records);
  const auto back = read_benchmark(dir / "t2.jsonl", w.grid);
  REQUIRE(back.size() == b.records.size());
  CHECK(back[0].injected == b.records[0].injected);
  CHECK(back[0].grid == b.records[0].grid);

  std::ofstream(dir / "bad.jsonl") << "{\"task\": \"task2_public\"}\n";
  try {
    (void)read_benchmark(dir / "bad.jsonl", w.grid);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("task names") {
  CHECK(task_from_number(2) == AnomalyTask::task2_public);
  CHECK(task_from_name(task_name(AnomalyTask::task3_suspicious)) == AnomalyTask::task3_suspicious);
  CHECK_THROWS_AS((void)task_from_number(4), ConfigError);
}
