#include "uavad/world.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "uavad/error.hpp"

namespace uavad {

namespace {

constexpr std::array<std::string_view, kNumZoneKinds> kZoneNames = {
    "building", "roof",      "forbidden_backside", "forbidden_leftside", "car_park",      "bike_park",
    "road",     "bike_road", "pedestrian_road",    "zebra_crossing",     "grass"};

std::vector<ZoneKind> parse_zone_map(const nlohmann::json& zones, const GridSpec& grid, const std::string& where) {
  constexpr auto kUnset = static_cast<std::uint8_t>(0xff);
  std::vector<std::uint8_t> map(grid.num_cells(), kUnset);
  auto assign = [&](int r, int c, ZoneKind kind) {
    if (r < 0 || r >= grid.cells_y() || c < 0 || c >= grid.cells_x()) {
      throw ConfigError(where + ": zone cell (" + std::to_string(r) + ", " + std::to_string(c) + ") outside grid");
    }
    auto& slot = map[static_cast<std::size_t>(r) * grid.cells_x() + c];
    if (slot != kUnset) {
      throw ConfigError(where + ": cell (" + std::to_string(r) + ", " + std::to_string(c) +
                        ") assigned to more than one zone");
    }
    slot = static_cast<std::uint8_t>(kind);
  };
  for (const auto& z : zones) {
    const auto kind = zone_from_name(z.at("kind").get<std::string>());
    if (z.contains("cells")) {
      for (const auto& cell : z.at("cells")) assign(cell.at(0).get<int>(), cell.at(1).get<int>(), kind);
    } else if (z.contains("rect")) {
      const auto rect = z.at("rect").get<std::vector<int>>();
      if (rect.size() != 4 || rect[0] > rect[2] || rect[1] > rect[3]) {
        throw ConfigError(where + ": rect must be [r0, c0, r1, c1] with r0 <= r1, c0 <= c1");
      }
      for (int r = rect[0]; r <= rect[2]; ++r) {
        for (int c = rect[1]; c <= rect[3]; ++c) assign(r, c, kind);
      }
    } else {
      throw ConfigError(where + ": zone entry needs 'cells' or 'rect'");
    }
  }
  std::vector<ZoneKind> out;
  out.reserve(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] == kUnset) {
      throw ConfigError(where + ": cell (" + std::to_string(i / grid.cells_x()) + ", " +
                        std::to_string(i % grid.cells_x()) + ") has no zone");
    }
    out.push_back(static_cast<ZoneKind>(map[i]));
  }
  return out;
}

}  // namespace

std::string_view zone_name(ZoneKind z) { return kZoneNames.at(static_cast<std::size_t>(z)); }

ZoneKind zone_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kZoneNames.size(); ++i) {
    if (kZoneNames[i] == name) return static_cast<ZoneKind>(i);
  }
  throw ConfigError("unknown zone kind '" + std::string(name) + "'");
}

std::vector<CellIndex> Waypoint::cells_of(ZoneKind kind) const {
  std::vector<CellIndex> out;
  for (std::size_t i = 0; i < zone_map.size(); ++i) {
    if (zone_map[i] == kind) out.push_back({static_cast<int>(i / cells_x), static_cast<int>(i % cells_x)});
  }
  return out;
}

std::size_t WorldSpec::nearest_waypoint(const GpsLabel& l) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const double dl = waypoints[i].gps.latitude - l.latitude;
    const double dn = waypoints[i].gps.longitude - l.longitude;
    const double d = dl * dl + dn * dn;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<RarePlacement> default_rare_list() {
  return {{Category::pedestrian, ZoneKind::roof},
          {Category::truck, ZoneKind::car_park},
          {Category::bicycle, ZoneKind::car_park}};
}

void validate_world(const WorldSpec& w) {
  if (w.waypoints.size() < 2) throw ConfigError("world needs at least 2 waypoints");
  for (std::size_t i = 0; i < w.waypoints.size(); ++i) {
    const auto& wp = w.waypoints[i];
    if (wp.zone_map.size() != w.grid.num_cells() || wp.cells_x != w.grid.cells_x()) {
      throw ConfigError("waypoint " + std::to_string(i) + ": zone map does not cover the grid");
    }
    if (!(wp.gps_jitter >= 0.0)) throw ConfigError("waypoint " + std::to_string(i) + ": negative gps_jitter");
  }
  for (std::size_t r = 0; r < w.rules.size(); ++r) {
    const auto& rule = w.rules[r];
    const std::string where = "rule " + std::to_string(r) + " (" + std::string(category_name(rule.category)) + ")";
    if (rule.allowed_zones.empty()) throw ConfigError(where + ": allowed zones must be non-empty");
    if (rule.min_count < 0 || rule.min_count > rule.max_count) throw ConfigError(where + ": need 0 <= min <= max");
    if (!rule.waypoint_weights.empty() && rule.waypoint_weights.size() != w.waypoints.size()) {
      throw ConfigError(where + ": one weight per waypoint required");
    }
    for (const double wt : rule.waypoint_weights) {
      if (!(wt >= 0.0)) throw ConfigError(where + ": weights must be non-negative");
    }
    for (std::size_t i = 0; i < w.waypoints.size(); ++i) {
      if (rule.max_count == 0 || rule.weight(i) == 0.0) continue;
      std::size_t available = 0;
      for (const auto z : rule.allowed_zones) available += w.waypoints[i].cells_of(z).size();
      if (available == 0) {
        throw ConfigError(where + ": no allowed cells at waypoint " + std::to_string(i) + " (" +
                          w.waypoints[i].name + ")");
      }
    }
    for (const auto& rare : w.rare_list) {
      if (rare.category == rule.category && rule.allowed_zones.contains(rare.zone)) {
        throw ConfigError(where + ": places " + std::string(category_name(rare.category)) + " in " +
                          std::string(zone_name(rare.zone)) + ", which is on the rare list");
      }
    }
  }
}

WorldSpec world_from_json(const nlohmann::json& j) {
  try {
    WorldSpec w;
    w.grid = grid_spec_from_json(j.at("grid"));
    w.seed = j.value("seed", std::uint64_t{0});
    const auto& wps = j.at("waypoints");
    for (std::size_t i = 0; i < wps.size(); ++i) {
      const auto& e = wps[i];
      Waypoint wp;
      wp.name = e.value("name", "waypoint" + std::to_string(i));
      const auto gps = e.at("gps").get<std::vector<double>>();
      if (gps.size() != 2) throw ConfigError("waypoint " + std::to_string(i) + ": gps must be [lat, lon]");
      wp.gps = GpsLabel(gps[0], gps[1]);
      wp.gps_jitter = e.value("gps_jitter", 0.0);
      wp.cells_x = w.grid.cells_x();
      wp.zone_map = parse_zone_map(e.at("zones"), w.grid, "waypoint " + std::to_string(i));
      w.waypoints.push_back(std::move(wp));
    }
    for (const auto& e : j.at("rules")) {
      PlacementRule rule;
      rule.category = category_from_name(e.at("category").get<std::string>());
      for (const auto& z : e.at("zones")) rule.allowed_zones.insert(zone_from_name(z.get<std::string>()));
      const auto count = e.at("count").get<std::vector<int>>();
      if (count.size() != 2) throw ConfigError("rule count must be [min, max]");
      rule.min_count = count[0];
      rule.max_count = count[1];
      if (e.contains("weights")) rule.waypoint_weights = e.at("weights").get<std::vector<double>>();
      w.rules.push_back(std::move(rule));
    }
    if (j.contains("rare_list")) {
      for (const auto& e : j.at("rare_list")) {
        w.rare_list.push_back({category_from_name(e.at(0).get<std::string>()),
                               zone_from_name(e.at(1).get<std::string>())});
      }
    } else {
      w.rare_list = default_rare_list();
    }
    validate_world(w);
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("world file schema error: ") + e.what());
  }
}

nlohmann::json to_json(const WorldSpec& w) {
  nlohmann::json wps = nlohmann::json::array();
  for (const auto& wp : w.waypoints) {
    nlohmann::json zones = nlohmann::json::array();
    for (int k = 0; k < kNumZoneKinds; ++k) {
      const auto kind = static_cast<ZoneKind>(k);
      const auto cells = wp.cells_of(kind);
      if (cells.empty()) continue;
      nlohmann::json list = nlohmann::json::array();
      for (const auto& c : cells) list.push_back({c.row, c.col});
      zones.push_back({{"kind", zone_name(kind)}, {"cells", list}});
    }
    wps.push_back({{"name", wp.name},
                   {"gps", {wp.gps.latitude, wp.gps.longitude}},
                   {"gps_jitter", wp.gps_jitter},
                   {"zones", zones}});
  }
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : w.rules) {
    nlohmann::json zones = nlohmann::json::array();
    for (const auto z : r.allowed_zones) zones.push_back(zone_name(z));
    nlohmann::json e = {{"category", category_name(r.category)},
                        {"zones", zones},
                        {"count", {r.min_count, r.max_count}}};
    if (!r.waypoint_weights.empty()) e["weights"] = r.waypoint_weights;
    rules.push_back(e);
  }
  nlohmann::json rare = nlohmann::json::array();
  for (const auto& r : w.rare_list) rare.push_back({category_name(r.category), zone_name(r.zone)});
  return {{"grid", to_json(w.grid)}, {"seed", w.seed}, {"waypoints", wps}, {"rules", rules}, {"rare_list", rare}};
}

WorldSpec load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open world file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("world file " + path.string() + " is not valid JSON: " + e.what());
  }
  return world_from_json(j);
}

}  // namespace uavad
