#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uavad/grid.hpp"

namespace uavad {

enum class ZoneKind : std::uint8_t {
  building,
  roof,
  forbidden_backside,
  forbidden_leftside,
  car_park,
  bike_park,
  road,
  bike_road,
  pedestrian_road,
  zebra_crossing,
  grass,
};

inline constexpr int kNumZoneKinds = 11;

[[nodiscard]] std::string_view zone_name(ZoneKind z);
[[nodiscard]] ZoneKind zone_from_name(std::string_view name);

/// A camera position on the flight path with its semantic zone map.
struct Waypoint {
  std::string name;
  GpsLabel gps;
  double gps_jitter = 0.0;  // std-dev in degrees
  int cells_x = 0;
  std::vector<ZoneKind> zone_map;  // row-major, one label per cell

  [[nodiscard]] ZoneKind zone(int row, int col) const {
    return zone_map[static_cast<std::size_t>(row) * cells_x + col];
  }
  [[nodiscard]] std::vector<CellIndex> cells_of(ZoneKind kind) const;
};

struct PlacementRule {
  Category category;
  std::set<ZoneKind> allowed_zones;
  int min_count = 0;
  int max_count = 0;
  /// Multiplies the drawn count at each waypoint; empty means 1 everywhere.
  std::vector<double> waypoint_weights;

  [[nodiscard]] double weight(std::size_t waypoint) const {
    return waypoint_weights.empty() ? 1.0 : waypoint_weights.at(waypoint);
  }
};

/// A legal but unusual placement used for suspicious-object anomalies.
struct RarePlacement {
  Category category;
  ZoneKind zone;

  auto operator<=>(const RarePlacement&) const = default;
};

struct WorldSpec {
  GridSpec grid = GridSpec::default_spec();
  std::uint64_t seed = 0;
  std::vector<Waypoint> waypoints;
  std::vector<PlacementRule> rules;
  std::vector<RarePlacement> rare_list;

  /// Index of the waypoint whose GPS is nearest to l (degrees, Euclidean).
  [[nodiscard]] std::size_t nearest_waypoint(const GpsLabel& l) const;
};

/// Built-in rarity list: pedestrian on roof, truck in car park, bicycle in car park.
[[nodiscard]] std::vector<RarePlacement> default_rare_list();

/// Parses and validates a world document. Throws ConfigError with a
/// diagnostic naming the offending element.
[[nodiscard]] WorldSpec world_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const WorldSpec& w);
[[nodiscard]] WorldSpec load_world(const std::filesystem::path& path);

/// Checks every invariant of the world; throws ConfigError.
void validate_world(const WorldSpec& w);

}  // namespace uavad
