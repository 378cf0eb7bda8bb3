#include "uavad/audit.hpp"

#include <algorithm>

namespace uavad {

bool breaks_private_rule(Category category, ZoneKind zone) {
  if (zone == ZoneKind::forbidden_backside) return true;
  return zone == ZoneKind::forbidden_leftside && category != Category::pedestrian;
}

bool breaks_public_rule(Category category, ZoneKind zone) {
  switch (category) {
    case Category::pedestrian:
      return zone == ZoneKind::road;
    case Category::bicycle:
      return zone == ZoneKind::road || zone == ZoneKind::pedestrian_road;
    case Category::motorbike:
      return false;
    case Category::car:
    case Category::bus:
    case Category::van:
    case Category::truck:
    case Category::trailer:
      return zone == ZoneKind::bike_road;
  }
  return false;
}

std::vector<RuleViolation> audit_scene(const GridTensor& scene, const Waypoint& wp) {
  std::vector<RuleViolation> out;
  for (const auto& cell : scene.cells()) {
    const auto zone = wp.zone(cell.row, cell.col);
    if (breaks_private_rule(cell.category, zone)) out.push_back({cell, zone, AnomalyTask::task1_private});
    if (breaks_public_rule(cell.category, zone)) out.push_back({cell, zone, AnomalyTask::task2_public});
  }
  return out;
}

bool is_rare(Category category, ZoneKind zone, std::span<const RarePlacement> rare_list) {
  return std::find(rare_list.begin(), rare_list.end(), RarePlacement{category, zone}) != rare_list.end();
}

}  // namespace uavad
