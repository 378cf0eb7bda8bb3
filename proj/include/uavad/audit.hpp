#pragma once

#include <span>
#include <vector>

#include "uavad/grid.hpp"
#include "uavad/sim.hpp"
#include "uavad/world.hpp"

// Rule auditor. Judges a scene from the zone map alone, with no knowledge of
// the placement rules or the injectors, so it can certify both.

namespace uavad {

struct RuleViolation {
  Cell cell;
  ZoneKind zone;
  AnomalyTask task;  // task1_private or task2_public
};

/// True if placing `category` in `zone` breaks a private rule:
/// anything on the back side, or a non-pedestrian on the left side.
[[nodiscard]] bool breaks_private_rule(Category category, ZoneKind zone);

/// True if placing `category` in `zone` breaks a public rule: a pedestrian
/// on a road away from a zebra crossing, a bicycle on a road or pedestrian
/// road, or a motor vehicle other than a motorbike on a bike road.
[[nodiscard]] bool breaks_public_rule(Category category, ZoneKind zone);

[[nodiscard]] std::vector<RuleViolation> audit_scene(const GridTensor& scene, const Waypoint& wp);

[[nodiscard]] bool is_rare(Category category, ZoneKind zone, std::span<const RarePlacement> rare_list);

}  // namespace uavad
