#pragma once

// JSON views of the planner, validator, virtual printer and preview results.

#include <string>
#include <vector>

#include <json.hpp>

#include "magvox/actuation_preview.hpp"
#include "magvox/path_planner.hpp"
#include "magvox/virtual_printer.hpp"
#include "magvox/voxel_model.hpp"

namespace magvox::reports {

using json = nlohmann::ordered_json;

inline json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline json path_report(const ToolPath& path, const Design& d, const MachineConfig& cfg) {
  json layers = json::array();
  for (const auto& l : path.layers) layers.push_back({{"z_mm", l.z}, {"voxel_ids", l.voxel_ids}});
  return {
      {"design", d.name},
      {"order", to_string(path.order)},
      {"config_fingerprint", fingerprint(cfg)},
      {"voxel_count", path.size()},
      {"layer_count", path.layers.size()},
      {"voxel_ids", path.sequence()},
      {"layers", layers},
      {"total_xy_travel_mm", path.total_xy_travel},
  };
}

inline json validation_report(const ValidationReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"severity", e.severity == Severity::Error ? "error" : "warning"},
                       {"code", e.code},
                       {"ids", e.ids},
                       {"message", e.message}});
  }
  return {{"ok", !r.has_errors()}, {"entries", entries}};
}

inline json adjacency_report(const AdjacencyReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    json item = {{"a", p.a}, {"b", p.b}, {"contact", to_string(p.contact)}};
    if (p.contact == Contact::Overlap) item["overlap_volume_mm3"] = p.overlap_volume_mm3;
    pairs.push_back(item);
  }
  return {{"counts",
           {{"face", r.count(Contact::Face)},
            {"edge", r.count(Contact::Edge)},
            {"corner", r.count(Contact::Corner)},
            {"overlap", r.count(Contact::Overlap)}}},
          {"pairs", pairs}};
}

inline json fidelity_report(const FidelityReport& r) {
  json voxels = json::array();
  for (const auto& v : r.voxels) {
    voxels.push_back({{"id", v.id},
                      {"position_error_mm", vec(v.position_error)},
                      {"position_error_norm_mm", v.position_error_mm},
                      {"azimuth_error_deg", v.azimuth_error_deg},
                      {"inclination_error_deg", v.inclination_error_deg},
                      {"angular_error_deg", v.angular_error_deg},
                      {"pass", v.pass}});
  }
  return {{"pass", r.pass},
          {"message", r.message},
          {"expected_count", r.expected_count},
          {"reconstructed_count", r.reconstructed_count},
          {"max_position_error_mm", r.max_position_error_mm},
          {"mean_position_error_mm", r.mean_position_error_mm},
          {"max_angular_error_deg", r.max_angular_error_deg},
          {"mean_angular_error_deg", r.mean_angular_error_deg},
          {"failing_ids", r.failing_ids},
          {"voxels", voxels}};
}

inline json equilibrium_report(const actuation::ChainModel& c, const actuation::EquilibriumResult& r) {
  std::vector<VoxelId> ids;
  for (const auto& s : c.segments) ids.push_back(s.id);
  const auto bent = actuation::pose(c, r.joint_angles);
  json points = json::array();
  for (const auto& p : bent.points) points.push_back(vec(p));
  double tip_angle = 0.0;
  for (double t : r.joint_angles) tip_angle += t;
  return {{"segment_ids", ids},
          {"joint_stiffness_Nm_per_rad", c.joint_stiffness},
          {"joint_angles_rad", r.joint_angles},
          {"tip_angle_rad", tip_angle},
          {"tip_displacement_mm", vec(r.tip_displacement)},
          {"tip_displacement_norm_mm", norm(r.tip_displacement)},
          {"energy_J", r.energy},
          {"residual_norm_Nm", r.residual_norm},
          {"iterations", r.iterations},
          {"deformed_points_mm", points}};
}

}  // namespace magvox::reports
