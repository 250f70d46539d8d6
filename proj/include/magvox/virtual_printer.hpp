#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "magvox/error.hpp"
#include "magvox/gcode.hpp"
#include "magvox/kinematics.hpp"
#include "magvox/machine_config.hpp"
#include "magvox/path_planner.hpp"
#include "magvox/voxel_model.hpp"

namespace magvox {

/// What the machine actually produced at one cure.
struct ReconstructedVoxel {
  Vec3 position{};                // achieved gantry position, mm
  Vec3 magnetization_direction{}; // from achieved gimbal angles
  double azimuth_deg{0.0};
  double inclination_deg{0.0};
  int cure_ms{0};

  friend bool operator==(const ReconstructedVoxel&, const ReconstructedVoxel&) = default;
};

namespace detail {

inline ReconstructedVoxel snapshot(const Vec3& position, double az, double inc, int cure_ms) {
  return {position, spherical_to_cartesian(az, inc), az, inc, cure_ms};
}

inline void require_fingerprint(const gcode::Program& p, const MachineConfig& cfg) {
  const auto expected = fingerprint(cfg);
  if (p.header.fingerprint != expected) {
    throw Error(ErrorKind::Verification,
                fmt::format("config fingerprint mismatch: program {} vs machine {}", p.header.fingerprint, expected));
  }
}

}  // namespace detail

/// Runs a program through the same quantizing planner the controller uses.
inline std::vector<ReconstructedVoxel> execute(const gcode::Program& p, const MachineConfig& cfg) {
  check(cfg);
  detail::require_fingerprint(p, cfg);
  std::vector<ReconstructedVoxel> out;
  MachineState state;
  bool moved = false;
  for (std::size_t k = 0; k < p.instructions.size(); ++k) {
    const auto& instruction = p.instructions[k];
    if (std::holds_alternative<gcode::Home>(instruction)) {
      state = MachineState{};
      moved = false;
    } else if (const auto* m = std::get_if<gcode::MoveTo>(&instruction)) {
      try {
        state = plan_translation(state, {m->x, m->y, m->z}, cfg).state;
      } catch (const Error& e) {
        throw Error(ErrorKind::Verification, fmt::format("instruction {}: {}", k + 1, e.what()));
      }
      moved = true;
    } else if (const auto* o = std::get_if<gcode::OrientMagnet>(&instruction)) {
      try {
        state = plan_orientation(state, o->azimuth_deg, o->inclination_deg, cfg).state;
      } catch (const Error& e) {
        throw Error(ErrorKind::Verification, fmt::format("instruction {}: {}", k + 1, e.what()));
      }
    } else if (const auto* c = std::get_if<gcode::Cure>(&instruction)) {
      if (!moved) throw Error(ErrorKind::Verification, fmt::format("instruction {}: Cure before first MoveTo", k + 1));
      out.push_back(detail::snapshot(state.position(cfg), state.azimuth_deg(cfg), state.inclination_deg(cfg),
                                     c->duration_ms));
    }
  }
  return out;
}

/// Contrast executor: rounds every relative move on its own and drops the
/// remainder, so quantization error accumulates along the program.
inline std::vector<ReconstructedVoxel> execute_naive(const gcode::Program& p, const MachineConfig& cfg) {
  check(cfg);
  detail::require_fingerprint(p, cfg);
  std::vector<ReconstructedVoxel> out;
  std::array<double, 5> requested{};
  std::array<long long, 5> steps{};
  const std::array<double, 5> unit{cfg.x.step_distance(), cfg.y.step_distance(), cfg.z.step_distance(),
                                   cfg.azimuth.degree_per_step, cfg.inclination.degree_per_step};
  auto advance = [&](int motor, double target, double delta) {
    steps[motor] += static_cast<long long>(std::round(delta / unit[motor]));
    requested[motor] = target;
  };
  for (const auto& instruction : p.instructions) {
    if (std::holds_alternative<gcode::Home>(instruction)) {
      requested = {};
      steps = {};
    } else if (const auto* m = std::get_if<gcode::MoveTo>(&instruction)) {
      const double t[3] = {m->x, m->y, m->z};
      for (int i = 0; i < 3; ++i) advance(i, t[i], t[i] - requested[i]);
    } else if (const auto* o = std::get_if<gcode::OrientMagnet>(&instruction)) {
      advance(3, o->azimuth_deg, wrap_degrees(o->azimuth_deg - requested[3]));
      advance(4, o->inclination_deg, o->inclination_deg - requested[4]);
    } else if (const auto* c = std::get_if<gcode::Cure>(&instruction)) {
      out.push_back(detail::snapshot({steps[0] * unit[0], steps[1] * unit[1], steps[2] * unit[2]},
                                     wrap_degrees(steps[3] * unit[3]), steps[4] * unit[4], c->duration_ms));
    }
  }
  return out;
}

struct VoxelFidelity {
  VoxelId id{0};
  Vec3 position_error{};  // |achieved - requested| per axis, mm
  double position_error_mm{0.0};
  double azimuth_error_deg{0.0};
  double inclination_error_deg{0.0};
  double angular_error_deg{0.0};  // angle between requested and achieved direction
  bool pass{true};
};

struct FidelityReport {
  std::size_t expected_count{0};
  std::size_t reconstructed_count{0};
  std::vector<VoxelFidelity> voxels;
  double max_position_error_mm{0.0};
  double mean_position_error_mm{0.0};
  double max_angular_error_deg{0.0};
  double mean_angular_error_deg{0.0};
  std::vector<VoxelId> failing_ids;
  std::string message;
  bool pass{false};
};

/// Pass iff every voxel is within one step per translation axis and one
/// step per rotation axis. Passive voxels are checked for position only.
inline FidelityReport compare(const std::vector<const Voxel*>& expected, const std::vector<ReconstructedVoxel>& r,
                              const MachineConfig& cfg) {
  constexpr double slack = 1e-9;
  FidelityReport report;
  report.expected_count = expected.size();
  report.reconstructed_count = r.size();
  if (expected.size() != r.size()) {
    report.message = fmt::format("expected {} cured voxels, program produced {}", expected.size(), r.size());
    return report;
  }

  for (std::size_t i = 0; i < expected.size(); ++i) {
    const Voxel& v = *expected[i];
    const ReconstructedVoxel& got = r[i];
    VoxelFidelity f;
    f.id = v.id;
    for (int a = 0; a < 3; ++a) {
      f.position_error[a] = std::abs(got.position[a] - v.position[a]);
      if (f.position_error[a] > cfg.translation(static_cast<Axis>(a)).step_distance() + slack) f.pass = false;
    }
    f.position_error_mm = norm(got.position - v.position);
    if (v.magnetization.magnitude > 0.0) {
      const auto want = cartesian_to_spherical(v.magnetization);
      f.azimuth_error_deg = std::abs(wrap_degrees(got.azimuth_deg - want.azimuth_deg));
      f.inclination_error_deg = std::abs(got.inclination_deg - want.inclination_deg);
      f.angular_error_deg = rad_to_deg(angle_between(v.magnetization.direction, got.magnetization_direction));
      if (f.azimuth_error_deg > cfg.azimuth.degree_per_step + slack) f.pass = false;
      if (f.inclination_error_deg > cfg.inclination.degree_per_step + slack) f.pass = false;
    }
    if (!f.pass) report.failing_ids.push_back(v.id);
    report.max_position_error_mm = std::max(report.max_position_error_mm, f.position_error_mm);
    report.max_angular_error_deg = std::max(report.max_angular_error_deg, f.angular_error_deg);
    report.mean_position_error_mm += f.position_error_mm;
    report.mean_angular_error_deg += f.angular_error_deg;
    report.voxels.push_back(f);
  }
  if (!expected.empty()) {
    report.mean_position_error_mm /= static_cast<double>(expected.size());
    report.mean_angular_error_deg /= static_cast<double>(expected.size());
  }
  report.pass = report.failing_ids.empty();
  report.message = report.pass ? "all voxels within one motor step"
                               : fmt::format("{} voxel(s) outside one motor step, first id {}",
                                             report.failing_ids.size(), report.failing_ids.front());
  return report;
}

inline FidelityReport compare(const Design& d, const ToolPath& path, const std::vector<ReconstructedVoxel>& r,
                              const MachineConfig& cfg) {
  const auto index = index_by_id(d);
  std::vector<const Voxel*> expected;
  for (const auto id : path.sequence()) expected.push_back(&lookup(index, id));
  return compare(expected, r, cfg);
}

}  // namespace magvox
