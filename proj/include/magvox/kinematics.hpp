#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "magvox/error.hpp"
#include "magvox/machine_config.hpp"
#include "magvox/vec3.hpp"
#include "magvox/voxel_model.hpp"

namespace magvox {

// Motor conversions. Positions and angles passed here are deltas relative to
// the commanded machine pose.

inline double required_trans_revs(double motor_position_mm, double distance_per_rev_mm) {
  if (!(distance_per_rev_mm > 0.0)) throw Error(ErrorKind::Config, "distance_per_rev must be positive");
  return motor_position_mm / distance_per_rev_mm;
}

inline double required_trans_steps(double revs, int steps_per_rev) {
  if (steps_per_rev <= 0) throw Error(ErrorKind::Config, "steps_per_rev must be positive");
  return steps_per_rev * revs;
}

inline double required_revo_steps(double motor_angle_deg, double degree_per_step) {
  if (!(degree_per_step > 0.0)) throw Error(ErrorKind::Config, "degree_per_step must be positive");
  return motor_angle_deg / degree_per_step;
}

inline constexpr double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }
inline constexpr double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }

/// Wraps an angle in degrees into (-180, 180].
inline double wrap_degrees(double a) {
  double r = std::fmod(a, 360.0);
  if (r <= -180.0) r += 360.0;
  else if (r > 180.0) r -= 360.0;
  return r;
}

struct SphericalAngles {
  double azimuth_deg{0.0};      // (-180, 180]
  double inclination_deg{0.0};  // [0, 180]
};

/// Magnet gimbal angles for a magnetization direction. At the poles the
/// azimuth is undefined and reported as 0.
inline SphericalAngles cartesian_to_spherical(const Vec3& direction) {
  const double n = norm(direction);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorKind::Domain, "degenerate magnetization: zero or non-finite direction");
  }
  const Vec3 u = direction / n;
  SphericalAngles out;
  // atan2 form keeps full precision near the poles where acos(z) does not
  out.inclination_deg = rad_to_deg(std::atan2(std::hypot(u.x, u.y), u.z));
  if (u.x == 0.0 && u.y == 0.0) {
    out.azimuth_deg = 0.0;
  } else {
    out.azimuth_deg = rad_to_deg(std::atan2(u.y, u.x));
    if (out.azimuth_deg == -180.0) out.azimuth_deg = 180.0;
  }
  return out;
}

inline SphericalAngles cartesian_to_spherical(const Magnetization& m) {
  return cartesian_to_spherical(m.direction);
}

inline Vec3 spherical_to_cartesian(double azimuth_deg, double inclination_deg) {
  const double az = deg_to_rad(azimuth_deg);
  const double inc = deg_to_rad(inclination_deg);
  return {std::sin(inc) * std::cos(az), std::sin(inc) * std::sin(az), std::cos(inc)};
}

enum class Motor { X = 0, Y = 1, Z = 2, AZ = 3, INC = 4 };

inline const char* motor_name(Motor m) {
  switch (m) {
    case Motor::X: return "X";
    case Motor::Y: return "Y";
    case Motor::Z: return "Z";
    case Motor::AZ: return "AZ";
    case Motor::INC: return "INC";
  }
  return "?";
}

struct StepCommand {
  Motor motor{Motor::X};
  long long steps{0};

  friend bool operator==(const StepCommand&, const StepCommand&) = default;
};

/// Requested gimbal + gantry pose.
struct Pose {
  Vec3 position{};
  double azimuth_deg{0.0};
  double inclination_deg{0.0};
};

/// Machine pose as actually reached, plus the sub-step remainder per motor.
/// Integer step counters are authoritative; the mm / degree values derive
/// from them so repeated moves never accumulate floating error.
struct MachineState {
  std::array<long long, 5> step_count{};  // X, Y, Z, AZ, INC from home
  std::array<double, 5> residual{};       // real steps minus issued steps, |r| <= 0.5

  Vec3 position(const MachineConfig& cfg) const {
    return {step_count[0] * cfg.x.step_distance(), step_count[1] * cfg.y.step_distance(),
            step_count[2] * cfg.z.step_distance()};
  }
  double azimuth_deg(const MachineConfig& cfg) const {
    return wrap_degrees(step_count[3] * cfg.azimuth.degree_per_step);
  }
  double inclination_deg(const MachineConfig& cfg) const {
    return step_count[4] * cfg.inclination.degree_per_step;
  }

  friend bool operator==(const MachineState&, const MachineState&) = default;
};

struct MoveResult {
  std::vector<StepCommand> commands;  // zero-step commands omitted
  MachineState state;
};

namespace detail {

// Rounds half away from zero and carries the remainder.
inline long long issue(MachineState& s, int motor, double real_steps) {
  const double n = std::round(real_steps);
  s.residual[motor] = real_steps - n;
  s.step_count[motor] += static_cast<long long>(n);
  return static_cast<long long>(n);
}

}  // namespace detail

inline void check_travel(const Vec3& target, const MachineConfig& cfg) {
  for (int i = 0; i < 3; ++i) {
    if (!cfg.travel[i].contains(target[i]) || !std::isfinite(target[i])) {
      throw Error(ErrorKind::Validation,
                  fmt::format("travel limit: {} = {} mm outside [{}, {}]", axis_name(static_cast<Axis>(i)),
                              target[i], cfg.travel[i].min, cfg.travel[i].max));
    }
  }
}

/// Gantry move to an absolute target (mm). The delta is taken from the
/// commanded position (achieved + carried residual), so rounding never drifts.
inline MoveResult plan_translation(const MachineState& state, const Vec3& target, const MachineConfig& cfg) {
  check_travel(target, cfg);
  MoveResult out{{}, state};
  for (int i = 0; i < 3; ++i) {
    const MotorSpec& m = cfg.translation(static_cast<Axis>(i));
    const double step = m.step_distance();
    const double commanded = state.step_count[i] * step + state.residual[i] * step;
    const double revs = required_trans_revs(target[i] - commanded, m.distance_per_rev);
    const double real = required_trans_steps(revs, m.steps_per_rev) + state.residual[i];
    if (const auto n = detail::issue(out.state, i, real)) out.commands.push_back({static_cast<Motor>(i), n});
  }
  return out;
}

/// Gimbal move. Azimuth takes the shorter way round; inclination is limited
/// to [0, 180] and never wraps.
inline MoveResult plan_orientation(const MachineState& state, double azimuth_deg, double inclination_deg,
                                   const MachineConfig& cfg) {
  if (!std::isfinite(azimuth_deg) || !std::isfinite(inclination_deg)) {
    throw Error(ErrorKind::Domain, "non-finite magnet angle");
  }
  if (inclination_deg < 0.0 || inclination_deg > 180.0) {
    throw Error(ErrorKind::Validation, fmt::format("inclination {} outside [0, 180]", inclination_deg));
  }
  MoveResult out{{}, state};

  const double az_step = cfg.azimuth.degree_per_step;
  const double az_commanded = (state.step_count[3] + state.residual[3]) * az_step;
  const double az_delta = wrap_degrees(azimuth_deg - az_commanded);
  const double az_real = required_revo_steps(az_delta, az_step) + state.residual[3];
  if (const auto n = detail::issue(out.state, 3, az_real)) out.commands.push_back({Motor::AZ, n});

  const double inc_step = cfg.inclination.degree_per_step;
  const double inc_commanded = (state.step_count[4] + state.residual[4]) * inc_step;
  const double inc_real = required_revo_steps(inclination_deg - inc_commanded, inc_step) + state.residual[4];
  if (const auto n = detail::issue(out.state, 4, inc_real)) out.commands.push_back({Motor::INC, n});
  return out;
}

inline MoveResult plan_move(const MachineState& state, const Pose& target, const MachineConfig& cfg) {
  auto moved = plan_translation(state, target.position, cfg);
  auto oriented = plan_orientation(moved.state, target.azimuth_deg, target.inclination_deg, cfg);
  moved.commands.insert(moved.commands.end(), oriented.commands.begin(), oriented.commands.end());
  moved.state = oriented.state;
  return moved;
}

inline MoveResult plan_move(const MachineState& state, const Vec3& target_pos, const Magnetization& target_m,
                            const MachineConfig& cfg) {
  const auto angles = cartesian_to_spherical(target_m);
  return plan_move(state, Pose{target_pos, angles.azimuth_deg, angles.inclination_deg}, cfg);
}

}  // namespace magvox
