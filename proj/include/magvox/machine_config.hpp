#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "magvox/error.hpp"
#include "magvox/ingest.hpp"

namespace magvox {

enum class Axis { X = 0, Y = 1, Z = 2 };

inline const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

struct MotorSpec {
  int steps_per_rev{200};
  double distance_per_rev{8.0};  // mm, translation motors
  double degree_per_step{1.8};   // degrees, rotation motors

  double step_distance() const { return distance_per_rev / steps_per_rev; }
};

struct TravelRange {
  double min{-50.0};
  double max{50.0};

  bool contains(double v) const { return v >= min && v <= max; }
};

/// How geometry-file positions refer to a voxel box.
enum class PositionConvention { Center, MinCorner };

struct MachineConfig {
  MotorSpec x{};
  MotorSpec y{};
  MotorSpec z{};
  MotorSpec azimuth{};
  MotorSpec inclination{};
  std::array<TravelRange, 3> travel{};
  int cure_duration_ms{1000};
  double voxel_pitch_um{50.0};
  double z_tol_mm{1e-6};
  PositionConvention position_convention{PositionConvention::Center};
  int dwell_after_orient_ms{0};  // 0 disables the post-orientation dwell

  const MotorSpec& translation(Axis a) const {
    return a == Axis::X ? x : (a == Axis::Y ? y : z);
  }
  const TravelRange& limits(Axis a) const { return travel[static_cast<int>(a)]; }
};

/// Throws Config errors on non-positive resolutions, empty ranges or durations.
inline void check(const MachineConfig& cfg) {
  auto motor = [](const MotorSpec& m, const char* name, bool translation) {
    if (m.steps_per_rev <= 0) {
      throw Error(ErrorKind::Config, fmt::format("steps_per_rev.{} must be positive", name));
    }
    if (translation && !(m.distance_per_rev > 0.0)) {
      throw Error(ErrorKind::Config, fmt::format("distance_per_rev.{} must be positive", name));
    }
    if (!translation && !(m.degree_per_step > 0.0)) {
      throw Error(ErrorKind::Config, fmt::format("degree_per_step.{} must be positive", name));
    }
  };
  motor(cfg.x, "x", true);
  motor(cfg.y, "y", true);
  motor(cfg.z, "z", true);
  motor(cfg.azimuth, "az", false);
  motor(cfg.inclination, "inc", false);
  for (int i = 0; i < 3; ++i) {
    if (!(cfg.travel[i].min < cfg.travel[i].max)) {
      throw Error(ErrorKind::Config,
                  fmt::format("travel.{}: min must be below max", axis_name(static_cast<Axis>(i))));
    }
  }
  if (cfg.cure_duration_ms <= 0) throw Error(ErrorKind::Config, "cure_duration_ms must be positive");
  if (cfg.dwell_after_orient_ms < 0) throw Error(ErrorKind::Config, "dwell_after_orient_ms must be >= 0");
  if (!(cfg.voxel_pitch_um > 0.0)) throw Error(ErrorKind::Config, "voxel_pitch_um must be positive");
  if (!(cfg.z_tol_mm >= 0.0)) throw Error(ErrorKind::Config, "z_tol_mm must be >= 0");
}

/// Every key of the config file with its current value, in canonical text form.
inline std::map<std::string, std::string> config_entries(const MachineConfig& cfg) {
  std::map<std::string, std::string> kv;
  auto num = [](double v) { return fmt::format("{}", v); };
  kv["steps_per_rev.x"] = std::to_string(cfg.x.steps_per_rev);
  kv["steps_per_rev.y"] = std::to_string(cfg.y.steps_per_rev);
  kv["steps_per_rev.z"] = std::to_string(cfg.z.steps_per_rev);
  kv["steps_per_rev.az"] = std::to_string(cfg.azimuth.steps_per_rev);
  kv["steps_per_rev.inc"] = std::to_string(cfg.inclination.steps_per_rev);
  kv["distance_per_rev.x"] = num(cfg.x.distance_per_rev);
  kv["distance_per_rev.y"] = num(cfg.y.distance_per_rev);
  kv["distance_per_rev.z"] = num(cfg.z.distance_per_rev);
  kv["degree_per_step.az"] = num(cfg.azimuth.degree_per_step);
  kv["degree_per_step.inc"] = num(cfg.inclination.degree_per_step);
  for (int i = 0; i < 3; ++i) {
    const std::string axis = axis_name(static_cast<Axis>(i));
    kv["travel." + axis + ".min"] = num(cfg.travel[i].min);
    kv["travel." + axis + ".max"] = num(cfg.travel[i].max);
  }
  kv["cure_duration_ms"] = std::to_string(cfg.cure_duration_ms);
  kv["voxel_pitch_um"] = num(cfg.voxel_pitch_um);
  kv["z_tol_mm"] = num(cfg.z_tol_mm);
  kv["position_convention"] =
      cfg.position_convention == PositionConvention::Center ? "center" : "corner";
  kv["dwell_after_orient_ms"] = std::to_string(cfg.dwell_after_orient_ms);
  return kv;
}

inline std::string to_config_text(const MachineConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

/// 64-bit FNV-1a over the canonical config text, as 16 lowercase hex digits.
inline std::string fingerprint(const MachineConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_config_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

/// Parses `key = value` lines. '#' starts a comment; unknown keys are errors.
/// Keys not present keep their defaults.
inline MachineConfig parse_config(std::string_view text) {
  MachineConfig cfg;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = csv_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(number, "expected 'key = value'");
    const std::string key{csv_detail::trim(line.substr(0, eq))};
    std::string_view value = csv_detail::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }

    auto real = [&]() { return csv_detail::parse_real(value, number, key.c_str()); };
    auto integer = [&]() {
      int v = 0;
      const auto* last = value.data() + value.size();
      const auto [ptr, ec] = std::from_chars(value.data(), last, v);
      if (value.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(number, fmt::format("'{}' expects an integer", key));
      }
      return v;
    };

    if (key == "steps_per_rev.x") cfg.x.steps_per_rev = integer();
    else if (key == "steps_per_rev.y") cfg.y.steps_per_rev = integer();
    else if (key == "steps_per_rev.z") cfg.z.steps_per_rev = integer();
    else if (key == "steps_per_rev.az") cfg.azimuth.steps_per_rev = integer();
    else if (key == "steps_per_rev.inc") cfg.inclination.steps_per_rev = integer();
    else if (key == "distance_per_rev.x") cfg.x.distance_per_rev = real();
    else if (key == "distance_per_rev.y") cfg.y.distance_per_rev = real();
    else if (key == "distance_per_rev.z") cfg.z.distance_per_rev = real();
    else if (key == "degree_per_step.az") cfg.azimuth.degree_per_step = real();
    else if (key == "degree_per_step.inc") cfg.inclination.degree_per_step = real();
    else if (key == "travel.x.min") cfg.travel[0].min = real();
    else if (key == "travel.x.max") cfg.travel[0].max = real();
    else if (key == "travel.y.min") cfg.travel[1].min = real();
    else if (key == "travel.y.max") cfg.travel[1].max = real();
    else if (key == "travel.z.min") cfg.travel[2].min = real();
    else if (key == "travel.z.max") cfg.travel[2].max = real();
    else if (key == "cure_duration_ms") cfg.cure_duration_ms = integer();
    else if (key == "voxel_pitch_um") cfg.voxel_pitch_um = real();
    else if (key == "z_tol_mm") cfg.z_tol_mm = real();
    else if (key == "dwell_after_orient_ms") cfg.dwell_after_orient_ms = integer();
    else if (key == "position_convention") {
      if (value == "center") cfg.position_convention = PositionConvention::Center;
      else if (value == "corner") cfg.position_convention = PositionConvention::MinCorner;
      else throw ParseError(number, "position_convention must be 'center' or 'corner'");
    } else {
      throw ParseError(number, fmt::format("unknown config key '{}'", key));
    }
  }
  check(cfg);
  return cfg;
}

}  // namespace magvox
