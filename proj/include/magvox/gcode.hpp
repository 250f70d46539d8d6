#pragma once

// Printer instruction dialect, one instruction per line, LF endings:
//
//   ;MAGVOX v1                 dialect header (line 1)
//   ;CFG <16 hex digits>       machine config fingerprint (line 2)
//   G28                        home all motors
//   G1 X<mm> Y<mm> Z<mm>       absolute gantry move
//   M20 A<deg> B<deg>          magnet azimuth (-180, 180], inclination [0, 180]
//   M10 P<ms>                  cure
//   G4 P<ms>                   dwell
//   ;<text>                    comment
//
// Emitted numbers carry exactly six decimals.

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_set>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "magvox/error.hpp"
#include "magvox/kinematics.hpp"
#include "magvox/machine_config.hpp"
#include "magvox/path_planner.hpp"
#include "magvox/voxel_model.hpp"

namespace magvox::gcode {

inline constexpr std::string_view kDialect = "v1";

struct Home {
  friend bool operator==(const Home&, const Home&) = default;
};
struct MoveTo {
  double x{0.0}, y{0.0}, z{0.0};
  friend bool operator==(const MoveTo&, const MoveTo&) = default;
};
struct OrientMagnet {
  double azimuth_deg{0.0}, inclination_deg{0.0};
  friend bool operator==(const OrientMagnet&, const OrientMagnet&) = default;
};
struct Cure {
  int duration_ms{0};
  friend bool operator==(const Cure&, const Cure&) = default;
};
struct Dwell {
  int ms{0};
  friend bool operator==(const Dwell&, const Dwell&) = default;
};
struct Comment {
  std::string text;
  friend bool operator==(const Comment&, const Comment&) = default;
};

using Instruction = std::variant<Home, MoveTo, OrientMagnet, Cure, Dwell, Comment>;

struct Header {
  std::string dialect{kDialect};
  std::string fingerprint;
  friend bool operator==(const Header&, const Header&) = default;
};

struct Program {
  Header header;
  std::vector<Instruction> instructions;

  std::size_t cure_count() const {
    std::size_t n = 0;
    for (const auto& i : instructions) n += std::holds_alternative<Cure>(i);
    return n;
  }
  friend bool operator==(const Program&, const Program&) = default;
};

/// Rounds to the six-decimal grid used on the wire; never yields -0.
inline double canonical(double v) {
  const auto s = fmt::format("{:.6f}", v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out == 0.0 ? 0.0 : out;
}

inline double canonical_azimuth(double deg) {
  const double a = canonical(wrap_degrees(deg));
  return a == -180.0 ? 180.0 : a;
}

inline std::string format_number(double v) { return fmt::format("{:.6f}", v == 0.0 ? 0.0 : v); }

inline std::string to_line(const Instruction& instruction) {
  return std::visit(
      [](const auto& i) -> std::string {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, Home>) {
          return "G28";
        } else if constexpr (std::is_same_v<T, MoveTo>) {
          return fmt::format("G1 X{} Y{} Z{}", format_number(i.x), format_number(i.y), format_number(i.z));
        } else if constexpr (std::is_same_v<T, OrientMagnet>) {
          return fmt::format("M20 A{} B{}", format_number(i.azimuth_deg), format_number(i.inclination_deg));
        } else if constexpr (std::is_same_v<T, Cure>) {
          return fmt::format("M10 P{}", i.duration_ms);
        } else if constexpr (std::is_same_v<T, Dwell>) {
          return fmt::format("G4 P{}", i.ms);
        } else {
          return ";" + i.text;
        }
      },
      instruction);
}

inline std::string to_text(const Program& p) {
  std::string out = fmt::format(";MAGVOX {}\n;CFG {}\n", p.header.dialect, p.header.fingerprint);
  for (const auto& i : p.instructions) {
    out += to_line(i);
    out += '\n';
  }
  return out;
}

struct Emitted {
  Program program;
  std::string text;
};

/// Translate, orient, cure for every voxel in path order. Passive voxels keep
/// the previous magnet orientation.
inline Emitted emit(const ToolPath& path, const Design& d, const MachineConfig& cfg) {
  check(cfg);
  const auto sequence = path.sequence();
  if (sequence.empty()) throw Error(ErrorKind::Validation, "cannot emit an empty tool path");
  if (sequence.size() != d.voxels.size()) {
    throw Error(ErrorKind::Validation,
                fmt::format("tool path has {} voxels, design has {}", sequence.size(), d.voxels.size()));
  }
  const auto index = index_by_id(d);
  std::unordered_set<VoxelId> seen;

  Program p;
  p.header.fingerprint = fingerprint(cfg);
  p.instructions.emplace_back(Home{});
  OrientMagnet orientation{};
  for (const auto id : sequence) {
    if (!seen.insert(id).second) {
      throw Error(ErrorKind::Validation, fmt::format("voxel {} appears twice in tool path", id));
    }
    const Voxel& v = lookup(index, id);
    for (int a = 0; a < 3; ++a) {
      if (!cfg.travel[a].contains(v.position[a])) {
        throw Error(ErrorKind::Validation,
                    fmt::format("voxel {}: {} = {} mm outside travel [{}, {}]", id,
                                axis_name(static_cast<Axis>(a)), v.position[a], cfg.travel[a].min,
                                cfg.travel[a].max));
      }
    }
    p.instructions.emplace_back(
        MoveTo{canonical(v.position.x), canonical(v.position.y), canonical(v.position.z)});
    if (v.magnetization.magnitude > 0.0) {
      const auto angles = cartesian_to_spherical(v.magnetization);
      orientation = {canonical_azimuth(angles.azimuth_deg), canonical(angles.inclination_deg)};
    }
    p.instructions.emplace_back(orientation);
    if (cfg.dwell_after_orient_ms > 0) p.instructions.emplace_back(Dwell{cfg.dwell_after_orient_ms});
    p.instructions.emplace_back(Cure{cfg.cure_duration_ms});
  }
  return {p, to_text(p)};
}

namespace detail {

struct Word {
  char letter;
  std::string_view number;
};

inline double parse_number(const Word& w, std::size_t line) {
  double v = 0.0;
  const auto* last = w.number.data() + w.number.size();
  const auto [ptr, ec] = std::from_chars(w.number.data(), last, v, std::chars_format::fixed);
  if (w.number.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw ParseError(line, fmt::format("malformed number in word '{}{}'", w.letter, w.number));
  }
  return v;
}

inline int parse_duration(const Word& w, std::size_t line) {
  int v = 0;
  const auto* last = w.number.data() + w.number.size();
  const auto [ptr, ec] = std::from_chars(w.number.data(), last, v);
  if (w.number.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(line, fmt::format("malformed duration in word '{}{}'", w.letter, w.number));
  }
  if (v <= 0) throw ParseError(line, fmt::format("duration must be positive in word '{}{}'", w.letter, w.number));
  return v;
}

inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// Collects the argument words of one command, each letter at most once and
// only from `allowed`.
inline std::array<const Word*, 26> arguments(const std::vector<Word>& words, std::string_view allowed,
                                             std::string_view command, std::size_t line) {
  std::array<const Word*, 26> slots{};
  for (std::size_t k = 1; k < words.size(); ++k) {
    const Word& w = words[k];
    if (allowed.find(w.letter) == std::string_view::npos) {
      throw ParseError(line, fmt::format("unexpected word '{}{}' for {}", w.letter, w.number, command));
    }
    auto& slot = slots[w.letter - 'A'];
    if (slot) throw ParseError(line, fmt::format("duplicate word {} for {}", w.letter, command));
    slot = &w;
  }
  for (char c : allowed) {
    if (!slots[c - 'A']) throw ParseError(line, fmt::format("missing axis word {}", c));
  }
  return slots;
}

}  // namespace detail

/// Parses program text, enforcing both the grammar and the program
/// structure (Home first; every cure preceded by a move and an orientation).
inline Program parse(std::string_view text) {
  Program p;
  std::size_t number = 0;
  std::size_t start = 0;
  int header_lines = 0;
  bool homed = false;
  bool moved_since_cure = false;
  bool oriented_since_cure = false;
  bool ever_moved = false;

  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (header_lines == 0) {
      constexpr std::string_view tag = ";MAGVOX ";
      if (line.substr(0, tag.size()) != tag) throw ParseError(number, "missing ';MAGVOX' dialect header");
      p.header.dialect = std::string(line.substr(tag.size()));
      if (p.header.dialect != kDialect) {
        throw ParseError(number, fmt::format("unsupported dialect '{}'", p.header.dialect));
      }
      ++header_lines;
      continue;
    }
    if (header_lines == 1) {
      constexpr std::string_view tag = ";CFG ";
      if (line.substr(0, tag.size()) != tag) throw ParseError(number, "missing ';CFG' fingerprint header");
      p.header.fingerprint = std::string(line.substr(tag.size()));
      ++header_lines;
      continue;
    }

    if (!line.empty() && line.front() == ';') {
      p.instructions.emplace_back(Comment{std::string(line.substr(1))});
      continue;
    }
    if (const auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
    const auto toks = detail::tokens(line);
    if (toks.empty()) continue;

    std::vector<detail::Word> words;
    for (const auto t : toks) {
      if (t[0] < 'A' || t[0] > 'Z') throw ParseError(number, fmt::format("unknown word '{}'", t));
      words.push_back({t[0], t.substr(1)});
    }
    const std::string_view command = toks.front();
    Instruction instruction;
    if (command == "G28") {
      detail::arguments(words, "", command, number);
      instruction = Home{};
      homed = true;
    } else if (command == "G1") {
      const auto a = detail::arguments(words, "XYZ", command, number);
      instruction = MoveTo{detail::parse_number(*a['X' - 'A'], number), detail::parse_number(*a['Y' - 'A'], number),
                           detail::parse_number(*a['Z' - 'A'], number)};
      moved_since_cure = ever_moved = true;
    } else if (command == "M20") {
      const auto a = detail::arguments(words, "AB", command, number);
      const double az = detail::parse_number(*a['A' - 'A'], number);
      const double inc = detail::parse_number(*a['B' - 'A'], number);
      if (!(az > -180.0 && az <= 180.0)) throw ParseError(number, "azimuth out of range (-180, 180]");
      if (!(inc >= 0.0 && inc <= 180.0)) throw ParseError(number, "inclination out of range [0, 180]");
      instruction = OrientMagnet{az, inc};
      oriented_since_cure = true;
    } else if (command == "M10") {
      const auto a = detail::arguments(words, "P", command, number);
      instruction = Cure{detail::parse_duration(*a['P' - 'A'], number)};
      if (!ever_moved) throw ParseError(number, "Cure before any MoveTo");
      if (!moved_since_cure) throw ParseError(number, "Cure without a MoveTo since the previous cure");
      if (!oriented_since_cure) throw ParseError(number, "Cure without an OrientMagnet since the previous cure");
      moved_since_cure = oriented_since_cure = false;
    } else if (command == "G4") {
      const auto a = detail::arguments(words, "P", command, number);
      instruction = Dwell{detail::parse_duration(*a['P' - 'A'], number)};
    } else {
      throw ParseError(number, fmt::format("unknown word '{}'", command));
    }
    if (!homed) throw ParseError(number, "missing Home (G28) before first instruction");
    p.instructions.push_back(std::move(instruction));
  }
  if (header_lines < 2) throw ParseError(number + (number == 0), "truncated program header");
  if (!homed) throw ParseError(number, "missing Home (G28)");
  return p;
}

}  // namespace magvox::gcode
