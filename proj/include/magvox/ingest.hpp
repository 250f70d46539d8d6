#pragma once

// Readers and writers for the two per-voxel datasets exported from the design
// tool: magnetization (`<name>.mag.csv`) and geometry (`<name>.geom.csv`).
//
// Format: UTF-8, comma separated, LF or CRLF, one mandatory header row with
// exact lowercase column names. Numbers use '.' as decimal point and may be in
// scientific notation. Extra or reordered columns are rejected.
//
//   id,mx,my,mz[,passive]
//   id,l,w,h,x,y,z            (l, w, h, x, y, z in mm)

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "magvox/error.hpp"

namespace magvox {

using VoxelId = std::uint64_t;

struct MagRecord {
  VoxelId id{0};
  double mx{0.0};
  double my{0.0};
  double mz{0.0};
  bool passive{false};

  friend bool operator==(const MagRecord&, const MagRecord&) = default;
};

struct GeomRecord {
  VoxelId id{0};
  double l{0.0};
  double w{0.0};
  double h{0.0};
  double x{0.0};
  double y{0.0};
  double z{0.0};

  friend bool operator==(const GeomRecord&, const GeomRecord&) = default;
};

namespace csv_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

struct Line {
  std::size_t number;
  std::string_view text;
};

// Non-blank lines with their 1-based line numbers; strips a UTF-8 BOM.
inline std::vector<Line> lines_of(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    const auto line = trim(text.substr(start, end - start));
    if (!line.empty()) out.push_back({number, line});
    start = end + 1;
  }
  return out;
}

inline double parse_real(std::string_view field, std::size_t line, const char* column) {
  std::string_view s = field;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (s.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ParseError(line, fmt::format("column '{}': not a finite number: '{}'", column, field));
  }
  return value;
}

inline VoxelId parse_id(std::string_view field, std::size_t line) {
  VoxelId value = 0;
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(line, fmt::format("column 'id': not a positive integer: '{}'", field));
  }
  if (value == 0) throw ParseError(line, "column 'id': id must be positive");
  return value;
}

inline std::string header_of(const std::vector<std::string_view>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  return s;
}

inline std::vector<Line> data_lines(std::string_view text, std::string_view expected,
                                    std::string_view expected_alt, bool& alt) {
  auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorKind::Input, "empty input");
  const auto header = header_of(split(lines.front().text));
  alt = false;
  if (header == expected_alt && !expected_alt.empty()) {
    alt = true;
  } else if (header != expected) {
    throw ParseError(lines.front().number,
                     fmt::format("unexpected header '{}', expected '{}'", header, expected));
  }
  lines.erase(lines.begin());
  return lines;
}

}  // namespace csv_detail

inline std::vector<MagRecord> parse_magnetization(std::string_view file_text) {
  using namespace csv_detail;
  bool with_passive = false;
  const auto rows = data_lines(file_text, "id,mx,my,mz", "id,mx,my,mz,passive", with_passive);
  const std::size_t ncols = with_passive ? 5 : 4;

  std::vector<MagRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const auto f = split(row.text);
    if (f.size() != ncols) {
      throw ParseError(row.number, fmt::format("expected {} columns, found {}", ncols, f.size()));
    }
    MagRecord r;
    r.id = parse_id(f[0], row.number);
    r.mx = parse_real(f[1], row.number, "mx");
    r.my = parse_real(f[2], row.number, "my");
    r.mz = parse_real(f[3], row.number, "mz");
    if (with_passive) {
      if (f[4] == "1") r.passive = true;
      else if (f[4] != "0") throw ParseError(row.number, "column 'passive': expected 0 or 1");
    }
    if (r.mx == 0.0 && r.my == 0.0 && r.mz == 0.0 && !r.passive) {
      throw ParseError(row.number, "zero magnetization on a voxel not flagged passive");
    }
    out.push_back(r);
  }
  return out;
}

inline std::vector<GeomRecord> parse_geometry(std::string_view file_text) {
  using namespace csv_detail;
  bool unused = false;
  const auto rows = data_lines(file_text, "id,l,w,h,x,y,z", "", unused);

  std::vector<GeomRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const auto f = split(row.text);
    if (f.size() != 7) {
      throw ParseError(row.number, fmt::format("expected 7 columns, found {}", f.size()));
    }
    GeomRecord r;
    r.id = parse_id(f[0], row.number);
    r.l = parse_real(f[1], row.number, "l");
    r.w = parse_real(f[2], row.number, "w");
    r.h = parse_real(f[3], row.number, "h");
    r.x = parse_real(f[4], row.number, "x");
    r.y = parse_real(f[5], row.number, "y");
    r.z = parse_real(f[6], row.number, "z");
    if (r.l <= 0.0 || r.w <= 0.0 || r.h <= 0.0) {
      throw ParseError(row.number, "non-positive dimension");
    }
    out.push_back(r);
  }
  return out;
}

// Writers print the shortest decimal that reads back to the same double.

inline std::string emit_magnetization(const std::vector<MagRecord>& records) {
  bool any_passive = false;
  for (const auto& r : records) any_passive = any_passive || r.passive;
  std::string out = any_passive ? "id,mx,my,mz,passive\n" : "id,mx,my,mz\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{}", r.id, r.mx, r.my, r.mz);
    if (any_passive) out += r.passive ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

inline std::string emit_geometry(const std::vector<GeomRecord>& records) {
  std::string out = "id,l,w,h,x,y,z\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.id, r.l, r.w, r.h, r.x, r.y, r.z);
  }
  return out;
}

}  // namespace magvox
