#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>

#include "magvox/error.hpp"
#include "magvox/ingest.hpp"
#include "magvox/machine_config.hpp"
#include "magvox/vec3.hpp"

namespace magvox {

inline constexpr double kDefaultContactTolMm = 1e-6;

/// Unit direction plus magnitude. `components` keeps the values as exported so
/// a design can be written back without rounding.
struct Magnetization {
  Vec3 direction{};
  double magnitude{0.0};
  bool passive{false};
  Vec3 components{};

  static Magnetization from_components(const Vec3& m, bool passive = false) {
    Magnetization out;
    out.components = m;
    out.passive = passive;
    out.magnitude = norm(m);
    if (out.magnitude > 0.0) out.direction = m / out.magnitude;
    return out;
  }

  static Magnetization along(const Vec3& direction) { return from_components(normalized(direction)); }

  Vec3 vector() const { return direction * magnitude; }

  friend bool operator==(const Magnetization&, const Magnetization&) = default;
};

struct Voxel {
  VoxelId id{0};
  Vec3 position{};  // mm, box center
  Vec3 dims{};      // mm, L x W x H along x, y, z
  Magnetization magnetization{};

  double volume_m3() const { return dims.x * dims.y * dims.z * 1e-9; }
  Vec3 min_corner() const { return position - dims * 0.5; }
  Vec3 max_corner() const { return position + dims * 0.5; }

  friend bool operator==(const Voxel&, const Voxel&) = default;
};

struct Design {
  std::string name;
  std::vector<Voxel> voxels;

  const Voxel* find(VoxelId id) const {
    for (const auto& v : voxels) {
      if (v.id == id) return &v;
    }
    return nullptr;
  }
  const Voxel& at(VoxelId id) const {
    if (const auto* v = find(id)) return *v;
    throw Error(ErrorKind::Validation, fmt::format("no voxel with id {}", id));
  }

  friend bool operator==(const Design&, const Design&) = default;
};

using VoxelIndex = std::unordered_map<VoxelId, const Voxel*>;

inline VoxelIndex index_by_id(const Design& d) {
  VoxelIndex index;
  index.reserve(d.voxels.size());
  for (const auto& v : d.voxels) index.emplace(v.id, &v);
  return index;
}

inline const Voxel& lookup(const VoxelIndex& index, VoxelId id) {
  const auto it = index.find(id);
  if (it == index.end()) throw Error(ErrorKind::Validation, fmt::format("no voxel with id {}", id));
  return *it->second;
}

namespace detail {

inline std::string join_ids(const std::vector<VoxelId>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(ids[i]);
  }
  return s;
}

template <typename Record>
std::map<VoxelId, const Record*> index_unique(const std::vector<Record>& records, const char* dataset) {
  std::map<VoxelId, const Record*> index;
  std::vector<VoxelId> duplicates;
  for (const auto& r : records) {
    if (!index.emplace(r.id, &r).second) duplicates.push_back(r.id);
  }
  if (!duplicates.empty()) {
    throw Error(ErrorKind::Validation,
                fmt::format("duplicate id {} in {} dataset", join_ids(duplicates), dataset));
  }
  return index;
}

}  // namespace detail

/// Joins the two datasets on voxel id. Output is sorted by ascending id.
inline Design merge_datasets(const std::vector<MagRecord>& mag, const std::vector<GeomRecord>& geom,
                             PositionConvention convention = PositionConvention::Center,
                             std::string name = {}) {
  if (mag.empty()) throw Error(ErrorKind::Input, "magnetization dataset is empty");
  if (geom.empty()) throw Error(ErrorKind::Input, "geometry dataset is empty");

  const auto mags = detail::index_unique(mag, "magnetization");
  const auto geoms = detail::index_unique(geom, "geometry");

  std::vector<VoxelId> missing;
  for (const auto& [id, _] : mags) {
    if (!geoms.count(id)) missing.push_back(id);
  }
  for (const auto& [id, _] : geoms) {
    if (!mags.count(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    throw Error(ErrorKind::Validation,
                fmt::format("missing counterpart record for id {}", detail::join_ids(missing)));
  }

  Design d;
  d.name = std::move(name);
  d.voxels.reserve(mags.size());
  for (const auto& [id, m] : mags) {
    const GeomRecord& g = *geoms.at(id);
    Voxel v;
    v.id = id;
    v.dims = {g.l, g.w, g.h};
    v.position = {g.x, g.y, g.z};
    if (convention == PositionConvention::MinCorner) v.position += v.dims * 0.5;
    v.magnetization = Magnetization::from_components({m->mx, m->my, m->mz}, m->passive);
    d.voxels.push_back(v);
  }
  return d;
}

struct DesignRecords {
  std::vector<MagRecord> mag;
  std::vector<GeomRecord> geom;
};

/// Inverse of merge_datasets (records ordered as the design's voxels).
inline DesignRecords split_design(const Design& d,
                                  PositionConvention convention = PositionConvention::Center) {
  DesignRecords out;
  for (const auto& v : d.voxels) {
    const auto& m = v.magnetization.components;
    out.mag.push_back({v.id, m.x, m.y, m.z, v.magnetization.passive});
    Vec3 p = v.position;
    if (convention == PositionConvention::MinCorner) p = v.min_corner();
    out.geom.push_back({v.id, v.dims.x, v.dims.y, v.dims.z, p.x, p.y, p.z});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adjacency

enum class Contact { None, Corner, Edge, Face, Overlap };

inline const char* to_string(Contact c) {
  switch (c) {
    case Contact::None: return "none";
    case Contact::Corner: return "corner";
    case Contact::Edge: return "edge";
    case Contact::Face: return "face";
    case Contact::Overlap: return "overlap";
  }
  return "?";
}

struct ContactPair {
  VoxelId a{0};
  VoxelId b{0};
  Contact contact{Contact::None};
  double overlap_volume_mm3{0.0};  // > 0 iff contact == Overlap
};

struct AdjacencyReport {
  std::vector<ContactPair> pairs;

  std::size_t count(Contact c) const {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [c](const ContactPair& p) { return p.contact == c; }));
  }
};

/// Contact class of two axis-aligned boxes. Per axis the signed overlap
/// length is positive (shared extent), zero within tol (touching) or negative
/// (separated); the number of positive axes gives overlap/face/edge/corner.
inline ContactPair classify_pair(const Voxel& a, const Voxel& b, double tol = kDefaultContactTolMm) {
  const Vec3 amin = a.min_corner(), amax = a.max_corner();
  const Vec3 bmin = b.min_corner(), bmax = b.max_corner();
  ContactPair out{a.id, b.id, Contact::None, 0.0};
  int shared = 0;
  double volume = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double overlap = std::min(amax[i], bmax[i]) - std::max(amin[i], bmin[i]);
    if (overlap < -tol) return out;
    if (overlap > tol) {
      ++shared;
      volume *= overlap;
    }
  }
  switch (shared) {
    case 3:
      out.contact = Contact::Overlap;
      out.overlap_volume_mm3 = volume;
      break;
    case 2: out.contact = Contact::Face; break;
    case 1: out.contact = Contact::Edge; break;
    default: out.contact = Contact::Corner; break;
  }
  return out;
}

/// Classifies every voxel pair (a listed before b in the design). Pairs with
/// no contact are omitted unless include_none is set.
inline AdjacencyReport classify_adjacency(const Design& d, double tol = kDefaultContactTolMm,
                                          bool include_none = false) {
  if (tol < 0.0) throw Error(ErrorKind::Config, "adjacency tolerance must be >= 0");
  AdjacencyReport report;
  const auto& vs = d.voxels;
  if (include_none) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      for (std::size_t j = i + 1; j < vs.size(); ++j) report.pairs.push_back(classify_pair(vs[i], vs[j], tol));
    }
    return report;
  }

  // sweep along x to skip far-apart pairs
  std::vector<std::size_t> order(vs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return vs[l].min_corner().x < vs[r].min_corner().x; });
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const auto& a = vs[order[oi]];
    const double reach = a.max_corner().x + tol;
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const auto& b = vs[order[oj]];
      if (b.min_corner().x > reach) break;
      auto [first, second] = std::minmax(order[oi], order[oj]);
      auto pair = classify_pair(vs[first], vs[second], tol);
      if (pair.contact != Contact::None) report.pairs.push_back(pair);
    }
  }
  std::map<VoxelId, std::size_t> rank;
  for (std::size_t i = 0; i < vs.size(); ++i) rank.emplace(vs[i].id, i);
  std::sort(report.pairs.begin(), report.pairs.end(), [&](const ContactPair& l, const ContactPair& r) {
    return std::pair(rank[l.a], rank[l.b]) < std::pair(rank[r.a], rank[r.b]);
  });
  return report;
}

// ---------------------------------------------------------------------------
// Validation

enum class Severity { Warning, Error };

struct ValidationEntry {
  Severity severity{Severity::Error};
  std::string code;
  std::vector<VoxelId> ids;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;

  bool empty() const { return entries.empty(); }
  bool has_errors() const {
    return std::any_of(entries.begin(), entries.end(),
                       [](const ValidationEntry& e) { return e.severity == Severity::Error; });
  }
  std::size_t count(const std::string& code) const {
    return static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(), [&](const ValidationEntry& e) { return e.code == code; }));
  }
  const ValidationEntry* first_error() const {
    for (const auto& e : entries) {
      if (e.severity == Severity::Error) return &e;
    }
    return nullptr;
  }
};

namespace detail {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace detail

/// Structural checks on a design. Travel limits are only checked when a
/// machine config is given. Corner- or edge-only contacts between otherwise
/// disconnected solid groups produce connectivity warnings.
inline ValidationReport validate_design(const Design& d, const MachineConfig* cfg = nullptr,
                                        double tol = kDefaultContactTolMm) {
  ValidationReport report;
  auto add = [&](Severity s, std::string code, std::vector<VoxelId> ids, std::string msg) {
    report.entries.push_back({s, std::move(code), std::move(ids), std::move(msg)});
  };

  if (d.voxels.empty()) {
    add(Severity::Error, "empty-design", {}, "design has no voxels");
    return report;
  }

  std::set<VoxelId> seen;
  bool geometry_ok = true;
  for (const auto& v : d.voxels) {
    if (v.id == 0) add(Severity::Error, "invalid-id", {v.id}, "voxel id must be positive");
    if (!seen.insert(v.id).second) {
      add(Severity::Error, "duplicate-id", {v.id}, fmt::format("duplicate id {}", v.id));
    }
    if (!is_finite(v.position) || !is_finite(v.dims) || !is_finite(v.magnetization.components) ||
        !std::isfinite(v.magnetization.magnitude)) {
      add(Severity::Error, "non-finite", {v.id}, fmt::format("voxel {}: non-finite value", v.id));
      geometry_ok = false;
      continue;
    }
    if (v.dims.x <= 0.0 || v.dims.y <= 0.0 || v.dims.z <= 0.0) {
      add(Severity::Error, "non-positive-dimension", {v.id},
          fmt::format("voxel {}: non-positive dimension", v.id));
      geometry_ok = false;
    }
    const auto& m = v.magnetization;
    if (m.magnitude == 0.0) {
      if (!m.passive) {
        add(Severity::Error, "zero-magnetization", {v.id},
            fmt::format("voxel {}: zero magnetization without passive flag", v.id));
      }
    } else if (std::abs(norm(m.direction) - 1.0) > 1e-9) {
      add(Severity::Error, "non-unit-magnetization", {v.id},
          fmt::format("voxel {}: magnetization direction is not a unit vector", v.id));
    }
    if (cfg) {
      for (int i = 0; i < 3; ++i) {
        if (!cfg->travel[i].contains(v.position[i])) {
          add(Severity::Error, "outside-travel", {v.id},
              fmt::format("voxel {}: {} = {} mm outside travel [{}, {}]", v.id,
                          axis_name(static_cast<Axis>(i)), v.position[i], cfg->travel[i].min,
                          cfg->travel[i].max));
        }
      }
    }
  }
  if (!geometry_ok) return report;

  const auto adjacency = classify_adjacency(d, tol);
  std::map<VoxelId, std::size_t> index;
  for (std::size_t i = 0; i < d.voxels.size(); ++i) index.emplace(d.voxels[i].id, i);
  detail::DisjointSets solid(d.voxels.size());
  for (const auto& p : adjacency.pairs) {
    if (p.contact == Contact::Face || p.contact == Contact::Overlap) solid.unite(index[p.a], index[p.b]);
  }
  for (const auto& p : adjacency.pairs) {
    if (p.contact != Contact::Corner && p.contact != Contact::Edge) continue;
    if (solid.find(index[p.a]) == solid.find(index[p.b])) continue;
    const bool corner = p.contact == Contact::Corner;
    add(Severity::Warning, corner ? "corner-only-connectivity" : "edge-only-connectivity", {p.a, p.b},
        fmt::format("voxels {} and {} are joined only along a{} {}", p.a, p.b, corner ? "" : "n",
                    corner ? "corner point" : "edge"));
  }
  return report;
}

}  // namespace magvox
