#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "magvox/error.hpp"
#include "magvox/machine_config.hpp"
#include "magvox/voxel_model.hpp"

namespace magvox {

struct Layer {
  double z{0.0};  // height of the layer's top member, mm
  std::vector<VoxelId> voxel_ids;

  friend bool operator==(const Layer&, const Layer&) = default;
};

enum class OrderMode { Hypotenuse, NearestNeighbor };

inline const char* to_string(OrderMode m) { return m == OrderMode::Hypotenuse ? "hypot" : "nn"; }

struct ToolPath {
  std::vector<Layer> layers;  // strictly descending z
  double total_xy_travel{0.0};
  OrderMode order{OrderMode::Hypotenuse};

  std::vector<VoxelId> sequence() const {
    std::vector<VoxelId> out;
    for (const auto& l : layers) out.insert(out.end(), l.voxel_ids.begin(), l.voxel_ids.end());
    return out;
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.voxel_ids.size();
    return n;
  }
};

/// Groups voxels into layers, top layer first. A layer starts at its highest
/// voxel and absorbs every voxel within z_tol below it, so each member lies
/// within z_tol of the layer z.
inline std::vector<Layer> group_layers(const Design& d, double z_tol = 1e-6) {
  if (z_tol < 0.0) throw Error(ErrorKind::Config, "z_tol must be >= 0");
  std::vector<const Voxel*> sorted;
  sorted.reserve(d.voxels.size());
  for (const auto& v : d.voxels) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(), [](const Voxel* a, const Voxel* b) {
    return std::tie(b->position.z, a->id) < std::tie(a->position.z, b->id);
  });

  std::vector<Layer> layers;
  for (const Voxel* v : sorted) {
    if (layers.empty() || v->position.z < layers.back().z - z_tol) layers.push_back({v->position.z, {}});
    layers.back().voxel_ids.push_back(v->id);
  }
  return layers;
}

/// Sort key within a layer: distance from the machine origin in XY, then y,
/// then x, then id.
inline auto hypotenuse_key(const Voxel& v) {
  return std::make_tuple(std::hypot(v.position.x, v.position.y), v.position.y, v.position.x, v.id);
}

inline Layer order_within_layer(const Layer& layer, const Design& d) {
  if (layer.voxel_ids.empty()) throw Error(ErrorKind::Validation, "cannot order an empty layer");
  const auto index = index_by_id(d);
  using Key = decltype(hypotenuse_key(std::declval<const Voxel&>()));
  std::vector<Key> keys;
  keys.reserve(layer.voxel_ids.size());
  for (const auto id : layer.voxel_ids) keys.push_back(hypotenuse_key(lookup(index, id)));
  std::sort(keys.begin(), keys.end());
  Layer out{layer.z, {}};
  for (const auto& k : keys) out.voxel_ids.push_back(std::get<3>(k));
  return out;
}

/// Greedy nearest-neighbour ordering from a start point, ties broken by the
/// hypotenuse key. Comparison only; not the default order.
inline Layer order_nearest_neighbor(const Layer& layer, const Design& d, Vec3 start) {
  const auto index = index_by_id(d);
  Layer out{layer.z, {}};
  std::vector<VoxelId> remaining = order_within_layer(layer, d).voxel_ids;
  while (!remaining.empty()) {
    auto best = remaining.begin();
    double best_dist = std::numeric_limits<double>::infinity();
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      const auto& p = lookup(index, *it).position;
      const double dist = std::hypot(p.x - start.x, p.y - start.y);
      if (dist < best_dist) {
        best_dist = dist;
        best = it;
      }
    }
    start = lookup(index, *best).position;
    out.voxel_ids.push_back(*best);
    remaining.erase(best);
  }
  return out;
}

/// XY distance along the cure sequence, starting from the origin.
inline double xy_travel(const std::vector<VoxelId>& sequence, const Design& d) {
  const auto index = index_by_id(d);
  double total = 0.0;
  double px = 0.0, py = 0.0;
  for (const auto id : sequence) {
    const auto& p = lookup(index, id).position;
    total += std::hypot(p.x - px, p.y - py);
    px = p.x;
    py = p.y;
  }
  return total;
}

inline std::string describe_errors(const ValidationReport& report) {
  std::string s;
  for (const auto& e : report.entries) {
    if (e.severity != Severity::Error) continue;
    if (!s.empty()) s += "; ";
    s += e.message;
  }
  return s;
}

inline ToolPath plan(const Design& d, const MachineConfig& cfg, OrderMode mode = OrderMode::Hypotenuse) {
  if (d.voxels.empty()) throw Error(ErrorKind::Validation, "cannot plan an empty design");
  const auto report = validate_design(d, &cfg);
  if (report.has_errors()) throw Error(ErrorKind::Validation, describe_errors(report));

  ToolPath path;
  path.order = mode;
  Vec3 cursor{};
  for (const auto& layer : group_layers(d, cfg.z_tol_mm)) {
    path.layers.push_back(mode == OrderMode::Hypotenuse ? order_within_layer(layer, d)
                                                   : order_nearest_neighbor(layer, d, cursor));
    cursor = d.at(path.layers.back().voxel_ids.back()).position;
  }
  path.total_xy_travel = xy_travel(path.sequence(), d);
  return path;
}

}  // namespace magvox
