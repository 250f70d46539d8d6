#pragma once

// Generators and brute-force oracles shared by the unit tests and the
// acceptance runner. Nothing here calls into the code under test except to
// build inputs.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "magvox/magvox.hpp"

namespace magvox::testkit {

inline std::filesystem::path data_dir() { return MAGVOX_DATA_DIR; }
inline std::filesystem::path golden_dir() { return MAGVOX_GOLDEN_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Design fixture(const std::string& stem, PositionConvention c = PositionConvention::Center) {
  const auto dir = data_dir() / "fixtures";
  return merge_datasets(parse_magnetization(slurp(dir / (stem + ".mag.csv"))),
                        parse_geometry(slurp(dir / (stem + ".geom.csv"))), c, stem);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    if (n > 1e-3) return v / n;
  }
}

// Random voxel design: positions drawn inside [-limit, limit] on every axis,
// z taken from a handful of levels so layers hold several voxels.
inline Design random_design(std::mt19937_64& rng, std::size_t n, double limit = 40.0) {
  std::uniform_real_distribution<double> pos(-limit, limit);
  std::uniform_int_distribution<int> level(0, 4);
  std::vector<double> levels;
  for (int i = 0; i < 5; ++i) levels.push_back(pos(rng));
  Design d;
  d.name = "random";
  std::uniform_int_distribution<VoxelId> jump(1, 7);
  VoxelId id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    id += jump(rng);
    Voxel v;
    v.id = id;
    v.dims = {0.05, 0.05, 0.05};
    v.position = {pos(rng), pos(rng), levels[level(rng)]};
    v.magnetization = Magnetization::from_components(random_unit(rng));
    d.voxels.push_back(v);
  }
  return d;
}

// Box intersection volume estimated by uniform sampling of the first box.
inline double monte_carlo_overlap(const Voxel& a, const Voxel& b, std::mt19937_64& rng, std::size_t samples) {
  const Vec3 lo = a.position - a.dims * 0.5;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec3 p{lo.x + u(rng) * a.dims.x, lo.y + u(rng) * a.dims.y, lo.z + u(rng) * a.dims.z};
    bool inside = true;
    for (int k = 0; k < 3; ++k) inside = inside && std::abs(p[k] - b.position[k]) <= b.dims[k] / 2;
    hits += inside;
  }
  return a.dims.x * a.dims.y * a.dims.z * static_cast<double>(hits) / static_cast<double>(samples);
}

// Tries every permutation of the layer and returns the one whose consecutive
// keys never decrease.
inline std::vector<VoxelId> exhaustive_layer_order(const std::vector<const Voxel*>& members) {
  auto less = [](const Voxel* a, const Voxel* b) {
    const double ha = std::sqrt(a->position.x * a->position.x + a->position.y * a->position.y);
    const double hb = std::sqrt(b->position.x * b->position.x + b->position.y * b->position.y);
    if (std::abs(ha - hb) > 1e-12) return ha < hb;
    if (a->position.y != b->position.y) return a->position.y < b->position.y;
    if (a->position.x != b->position.x) return a->position.x < b->position.x;
    return a->id < b->id;
  };
  std::vector<std::size_t> idx(members.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<VoxelId> best;
  std::size_t found = 0;
  do {
    bool sorted = true;
    for (std::size_t i = 1; i < idx.size() && sorted; ++i) {
      sorted = !less(members[idx[i]], members[idx[i - 1]]);
    }
    if (sorted) {
      ++found;
      best.clear();
      for (auto i : idx) best.push_back(members[i]->id);
    }
  } while (std::next_permutation(idx.begin(), idx.end()));
  if (found != 1) best.clear();
  return best;
}

// Exact step count for a translation when target * steps_per_rev is an
// integer multiple of distance_per_rev (all given as integers in micrometres).
inline long long rational_steps(long long target_um, long long distance_per_rev_um, long long steps_per_rev) {
  const long long num = target_um * steps_per_rev;
  return num / distance_per_rev_um;
}

// Central difference of any vector function of position (mm) along axis k,
// with a step given in metres.
template <typename F>
inline Vec3 central_difference(F&& f, const Vec3& p_mm, int k, double h_m) {
  Vec3 e{};
  e[k] = h_m * 1e3;
  return (f(p_mm + e) - f(p_mm - e)) / (2.0 * h_m);
}

}  // namespace magvox::testkit
