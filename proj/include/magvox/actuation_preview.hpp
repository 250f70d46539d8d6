#pragma once

// Quasi-static bending preview for chain-like designs.
//
// The chain is a pseudo-rigid-body model: one rigid link per voxel, the first
// link clamped at its proximal face, consecutive links joined by torsional
// springs that rotate about a common bend axis. Magnetization is body-fixed.
// Equilibrium minimizes
//
//   U(theta) = sum_j 1/2 k_j theta_j^2 - sum_i mu0 v_i M_i(theta) . H(x_i(theta))
//
// with a damped Newton iteration.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "magvox/error.hpp"
#include "magvox/magnetostatics.hpp"
#include "magvox/vec3.hpp"
#include "magvox/voxel_model.hpp"

namespace magvox::actuation {

struct Material {
  double E{4.6e6};  // Pa
  double nu{0.49};  // recorded only; the 1D bending model does not use it
};

enum class ChainAxis { PosX, NegX, PosY, NegY, PosZ, NegZ };

inline Vec3 unit_vector(ChainAxis a) {
  switch (a) {
    case ChainAxis::PosX: return {1, 0, 0};
    case ChainAxis::NegX: return {-1, 0, 0};
    case ChainAxis::PosY: return {0, 1, 0};
    case ChainAxis::NegY: return {0, -1, 0};
    case ChainAxis::PosZ: return {0, 0, 1};
    case ChainAxis::NegZ: return {0, 0, -1};
  }
  return {};
}

inline ChainAxis parse_chain_axis(const std::string& s) {
  if (s == "+x" || s == "x") return ChainAxis::PosX;
  if (s == "-x") return ChainAxis::NegX;
  if (s == "+y" || s == "y") return ChainAxis::PosY;
  if (s == "-y") return ChainAxis::NegY;
  if (s == "+z" || s == "z") return ChainAxis::PosZ;
  if (s == "-z") return ChainAxis::NegZ;
  throw Error(ErrorKind::Config, fmt::format("unknown chain axis '{}'", s));
}

/// Default joint axis: y for chains along x or z, x for chains along y.
inline Vec3 default_bend_axis(const Vec3& chain_axis) {
  return std::abs(chain_axis.y) > 0.5 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
}

struct Segment {
  VoxelId id{0};
  double length_mm{0.0};
  double width_mm{0.0};      // along the bend axis
  double thickness_mm{0.0};  // along the bending direction
  Vec3 M{};                  // A/m, body frame (world frame when undeformed)

  double volume_m3() const { return length_mm * width_mm * thickness_mm * 1e-9; }
  double second_moment_m4() const {
    const double w = width_mm * 1e-3, t = thickness_mm * 1e-3;
    return w * t * t * t / 12.0;
  }
};

struct ChainModel {
  std::vector<Segment> segments;
  Material material{};
  std::vector<double> joint_stiffness;  // N*m/rad, one per joint
  Vec3 base{};                          // mm, proximal face of the clamped link
  Vec3 axis{1, 0, 0};                   // undeformed chain direction
  Vec3 bend_axis{0, 1, 0};              // joint rotation axis

  std::size_t joint_count() const { return joint_stiffness.size(); }
  double total_length_mm() const {
    double s = 0.0;
    for (const auto& seg : segments) s += seg.length_mm;
    return s;
  }
};

/// Series combination of the two half-links meeting at a joint; reduces to
/// E I / L for identical links.
inline void assign_stiffness(ChainModel& c) {
  c.joint_stiffness.clear();
  for (std::size_t i = 0; i + 1 < c.segments.size(); ++i) {
    const auto& a = c.segments[i];
    const auto& b = c.segments[i + 1];
    const double compliance = (a.length_mm * 1e-3) / (2.0 * a.second_moment_m4()) +
                              (b.length_mm * 1e-3) / (2.0 * b.second_moment_m4());
    c.joint_stiffness.push_back(c.material.E / compliance);
  }
}

inline void check(const ChainModel& c) {
  if (c.segments.empty()) throw Error(ErrorKind::Config, "chain needs at least one segment");
  if (!(c.material.E > 0.0)) throw Error(ErrorKind::Config, "elastic modulus must be positive");
  if (c.joint_stiffness.size() + 1 != c.segments.size()) {
    throw Error(ErrorKind::Config, "chain needs one joint between each pair of segments");
  }
  for (double k : c.joint_stiffness) {
    if (!(k > 0.0)) throw Error(ErrorKind::Config, "joint stiffness must be positive");
  }
  if (std::abs(norm(c.axis) - 1.0) > 1e-12 || std::abs(norm(c.bend_axis) - 1.0) > 1e-12 ||
      std::abs(dot(c.axis, c.bend_axis)) > 1e-12) {
    throw Error(ErrorKind::Config, "chain axis and bend axis must be orthogonal unit vectors");
  }
}

/// Identical links laid end to end from the origin.
inline ChainModel uniform_chain(std::size_t n, double length_mm, double width_mm, double thickness_mm,
                                const Vec3& M, const Material& material, const Vec3& axis = {1, 0, 0},
                                std::optional<Vec3> bend_axis = std::nullopt) {
  ChainModel c;
  c.material = material;
  c.axis = axis;
  c.bend_axis = bend_axis.value_or(default_bend_axis(axis));
  for (std::size_t i = 0; i < n; ++i) {
    c.segments.push_back({static_cast<VoxelId>(i + 1), length_mm, width_mm, thickness_mm, M});
  }
  assign_stiffness(c);
  check(c);
  return c;
}

/// One link per voxel, in order along `axis`. The voxels must form a single
/// straight face-connected line; anything else needs a continuum model.
/// `magnetization_magnitude` (A/m) overrides the magnitude stored on voxels.
inline ChainModel build_chain(const Design& d, const Material& material, ChainAxis axis,
                              std::optional<double> magnetization_magnitude = std::nullopt,
                              std::optional<Vec3> bend_axis = std::nullopt, double tol = kDefaultContactTolMm) {
  if (d.voxels.empty()) throw Error(ErrorKind::Validation, "not a chain: design is empty");
  const Vec3 a = unit_vector(axis);
  const Vec3 n = bend_axis.value_or(default_bend_axis(a));
  if (std::abs(dot(a, n)) > 1e-12) throw Error(ErrorKind::Config, "bend axis must be perpendicular to the chain");
  const Vec3 t = cross(n, a);

  auto extent = [](const Voxel& v, const Vec3& dir) {
    return std::abs(dir.x) * v.dims.x + std::abs(dir.y) * v.dims.y + std::abs(dir.z) * v.dims.z;
  };

  std::vector<const Voxel*> order;
  for (const auto& v : d.voxels) order.push_back(&v);
  std::sort(order.begin(), order.end(),
            [&](const Voxel* l, const Voxel* r) { return dot(l->position, a) < dot(r->position, a); });

  const auto& first = *order.front();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Voxel& v = *order[i];
    if (std::abs(dot(v.position - first.position, n)) > tol || std::abs(dot(v.position - first.position, t)) > tol) {
      throw Error(ErrorKind::Validation,
                  fmt::format("not a chain: voxel {} is off the chain line (use a continuum model)", v.id));
    }
    if (i > 0) {
      const Voxel& prev = *order[i - 1];
      const double gap = (dot(v.position, a) - extent(v, a) / 2) - (dot(prev.position, a) + extent(prev, a) / 2);
      if (std::abs(gap) > tol) {
        throw Error(ErrorKind::Validation,
                    fmt::format("not a chain: voxels {} and {} do not share a face (use a continuum model)", prev.id,
                                v.id));
      }
    }
  }

  ChainModel c;
  c.material = material;
  c.axis = a;
  c.bend_axis = n;
  c.base = first.position - a * (extent(first, a) / 2);
  for (const Voxel* v : order) {
    const double magnitude = magnetization_magnitude.value_or(v->magnetization.magnitude);
    c.segments.push_back({v->id, extent(*v, a), extent(*v, n), extent(*v, t), v->magnetization.direction * magnitude});
  }
  assign_stiffness(c);
  check(c);
  return c;
}

/// Posed chain: joint points p_0..p_N (p_0 = base), link centres and
/// rotated magnetizations. Positions in mm.
struct Pose {
  std::vector<Vec3> points;
  std::vector<Vec3> centers;
  std::vector<Vec3> M;
};

inline Pose pose(const ChainModel& c, const std::vector<double>& theta) {
  Pose p;
  Vec3 cursor = c.base;
  double phi = 0.0;
  p.points.push_back(cursor);
  for (std::size_t i = 0; i < c.segments.size(); ++i) {
    if (i > 0) phi += theta[i - 1];
    const Vec3 dir = rotate(c.axis, c.bend_axis, phi);
    const auto& s = c.segments[i];
    p.centers.push_back(cursor + dir * (s.length_mm / 2));
    p.M.push_back(rotate(s.M, c.bend_axis, phi));
    cursor += dir * s.length_mm;
    p.points.push_back(cursor);
  }
  return p;
}

inline double energy(const ChainModel& c, const magnetics::FieldSource& src, const std::vector<double>& theta) {
  double u = 0.0;
  for (std::size_t j = 0; j < c.joint_count(); ++j) u += 0.5 * c.joint_stiffness[j] * theta[j] * theta[j];
  const auto p = pose(c, theta);
  for (std::size_t i = 0; i < c.segments.size(); ++i) {
    u -= magnetics::mu0 * c.segments[i].volume_m3() * dot(p.M[i], magnetics::field_at(src, p.centers[i]));
  }
  return u;
}

/// dU/dtheta_j = k_j theta_j - sum over distal links of the bend-axis
/// component of (magnetic torque + moment of magnetic force about joint j).
inline std::vector<double> energy_gradient(const ChainModel& c, const magnetics::FieldSource& src,
                                           const std::vector<double>& theta) {
  const auto p = pose(c, theta);
  const std::size_t n = c.segments.size();
  std::vector<Vec3> tau(n), F(n);
  for (std::size_t i = 0; i < n; ++i) {
    const magnetics::MagneticBody body{p.M[i], c.segments[i].volume_m3()};
    tau[i] = magnetics::torque(body, magnetics::field_at(src, p.centers[i]));
    F[i] = magnetics::force(body, src, p.centers[i]);
  }
  std::vector<double> g(c.joint_count());
  for (std::size_t j = 0; j < c.joint_count(); ++j) {
    const Vec3& pivot = p.points[j + 1];
    double load = 0.0;
    for (std::size_t i = j + 1; i < n; ++i) {
      const Vec3 arm = (p.centers[i] - pivot) * magnetics::kMmToM;
      load += dot(c.bend_axis, tau[i]) + dot(cross(c.bend_axis, arm), F[i]);
    }
    g[j] = c.joint_stiffness[j] * theta[j] - load;
  }
  return g;
}

struct SolverOptions {
  double gradient_tol{1e-12};           // N*m
  double step_tol{1e-12};               // rad
  double energy_rel_tol{1e-14};         // stall criterion, 3 consecutive iterations
  int max_iterations{10000};
  double hessian_step{1e-6};            // rad
};

struct EquilibriumResult {
  std::vector<double> joint_angles;  // rad
  Vec3 tip_displacement{};           // mm
  double energy{0.0};                // J
  double residual_norm{0.0};         // N*m
  int iterations{0};
};

inline Vec3 tip_position(const ChainModel& c, const std::vector<double>& theta) {
  return pose(c, theta).points.back();
}

inline Vec3 tip_deflection(const std::vector<double>& theta, const ChainModel& c) {
  return tip_position(c, theta) - tip_position(c, std::vector<double>(c.joint_count(), 0.0));
}

inline Vec3 tip_deflection(const EquilibriumResult& r, const ChainModel& c) { return tip_deflection(r.joint_angles, c); }

namespace detail {

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

inline EquilibriumResult solve_equilibrium(const ChainModel& c, const magnetics::FieldSource& src,
                                           const SolverOptions& opt = {}) {
  check(c);
  const std::size_t n = c.joint_count();
  std::vector<double> theta(n, 0.0);
  EquilibriumResult result;
  double u = energy(c, src, theta);
  if (!std::isfinite(u)) throw Error(ErrorKind::Domain, "field is not finite along the chain");
  int stalled = 0;
  bool converged = false;
  const double k_scale = n ? *std::max_element(c.joint_stiffness.begin(), c.joint_stiffness.end()) : 1.0;

  for (int it = 0; it < opt.max_iterations && !converged; ++it) {
    const auto g = energy_gradient(c, src, theta);
    result.residual_norm = detail::l2(g);
    result.iterations = it;
    if (n == 0 || result.residual_norm == 0.0) {
      converged = true;
      break;
    }

    Eigen::MatrixXd H(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      auto plus = theta, minus = theta;
      plus[j] += opt.hessian_step;
      minus[j] -= opt.hessian_step;
      const auto gp = energy_gradient(c, src, plus);
      const auto gm = energy_gradient(c, src, minus);
      for (std::size_t i = 0; i < n; ++i) H(i, j) = (gp[i] - gm[i]) / (2.0 * opt.hessian_step);
    }
    H = 0.5 * (H + H.transpose()).eval();
    const Eigen::Map<const Eigen::VectorXd> grad(g.data(), static_cast<Eigen::Index>(n));

    // Levenberg damping until the step is a descent direction
    Eigen::VectorXd step;
    double lambda = 0.0;
    for (int attempt = 0; attempt < 60 && step.size() == 0; ++attempt) {
      Eigen::MatrixXd damped = H;
      damped.diagonal().array() += lambda;
      Eigen::LLT<Eigen::MatrixXd> llt(damped);
      if (llt.info() == Eigen::Success) {
        Eigen::VectorXd candidate = llt.solve(-grad);
        if (candidate.allFinite() && candidate.dot(grad) < 0.0) step = candidate;
      }
      lambda = lambda == 0.0 ? 1e-6 * k_scale : lambda * 10.0;
    }
    if (step.size() == 0) {
      converged = result.residual_norm < opt.gradient_tol;
      break;
    }
    if (result.residual_norm < opt.gradient_tol && step.cwiseAbs().maxCoeff() < opt.step_tol) {
      converged = true;
      break;
    }

    const double slope = step.dot(grad);
    std::vector<double> trial(n);
    double u_trial = u;
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = theta[j] + alpha * step[static_cast<Eigen::Index>(j)];
      u_trial = energy(c, src, trial);
      if (std::isfinite(u_trial) && u_trial <= u + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // no representable decrease left along the Newton direction
      converged = result.residual_norm < opt.gradient_tol || ++stalled >= 3;
      continue;
    }
    const double rel = std::abs(u_trial - u) / std::max(std::abs(u), std::numeric_limits<double>::min());
    stalled = rel < opt.energy_rel_tol ? stalled + 1 : 0;
    theta = trial;
    u = u_trial;
    if (stalled >= 3) {
      converged = true;
      result.residual_norm = detail::l2(energy_gradient(c, src, theta));
      result.iterations = it + 1;
    }
  }
  if (!converged) {
    throw Error(ErrorKind::Convergence,
                fmt::format("equilibrium not reached after {} iterations, residual {:.3e} N*m", result.iterations,
                            result.residual_norm));
  }

  result.joint_angles = theta;
  result.energy = energy(c, src, theta);
  result.tip_displacement = tip_deflection(theta, c);
  return result;
}

/// Tip angle of the linearized continuum cantilever (length L, bending
/// stiffness E I) carrying a uniform distributed torque m per unit length:
/// m L^2 / (2 E I).
inline double cantilever_tip_angle(double torque_per_length, double length_m, double E, double I) {
  return torque_per_length * length_m * length_m / (2.0 * E * I);
}

/// Side view of the undeformed and deformed chain in the bending plane.
inline std::string render_svg(const ChainModel& c, const EquilibriumResult& r, const std::string& title = {}) {
  const auto rest = pose(c, std::vector<double>(c.joint_count(), 0.0));
  const auto bent = pose(c, r.joint_angles);
  const Vec3 vertical = cross(c.bend_axis, c.axis);
  auto project = [&](const Vec3& p) {
    const Vec3 q = p - c.base;
    return std::pair{dot(q, c.axis), dot(q, vertical)};
  };

  double lo_u = 0, hi_u = 0, lo_v = 0, hi_v = 0;
  for (const auto* pts : {&rest.points, &bent.points}) {
    for (const auto& p : *pts) {
      const auto [u, v] = project(p);
      lo_u = std::min(lo_u, u);
      hi_u = std::max(hi_u, u);
      lo_v = std::min(lo_v, v);
      hi_v = std::max(hi_v, v);
    }
  }
  const double span = std::max({hi_u - lo_u, hi_v - lo_v, 1e-9});
  const double w = 480, h = 360, margin = 40;
  const double scale = std::min((w - 2 * margin) / span, (h - 2 * margin) / span);
  auto sx = [&](double u) { return margin + (u - lo_u) * scale; };
  auto sy = [&](double v) { return h - margin - (v - lo_v) * scale; };

  auto polyline = [&](const std::vector<Vec3>& pts, const char* stroke, const char* extra) {
    std::string s = "<polyline fill=\"none\" stroke=\"";
    s += stroke;
    s += "\" stroke-width=\"6\" stroke-linejoin=\"round\"";
    s += extra;
    s += " points=\"";
    for (const auto& p : pts) {
      const auto [u, v] = project(p);
      s += fmt::format("{:.3f},{:.3f} ", sx(u), sy(v));
    }
    s.back() = '"';
    return s + "/>\n";
  };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n", w, h);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) svg += fmt::format("<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", title);
  svg += polyline(rest.points, "#9e9e9e", " stroke-dasharray=\"4 3\"");
  svg += polyline(bent.points, "#1f5fbf", "");
  const auto [bu, bv] = project(c.base);
  svg += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"5\" fill=\"black\"/>\n", sx(bu), sy(bv));
  svg += fmt::format(
      "<text x=\"10\" y=\"{:.0f}\" font-family=\"sans-serif\" font-size=\"12\">tip displacement {:.6g} mm</text>\n",
      h - 10, norm(r.tip_displacement));
  svg += "</svg>\n";
  return svg;
}

}  // namespace magvox::actuation
