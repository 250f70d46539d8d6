#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <variant>

#include "magvox/error.hpp"
#include "magvox/vec3.hpp"

namespace magvox::magnetics {

/// Vacuum permeability, T*m/A.
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;

inline constexpr double kMmToM = 1e-3;
inline constexpr double kMinDipoleDistanceMm = 1e-6;

struct Uniform {
  Vec3 B{};  // tesla
};

/// Point dipole standing in for an external permanent magnet.
struct Dipole {
  Vec3 moment{};    // A*m^2
  Vec3 position{};  // mm
};

using FieldSource = std::variant<Uniform, Dipole>;

/// Magnetized body: M in A/m, volume in m^3.
struct MagneticBody {
  Vec3 M{};
  double volume{0.0};
};

/// J[i][j] = dH_i / dx_j in A/m per metre.
using Jacobian = std::array<std::array<double, 3>, 3>;

namespace detail {

inline Vec3 offset_m(const Dipole& d, const Vec3& p_mm) {
  const Vec3 r_mm = p_mm - d.position;
  if (norm(r_mm) < kMinDipoleDistanceMm) {
    throw Error(ErrorKind::Domain, "field evaluated at the dipole position (singular)");
  }
  return r_mm * kMmToM;
}

inline Vec3 times(const Jacobian& J, const Vec3& v) {
  return {J[0][0] * v.x + J[0][1] * v.y + J[0][2] * v.z, J[1][0] * v.x + J[1][1] * v.y + J[1][2] * v.z,
          J[2][0] * v.x + J[2][1] * v.y + J[2][2] * v.z};
}

inline Vec3 transpose_times(const Jacobian& J, const Vec3& v) {
  return {J[0][0] * v.x + J[1][0] * v.y + J[2][0] * v.z, J[0][1] * v.x + J[1][1] * v.y + J[2][1] * v.z,
          J[0][2] * v.x + J[1][2] * v.y + J[2][2] * v.z};
}

}  // namespace detail

/// H (A/m) at a point given in mm. Uniform: B / mu0. Dipole:
/// H = (3 (m.r^) r^ - m) / (4 pi |r|^3).
inline Vec3 field_at(const FieldSource& src, const Vec3& p_mm) {
  if (const auto* u = std::get_if<Uniform>(&src)) return u->B / mu0;
  const auto& d = std::get<Dipole>(src);
  const Vec3 r = detail::offset_m(d, p_mm);
  const double rn = norm(r);
  const Vec3 rhat = r / rn;
  return (rhat * (3.0 * dot(d.moment, rhat)) - d.moment) / (4.0 * std::numbers::pi * rn * rn * rn);
}

/// Analytic spatial Jacobian of H. Zero for a uniform field; symmetric for a
/// dipole (curl- and divergence-free outside the source).
inline Jacobian field_jacobian(const FieldSource& src, const Vec3& p_mm) {
  Jacobian J{};
  if (std::holds_alternative<Uniform>(src)) return J;
  const auto& d = std::get<Dipole>(src);
  const Vec3 r = detail::offset_m(d, p_mm);
  const Vec3& m = d.moment;
  const double r2 = dot(r, r);
  const double rn = std::sqrt(r2);
  const double r5 = r2 * r2 * rn;
  const double r7 = r5 * r2;
  const double mr = dot(m, r);
  const double k = 1.0 / (4.0 * std::numbers::pi);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      J[i][j] = k * (3.0 * (m[j] * r[i] + m[i] * r[j] + mr * delta) / r5 - 15.0 * mr * r[i] * r[j] / r7);
    }
  }
  return J;
}

/// B = mu H.
inline Vec3 flux_density(const Vec3& H, double mu) {
  if (!(mu > 0.0)) throw Error(ErrorKind::Config, "permeability must be positive");
  return H * mu;
}

/// tau = mu0 v (M x H), N*m.
inline Vec3 torque(const MagneticBody& body, const Vec3& H) {
  return cross(body.M, H) * (mu0 * body.volume);
}

/// F = mu0 v [M . dH/dx, M . dH/dy, M . dH/dz], N. Exactly zero for a
/// uniform field.
inline Vec3 force(const MagneticBody& body, const FieldSource& src, const Vec3& p_mm) {
  if (std::holds_alternative<Uniform>(src)) return {};
  return detail::transpose_times(field_jacobian(src, p_mm), body.M) * (mu0 * body.volume);
}

/// F = mu0 v (M . grad) H. Agrees with force() wherever the field is curl-free.
inline Vec3 force_convective(const MagneticBody& body, const FieldSource& src, const Vec3& p_mm) {
  if (std::holds_alternative<Uniform>(src)) return {};
  return detail::times(field_jacobian(src, p_mm), body.M) * (mu0 * body.volume);
}

}  // namespace magvox::magnetics
