#pragma once

// Elementary 3D primitives: vectors, rotations, rigid motions, signed
// volumes and coplanarity residuals. Everything here is a value type and
// every function is pure.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace tetrakin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Default tolerance for "this residual is zero" tests. Overridable per call.
inline constexpr double kResidualTol = 1e-10;
// Tolerance for structural invariants (unit axes, orthogonality).
inline constexpr double kUnitTol = 1e-12;

/// cot(phi/2) for phi in (0, 2*pi). The angle surrogate used by the
/// constraint solver; phi = 0 (identity) is handled as a separate case by
/// callers since the cotangent diverges there.
inline double cot_half(double phi) {
  if (!(phi > 0.0 && phi < kTwoPi)) {
    throw std::invalid_argument("cot_half: phi must lie in (0, 2*pi)");
  }
  return std::cos(0.5 * phi) / std::sin(0.5 * phi);
}

/// Inverse of cot_half: the unique phi in (0, 2*pi) with cot(phi/2) = s.
inline double phi_from_cot_half(double s) {
  return 2.0 * std::atan2(1.0, s);
}

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/// Axis-angle rotation descriptor. phi lies in (0, 2*pi); s = cot(phi/2).
/// (u, phi) and (-u, 2*pi - phi) denote the same rotation, with s changing
/// sign under the flip.
struct AxisAngle {
  Vec3 u;
  double phi = 0.0;
  double s = 0.0;

  static AxisAngle from_axis_angle(const Vec3& axis, double phi) {
    if (std::abs(axis.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("AxisAngle: axis must be a unit vector");
    }
    AxisAngle aa;
    aa.u = axis / axis.norm();
    aa.phi = phi;
    aa.s = cot_half(phi);
    return aa;
  }

  static AxisAngle from_axis_cot(const Vec3& axis, double s) {
    return from_axis_angle(axis, phi_from_cot_half(s));
  }

  AxisAngle flipped() const {
    AxisAngle aa;
    aa.u = -u;
    aa.phi = kTwoPi - phi;
    aa.s = -s;
    return aa;
  }
};

/// Rotation about the line 0u through phi. Sign convention: the angle is
/// positive when the rotation appears counterclockwise looking from behind
/// the axis vector, i.e. A = cos(phi) I - sin(phi) [u]x + (1-cos(phi)) u u^T.
/// With this convention the axis (1,1,1)/sqrt(3) at phi = 2*pi/3 maps
/// (x,y,z) -> (y,z,x).
inline Mat3 rotation_about(const Vec3& unit_axis, double phi) {
  if (std::abs(unit_axis.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("rotation_about: axis must be a unit vector");
  }
  const Vec3 u = unit_axis / unit_axis.norm();
  const double c = std::cos(phi);
  const double sn = std::sin(phi);
  return c * Mat3::Identity() - sn * skew(u) + (1.0 - c) * (u * u.transpose());
}

inline Mat3 rotation_from_axis_angle(const AxisAngle& aa) {
  return rotation_about(aa.u, aa.phi);
}

/// Rotation-vector chart: w = phi * u, smooth through w = 0.
inline Mat3 rotation_from_rotvec(const Vec3& w) {
  const double th = w.norm();
  if (th < 1e-12) {
    // second-order series of cos/sin keeps the chart smooth at the origin
    return Mat3::Identity() - skew(w) + 0.5 * (w * w.transpose()) -
           0.5 * w.squaredNorm() * Mat3::Identity();
  }
  return rotation_about(w / th, th);
}

inline bool is_rotation(const Mat3& A, double tol = 1e-9) {
  return (A * A.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(A.determinant() - 1.0) <= tol;
}

/// Extracts (u, phi) with phi in (0, pi]. Returns nullopt for the identity
/// (phi ~ 0), which is represented as a dedicated case everywhere.
inline std::optional<AxisAngle> axis_angle_from_rotation(
    const Mat3& A, double identity_tol = 1e-12) {
  // A - A^T = -2 sin(phi) [u]x under this sign convention
  Vec3 v(A(2, 1) - A(1, 2), A(0, 2) - A(2, 0), A(1, 0) - A(0, 1));
  const double sin_phi = 0.5 * v.norm();
  const double cos_phi = std::clamp(0.5 * (A.trace() - 1.0), -1.0, 1.0);
  const double phi = std::atan2(sin_phi, cos_phi);
  if (phi < identity_tol) return std::nullopt;
  Vec3 u;
  if (sin_phi > 1e-7) {
    u = -v / (2.0 * sin_phi);
  } else {
    // phi ~ pi: recover the axis from the symmetric part, u u^T = (A - cI)/(1-c)
    const Mat3 uut = (A - cos_phi * Mat3::Identity()) / (1.0 - cos_phi);
    int imax;
    uut.diagonal().maxCoeff(&imax);
    u = uut.col(imax) / std::sqrt(std::max(uut(imax, imax), 1e-300));
  }
  u.normalize();
  AxisAngle aa;
  aa.u = u;
  aa.phi = phi;
  aa.s = cot_half(phi);
  return aa;
}

inline Vec3 rotvec_from_rotation(const Mat3& A) {
  const auto aa = axis_angle_from_rotation(A);
  if (!aa) return Vec3::Zero();
  return aa->u * aa->phi;
}

/// Orientation-preserving isometry x -> A x + b.
struct RigidMotion {
  Mat3 A = Mat3::Identity();
  Vec3 b = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return A * x + b; }
  static RigidMotion identity() { return RigidMotion{}; }
};

/// det[p2-p1, q1-p1, q2-p1]: zero iff the four points are coplanar, and
/// equal to six times the signed volume of the tetrahedron p1 p2 q1 q2.
inline double coplanarity_residual(const Vec3& p1, const Vec3& p2,
                                   const Vec3& q1, const Vec3& q2) {
  return (p2 - p1).dot((q1 - p1).cross(q2 - p1));
}

}  // namespace tetrakin
