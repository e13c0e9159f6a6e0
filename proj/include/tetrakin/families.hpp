#pragma once

// Closed-form generators and the classifier for the six motion kinds of the
// box mechanism:
//
//   first        rotation about a coordinate axis, b = 0 (any angle; at 180
//                degrees only b = 0 counts)
//   intermediate axis in a coordinate plane, angle != 180 deg, unique b
//   third        axis from the feasibility formula below, unique b
//   fourth/fifth half-turn about a coordinate axis plus translation in the
//                perpendicular coordinate plane (fourth: along one axis)
//   sixth        quarter-turn about a face diagonal with a full translation
//                line along the axis; exists only when d_k = d_i d_j /
//                sqrt(d_i^2 + d_j^2)
//
// Third-kind axis: with D_i = d_i^-2 and s = cot(phi/2),
//     u_i^2 = [(s^2+1) - (3 s^2 + 1) D_i / (D1+D2+D3)] / 2,
// feasible iff every u_i^2 > 0, i.e. (s^2+1)/(3 s^2+1) > max D_i / sum D_i.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "tetrakin/geometry.hpp"
#include "tetrakin/mechanism.hpp"
#include "tetrakin/solver.hpp"

namespace tetrakin {

enum class KindTag {
  NotAMotion,
  Unclassified,
  Identity,
  First,
  Intermediate,
  Third,
  Fourth,
  Fifth,
  Sixth,
};

inline const char* kind_name(KindTag t) {
  switch (t) {
    case KindTag::NotAMotion: return "not_a_motion";
    case KindTag::Unclassified: return "unclassified";
    case KindTag::Identity: return "identity";
    case KindTag::First: return "first";
    case KindTag::Intermediate: return "intermediate";
    case KindTag::Third: return "third";
    case KindTag::Fourth: return "fourth";
    case KindTag::Fifth: return "fifth";
    case KindTag::Sixth: return "sixth";
  }
  return "?";
}

/// Classification record. Fields are populated as applicable to the tag:
/// axis_i/axis_j for coordinate axes, k for the sixth-kind special axis,
/// phi/s for the angle, signs for third-kind branches, c1/c2 for in-plane
/// translations, t for the sixth-kind line parameter.
struct MotionKind {
  KindTag tag = KindTag::Unclassified;
  int axis_i = 0, axis_j = 0, k = 0;  // 1-based; 0 = unset
  double phi = 0.0, s = 0.0;
  std::array<int, 3> signs = {0, 0, 0};
  double c1 = 0.0, c2 = 0.0, t = 0.0;
  Vec3 axis = Vec3::Zero();
  double max_scaled_residual = 0.0;
};

struct ThirdKindParams {
  double s = 0.0;
  std::array<int, 3> signs = {1, 1, 1};
  Vec3 u = Vec3::Zero();
  double lambda = 0.0;  // the common ratio (s^2+1-2u_i^2)/D_i, kept for diagnostics
};

/// Feasibility function of the third-kind axis: u_i^2 > 0 for all i iff
/// f_of(s^2) > max D_i / sum D_i. Strictly decreasing from 1 at s2 = 0 to
/// 1/3 as s2 -> inf; f_of(1) = 1/2, which is exactly the sixth-kind
/// dimension condition max D_i = sum of the other two.
inline double f_of(double s2) {
  if (!(s2 >= 0.0)) throw std::invalid_argument("f_of: s2 must be nonnegative");
  return (s2 + 1.0) / (3.0 * s2 + 1.0);
}

/// Rotation about coordinate axis `axis` (1..3) through phi, b = 0.
/// Admitted for every box and every angle.
inline RigidMotion first_kind(int axis, double phi) {
  if (axis < 1 || axis > 3) throw std::invalid_argument("first_kind: axis must be 1..3");
  RigidMotion m;
  m.A = rotation_about(Vec3::Unit(axis - 1), phi);
  return m;
}

/// Rotation about C1 e_i + C2 e_j (i != j, not both zero) through
/// phi != 0, pi; the translation is the unique solution of the constraint
/// system. With C1*C2 = 0 this degenerates to the first kind (b = 0).
inline RigidMotion intermediate_kind(const BoxDims& dims, int i, int j, double C1, double C2,
                                     double phi) {
  if (i == j || i < 1 || i > 3 || j < 1 || j > 3) {
    throw std::invalid_argument("intermediate_kind: axes must be distinct, 1..3");
  }
  if (C1 == 0.0 && C2 == 0.0) {
    throw std::invalid_argument("intermediate_kind: C1, C2 must not both vanish");
  }
  if (std::abs(phi - kPi) < 1e-12 || phi <= 0.0 || phi >= kTwoPi) {
    throw std::domain_error("intermediate_kind: angle 180 degrees is excluded");
  }
  Vec3 axis = C1 * Vec3::Unit(i - 1) + C2 * Vec3::Unit(j - 1);
  axis.normalize();
  RigidMotion m;
  m.A = rotation_about(axis, phi);
  const SolutionSet sol = solve_b(affine_system_direct(build_pair(dims), m.A));
  if (sol.kind != SolutionKind::Unique) {
    throw std::domain_error("intermediate_kind: translation not unique at this rotation");
  }
  m.b = sol.point;
  return m;
}

/// Axis of the third-kind rotation at parameter s, or nullopt when some
/// u_i^2 <= 0 (and at |s| = 1, where no third-kind motion exists).
inline std::optional<ThirdKindParams> third_kind_axis(const BoxDims& dims, double s,
                                                      std::array<int, 3> signs = {1, 1, 1}) {
  if (std::abs(std::abs(s) - 1.0) < 1e-12) return std::nullopt;
  const Vec3 D = dims.inv_sq();
  const double sum = D.sum();
  const double s2 = s * s;
  ThirdKindParams p;
  p.s = s;
  p.signs = signs;
  p.lambda = (3.0 * s2 + 1.0) / sum;
  for (int i = 0; i < 3; ++i) {
    const double u2 = 0.5 * (s2 + 1.0 - (3.0 * s2 + 1.0) * D[i] / sum);
    if (!(u2 > 0.0)) return std::nullopt;
    p.u[i] = (signs[i] >= 0 ? 1.0 : -1.0) * std::sqrt(u2);
  }
  return p;
}

/// Full third-kind motion: rotation from the axis formula, unique b from the
/// solver. Throws when the axis is infeasible.
inline RigidMotion third_kind(const BoxDims& dims, double s, std::array<int, 3> signs = {1, 1, 1}) {
  const auto p = third_kind_axis(dims, s, signs);
  if (!p) throw std::domain_error("third_kind: axis infeasible at this s");
  RigidMotion m;
  m.A = rotation_about(p->u, phi_from_cot_half(s));
  const SolutionSet sol = solve_b(affine_system_direct(build_pair(dims), m.A));
  if (sol.kind != SolutionKind::Unique) {
    throw std::domain_error("third_kind: translation not unique at this rotation");
  }
  m.b = sol.point;
  return m;
}

/// Half-turn about e_axis with b = C1 e_j + C2 e_k ((axis, j, k) in cyclic
/// order). The fourth kind is the special case C2 = 0.
inline RigidMotion fifth_kind(int axis, double C1, double C2) {
  if (axis < 1 || axis > 3) throw std::invalid_argument("fifth_kind: axis must be 1..3");
  const int j = axis % 3 + 1;
  const int k = j % 3 + 1;
  RigidMotion m;
  m.A = rotation_about(Vec3::Unit(axis - 1), kPi);
  m.b = C1 * Vec3::Unit(j - 1) + C2 * Vec3::Unit(k - 1);
  return m;
}

/// Dimension condition d_k = d_i d_j / sqrt(d_i^2 + d_j^2) (equivalently
/// D_k = D_i + D_j) within relative tolerance 1e-12.
inline bool sixth_kind_condition(const BoxDims& dims, std::array<int, 3> perm,
                                 double rel_tol = 1e-12) {
  const Vec3 d = dims.half();
  const double di = d[perm[0] - 1], dj = d[perm[1] - 1], dk = d[perm[2] - 1];
  return std::abs(dk - di * dj / std::hypot(di, dj)) <= rel_tol * dk;
}

namespace detail {

/// Sixth-kind axis for perm (i,j,k): components d_i and d_j at slots i and
/// j, zero at slot k. The sign of the d_j slot follows the parity of the
/// permutation so that (i,j,k) and (j,i,k) select the two diagonals of the
/// face perpendicular to e_k.
inline Vec3 sixth_axis(const BoxDims& dims, std::array<int, 3> perm) {
  const Vec3 d = dims.half();
  const int i = perm[0] - 1, j = perm[1] - 1, k = perm[2] - 1;
  const bool even = (perm[0] % 3 + 1 == perm[1]);
  Vec3 u = Vec3::Zero();
  u[i] = d[i];
  u[j] = (even ? 1.0 : -1.0) * d[j];
  u[k] = 0.0;
  return u.normalized();
}

}  // namespace detail

/// Quarter-turn (sense +1: 90 degrees, sense -1: 270 degrees) about the
/// face diagonal selected by perm, with b = b0 + t * u where b0 is the
/// minimal-norm particular solution and the solution line runs along the
/// rotation axis. Exists only under the dimension condition.
inline RigidMotion sixth_kind(const BoxDims& dims, std::array<int, 3> perm, int sense, double t) {
  if (!sixth_kind_condition(dims, perm)) {
    throw std::domain_error("sixth_kind: dimension condition d_k = d_i d_j / sqrt(d_i^2 + d_j^2) not satisfied");
  }
  const Vec3 u = detail::sixth_axis(dims, perm);
  RigidMotion m;
  m.A = rotation_about(u, sense >= 0 ? 0.5 * kPi : 1.5 * kPi);
  const SolutionSet sol = solve_b(affine_system_direct(build_pair(dims), m.A));
  if (sol.kind != SolutionKind::Affine || sol.dimension() != 1) {
    throw std::domain_error("sixth_kind: expected a one-dimensional translation line");
  }
  m.b = sol.point + t * u;
  return m;
}

namespace detail {

inline constexpr double kAngleTol = 1e-9;
inline constexpr double kAxisTol = 1e-9;

/// Canonical representative of the (u, s) ~ (-u, -s) identification: the
/// first component of u that is distinguishably nonzero is made positive.
inline void canonicalize_axis(Vec3* u, double* s, double* phi, double axis_tol = kAxisTol) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs((*u)[i]) > axis_tol) {
      if ((*u)[i] < 0.0) {
        *u = -*u;
        *s = -*s;
        *phi = kTwoPi - *phi;
      }
      return;
    }
  }
}

}  // namespace detail

/// Canonicalizes third-kind branch labels under (u, s) ~ (-u, -s): the first
/// sign is made positive. Used by round-trip tests.
inline std::pair<double, std::array<int, 3>> canonical_third_branch(double s,
                                                                    std::array<int, 3> signs) {
  if (signs[0] < 0) {
    return {-s, {-signs[0], -signs[1], -signs[2]}};
  }
  return {s, signs};
}

namespace detail {

/// One pass of the decision chain at the given axis/angle tolerances.
inline MotionKind classify_pass(const TetraPair& pair, const RigidMotion& m,
                                double residual_tol, double axis_tol, double angle_tol) {
  const BoxDims& dims = *pair.dims;
  MotionKind out;
  out.max_scaled_residual = max_scaled_residual(pair, m);
  if (!(out.max_scaled_residual < residual_tol)) {
    out.tag = KindTag::NotAMotion;
    return out;
  }

  const double box_scale = dims.half().maxCoeff();
  const auto aa = axis_angle_from_rotation(m.A, angle_tol);
  if (!aa) {
    out.tag = KindTag::Identity;
    return out;
  }
  Vec3 u = aa->u;
  double s = aa->s;
  double phi = aa->phi;
  detail::canonicalize_axis(&u, &s, &phi, axis_tol);
  out.axis = u;
  out.phi = phi;
  out.s = s;

  int n_zero = 0;
  std::array<bool, 3> zero{};
  for (int i = 0; i < 3; ++i) {
    zero[i] = std::abs(u[i]) < axis_tol;
    if (zero[i]) ++n_zero;
  }
  const bool quarter_turn = std::abs(std::abs(s) - 1.0) < angle_tol;
  const bool half_turn = std::abs(s) < angle_tol;

  // sixth: quarter turn about a face diagonal on a condition box
  if (quarter_turn && n_zero == 1) {
    int k = 0;
    while (!zero[k]) ++k;
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    const std::array<int, 3> perm = {i + 1, j + 1, k + 1};
    const Vec3 d = dims.half();
    const double h = std::hypot(d[i], d[j]);
    const bool axis_matches = std::abs(std::abs(u[i]) - d[i] / h) < 1e-7 &&
                              std::abs(std::abs(u[j]) - d[j] / h) < 1e-7;
    if (axis_matches && sixth_kind_condition(dims, perm)) {
      const SolutionSet sol = solve_b(affine_system_direct(pair, m.A));
      if (sol.kind == SolutionKind::Affine && sol.dimension() == 1) {
        out.tag = KindTag::Sixth;
        out.k = k + 1;
        out.axis_i = i + 1;
        out.axis_j = j + 1;
        out.t = (m.b - sol.point).dot(u);
        return out;
      }
    }
  }

  // third: all axis components distinguishably nonzero, matching the axis formula
  if (n_zero == 0 && !quarter_turn) {
    const Vec3 D = dims.inv_sq();
    const double sum = D.sum();
    bool matches = true;
    for (int i = 0; i < 3; ++i) {
      const double u2 = 0.5 * (s * s + 1.0 - (3.0 * s * s + 1.0) * D[i] / sum);
      if (u2 <= 0.0 || std::abs(u[i] * u[i] - u2) > 1e-7) matches = false;
    }
    if (matches) {
      out.tag = KindTag::Third;
      for (int i = 0; i < 3; ++i) out.signs[i] = u[i] > 0.0 ? 1 : -1;
      return out;
    }
    out.tag = KindTag::Unclassified;
    return out;
  }

  // half-turn about a coordinate axis: first (b = 0), fourth, or fifth
  if (half_turn && n_zero == 2) {
    int axis = 0;
    while (zero[axis]) ++axis;
    const int j = (axis + 1) % 3, k = (axis + 2) % 3;
    out.axis_i = axis + 1;
    out.c1 = m.b[j];
    out.c2 = m.b[k];
    const double b_tol = 1e-9 * box_scale;
    const int nonzero_b = int(std::abs(out.c1) > b_tol) + int(std::abs(out.c2) > b_tol);
    if (std::abs(m.b[axis]) > b_tol) {
      out.tag = KindTag::Unclassified;  // b along the half-turn axis is never admitted
      return out;
    }
    out.tag = nonzero_b == 0 ? KindTag::First : (nonzero_b == 1 ? KindTag::Fourth : KindTag::Fifth);
    if (out.tag == KindTag::First) out.phi = kPi;
    return out;
  }

  // remaining: axis on a coordinate axis (first) or in a coordinate plane
  // (intermediate), any angle except the cases peeled off above
  if (n_zero == 2) {
    int axis = 0;
    while (zero[axis]) ++axis;
    if (m.b.cwiseAbs().maxCoeff() > std::max(1e-9, axis_tol) * box_scale) {
      out.tag = KindTag::Unclassified;
      return out;
    }
    out.tag = KindTag::First;
    out.axis_i = axis + 1;
    return out;
  }
  if (n_zero == 1 && !half_turn) {
    int k = 0;
    while (!zero[k]) ++k;
    out.tag = KindTag::Intermediate;
    out.axis_i = (k + 1) % 3 + 1;
    out.axis_j = (k + 2) % 3 + 1;
    out.c1 = u[out.axis_i - 1];
    out.c2 = u[out.axis_j - 1];
    return out;
  }

  out.tag = KindTag::Unclassified;
  return out;
}

}  // namespace detail

/// Names the smallest family of the motion taxonomy containing the given
/// placement, with the membership tests ordered most specific first (identity, sixth, third,
/// fifth including fourth, intermediate including first). NotAMotion when
/// the residuals exceed residual_tol (scaled). The primary pass runs at the
/// strict axis/angle tolerance of 1e-9; before declaring Unclassified (a
/// completeness violation, never expected) a second pass rechecks with a
/// looser axis test, since numerically projected motions near the identity
/// bifurcation carry a few 1e-8 of noise in the weakly constrained axis
/// directions.
inline MotionKind classify(const TetraPair& pair, const RigidMotion& m,
                           double residual_tol = 1e-9) {
  if (!pair.dims) throw std::invalid_argument("classify: requires a box pair");
  MotionKind out = detail::classify_pass(pair, m, residual_tol, detail::kAxisTol,
                                         detail::kAngleTol);
  if (out.tag == KindTag::Unclassified) {
    out = detail::classify_pass(pair, m, residual_tol, 1e-6, 1e-6);
  }
  return out;
}

}  // namespace tetrakin
