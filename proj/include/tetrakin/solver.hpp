#pragma once

// For a fixed rotation part the six coplanarity constraints are affine in
// the translation b. Two independent formulations are kept side by side:
// the direct multilinear extraction from the vertex geometry, and a reduced
// 6x4 coefficient array obtained by conjugating the constraints to the unit
// cube, rescaling rows, and substituting the angle surrogate s = cot(phi/2).
// Rescaled back to the original unknowns they must produce identical
// solution sets; cross_check enforces that.

#include <string>

#include "tetrakin/geometry.hpp"
#include "tetrakin/mechanism.hpp"

namespace tetrakin {

using Mat63 = Eigen::Matrix<double, 6, 3>;
using Mat64 = Eigen::Matrix<double, 6, 4>;

enum class SystemProvenance { Direct, ReducedC };

/// residuals(pair, {A, b}) == M * b - rhs, exactly, for all b.
struct ConstraintSystem {
  Mat63 M;
  Vec6 rhs;
  SystemProvenance provenance = SystemProvenance::Direct;
};

/// Splits each coplanarity determinant into its affine parts by
/// multilinearity: row = (A(Ql - Qk)) x (Pj - Pi), rhs = -det at b = 0.
inline ConstraintSystem affine_system_direct(const TetraPair& pair, const Mat3& A) {
  ConstraintSystem sys;
  sys.provenance = SystemProvenance::Direct;
  int row = 0;
  for (const auto& e : edge_pairing()) {
    const Vec3 edge = pair.P[e.pj] - pair.P[e.pi];
    const Vec3 v1 = A * pair.Qbar[e.qk] - pair.P[e.pi];
    const Vec3 v2 = A * pair.Qbar[e.ql] - pair.P[e.pi];
    sys.M.row(row) = (A * (pair.Qbar[e.ql] - pair.Qbar[e.qk])).cross(edge).transpose();
    sys.rhs[row] = -edge.dot(v1.cross(v2));
    ++row;
  }
  return sys;
}

/// The reduced 6x4 coefficient/right-hand-side array, rows I/1..I/3 then
/// II/1..II/3, columns = coefficients of b1,b2,b3 then the right-hand side.
/// Kept entry-for-entry in this factored form (the row identities checked
/// by the tests pin every term); no algebraic simplification.
inline Mat64 reduced_matrix_C(const AxisAngle& aa, double D1, double D2, double D3) {
  const double u1 = aa.u.x(), u2 = aa.u.y(), u3 = aa.u.z(), s = aa.s;
  Mat64 C;
  C << u1 * u1 - s * s, u1 * u2 + s * u3, u3 * u1 - s * u2, u2 * u3 * (D2 + D3),
      u1 * u2 - s * u3, u2 * u2 - s * s, u2 * u3 + s * u1, u3 * u1 * (D3 + D1),
      u3 * u1 + s * u2, u2 * u3 - s * u1, u3 * u3 - s * s, u1 * u2 * (D1 + D2),
      -u2 * u3 * (D2 + D3) + s * u1 * (D3 - D2), (u3 * u1 - s * u2) * D2,
      (u1 * u2 + s * u3) * D3, 0.0,
      (u2 * u3 + s * u1) * D1, -u3 * u1 * (D3 + D1) + s * u2 * (D1 - D3),
      (u1 * u2 - s * u3) * D3, 0.0,
      (u2 * u3 - s * u1) * D1, (u3 * u1 + s * u2) * D2,
      -u1 * u2 * (D1 + D2) + s * u3 * (D2 - D1), 0.0;
  return C;
}

/// Undoes the scalings baked into the reduced array (row factors leave the
/// solution set alone; the fourth column carries a division by 2 d1 d2 d3,
/// which must be multiplied back) so that the resulting system in b has
/// exactly the same solution set as the direct formulation.
inline ConstraintSystem system_from_reduced_C(const AxisAngle& aa, const BoxDims& dims) {
  const Vec3 D = dims.inv_sq();
  const Mat64 C = reduced_matrix_C(aa, D.x(), D.y(), D.z());
  ConstraintSystem sys;
  sys.provenance = SystemProvenance::ReducedC;
  sys.M = C.leftCols<3>();
  sys.rhs = C.col(3) * (2.0 * dims.d1 * dims.d2 * dims.d3);
  return sys;
}

enum class SolutionKind { Empty, Unique, Affine };

/// Solved description of {b : M b = rhs}. point is the minimal-norm
/// particular solution when the set is nonempty; basis spans the
/// homogeneous solutions (orthonormal columns).
struct SolutionSet {
  SolutionKind kind = SolutionKind::Empty;
  Vec3 point = Vec3::Zero();
  Eigen::Matrix<double, 3, Eigen::Dynamic> basis;

  int dimension() const { return kind == SolutionKind::Empty ? -1 : int(basis.cols()); }
};

inline constexpr double kRankRelTol = 1e-8;

/// Rank-revealing solve of the 6x3 system. Rank decisions use singular
/// values at a relative threshold of kRankRelTol * sigma_max; consistency of
/// the right-hand side is tested against tol scaled by the system magnitude.
inline SolutionSet solve_b(const ConstraintSystem& sys, double tol = 1e-8) {
  Eigen::JacobiSVD<Mat63> svd(sys.M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  int rank = 0;
  for (int i = 0; i < 3; ++i) {
    if (sv(i) > kRankRelTol * smax) ++rank;
  }
  if (smax <= 0.0) rank = 0;

  Vec3 point = Vec3::Zero();
  for (int i = 0; i < rank; ++i) {
    point += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(sys.rhs) / sv(i));
  }
  // scale against the system magnitude, so zero right-hand sides (family
  // rotations with b = 0) still read as consistent
  const double scale = sys.rhs.cwiseAbs().maxCoeff() + smax * (1.0 + point.cwiseAbs().maxCoeff());
  const bool consistent = (sys.M * point - sys.rhs).cwiseAbs().maxCoeff() <= tol * scale;

  SolutionSet sol;
  if (!consistent) {
    sol.kind = SolutionKind::Empty;
    return sol;
  }
  sol.point = point;
  sol.basis = svd.matrixV().rightCols(3 - rank);
  sol.kind = (rank == 3) ? SolutionKind::Unique : SolutionKind::Affine;
  return sol;
}

struct CrossCheck {
  bool ok = false;
  int first_bad_row = -1;  // row of the system violated by the other's solution
  std::string detail;
};

namespace detail {

inline int worst_row(const ConstraintSystem& sys, const Vec3& b) {
  int idx = 0;
  (sys.M * b - sys.rhs).cwiseAbs().maxCoeff(&idx);
  return idx;
}

}  // namespace detail

/// Equivalence guard between the two formulations: solution sets must have
/// the same consistency, the same dimension, mutually satisfying particular
/// points, and aligned nullspaces. Stated for boxes, where matrix C applies.
inline CrossCheck cross_check(const TetraPair& pair, const AxisAngle& aa, double tol = 1e-7) {
  CrossCheck out;
  if (!pair.dims) {
    out.detail = "cross_check requires a box pair";
    return out;
  }
  const ConstraintSystem direct = affine_system_direct(pair, rotation_from_axis_angle(aa));
  const ConstraintSystem reduced = system_from_reduced_C(aa, *pair.dims);
  const SolutionSet sd = solve_b(direct);
  const SolutionSet sp = solve_b(reduced);

  if ((sd.kind == SolutionKind::Empty) != (sp.kind == SolutionKind::Empty)) {
    out.detail = "consistency mismatch";
    out.first_bad_row =
        detail::worst_row(sd.kind == SolutionKind::Empty ? direct : reduced,
                          sd.kind == SolutionKind::Empty ? sp.point : sd.point);
    return out;
  }
  if (sd.kind == SolutionKind::Empty) {
    out.ok = true;
    out.detail = "both empty";
    return out;
  }
  if (sd.dimension() != sp.dimension()) {
    out.detail = "dimension mismatch";
    return out;
  }
  const double scale_d = std::max(1.0, direct.M.cwiseAbs().maxCoeff() * (1.0 + sp.point.norm()));
  if ((direct.M * sp.point - direct.rhs).cwiseAbs().maxCoeff() > tol * scale_d) {
    out.first_bad_row = detail::worst_row(direct, sp.point);
    out.detail = "reduced-C representative violates direct system";
    return out;
  }
  const double scale_p = std::max(1.0, reduced.M.cwiseAbs().maxCoeff() * (1.0 + sd.point.norm()));
  if ((reduced.M * sd.point - reduced.rhs).cwiseAbs().maxCoeff() > tol * scale_p) {
    out.first_bad_row = detail::worst_row(reduced, sd.point);
    out.detail = "direct representative violates reduced-C system";
    return out;
  }
  if (sd.basis.cols() > 0) {
    // the two orthonormal nullspace bases must span the same subspace
    const auto proj = sd.basis - sp.basis * (sp.basis.transpose() * sd.basis);
    if (proj.cwiseAbs().maxCoeff() > tol) {
      out.detail = "nullspace mismatch";
      return out;
    }
  }
  out.ok = true;
  out.detail = "solution sets agree";
  return out;
}

}  // namespace tetrakin
