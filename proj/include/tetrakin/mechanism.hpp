#pragma once

// The two congruent tetrahedra inscribed in a (general) parallelepiped, the
// face-diagonal edge pairing, and the six coplanarity residuals of a
// candidate placement of the moving tetrahedron.

#include <array>
#include <optional>
#include <stdexcept>

#include "tetrakin/geometry.hpp"

namespace tetrakin {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Half-dimensions of a rectangular box with vertices (+-d1, +-d2, +-d3).
struct BoxDims {
  double d1 = 1.0, d2 = 1.0, d3 = 1.0;

  BoxDims() = default;
  BoxDims(double a, double b, double c) : d1(a), d2(b), d3(c) {
    if (!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0)) {
      throw std::invalid_argument("BoxDims: half-dimensions must be positive");
    }
  }

  Vec3 half() const { return Vec3(d1, d2, d3); }
  /// D_i = d_i^{-2}
  Vec3 inv_sq() const { return Vec3(1.0 / (d1 * d1), 1.0 / (d2 * d2), 1.0 / (d3 * d3)); }
  /// max D_i / (D_1 + D_2 + D_3)
  double ratio_max() const {
    const Vec3 D = inv_sq();
    return D.maxCoeff() / D.sum();
  }
  bool is_cube(double rel_tol = 1e-12) const {
    const double dmax = std::max({d1, d2, d3});
    return std::abs(d1 - d2) <= rel_tol * dmax && std::abs(d2 - d3) <= rel_tol * dmax;
  }
};

/// Linear map sending the reference cube vertices to the parallelepiped
/// vertices; diagonal for a box, general invertible with det > 0 otherwise.
struct ParallelepipedMap {
  Mat3 D = Mat3::Identity();

  ParallelepipedMap() = default;
  explicit ParallelepipedMap(const Mat3& map) : D(map) {
    const double det = D.determinant();
    if (!(det > 1e-12 * std::pow(D.norm() + 1e-300, 3.0))) {
      throw std::invalid_argument("ParallelepipedMap: det D must be positive and non-negligible");
    }
  }
  static ParallelepipedMap from_dims(const BoxDims& dims) {
    ParallelepipedMap m;
    m.D = dims.half().asDiagonal();
    return m;
  }
};

/// One coplanarity constraint: edge P_i P_j paired with edge Q_k Q_l.
struct EdgePairing {
  int pi, pj, qk, ql;  // 0-based vertex indices
};

/// Fixed pairing table in face order +z, -z, +x, -x, +y, -y. Each row is a
/// permutation of (1,2,3,4); both segments of a pairing are the two
/// diagonals of the named box face in the basic position.
inline const std::array<EdgePairing, 6>& edge_pairing() {
  static const std::array<EdgePairing, 6> table = {{
      {2, 3, 0, 1},  // +z: P3 P4 | Q1 Q2
      {0, 1, 2, 3},  // -z: P1 P2 | Q3 Q4
      {0, 3, 1, 2},  // +x: P1 P4 | Q2 Q3
      {1, 2, 0, 3},  // -x: P2 P3 | Q1 Q4
      {1, 3, 0, 2},  // +y: P2 P4 | Q1 Q3
      {0, 2, 1, 3},  // -y: P1 P3 | Q2 Q4
  }};
  return table;
}

/// Reference cube vertices P0_i of the fixed tetrahedron.
inline const std::array<Vec3, 4>& cube_vertices() {
  static const std::array<Vec3, 4> v = {Vec3(1, -1, -1), Vec3(-1, 1, -1),
                                        Vec3(-1, -1, 1), Vec3(1, 1, 1)};
  return v;
}

/// Fixed vertices P_i = D P0_i and basic moving vertices Qbar_i = -P_i.
struct TetraPair {
  std::array<Vec3, 4> P;
  std::array<Vec3, 4> Qbar;
  Mat3 D = Mat3::Identity();
  std::optional<BoxDims> dims;  // set when built from a box
};

inline TetraPair build_pair(const ParallelepipedMap& map) {
  TetraPair pair;
  pair.D = map.D;
  for (int i = 0; i < 4; ++i) {
    pair.P[i] = map.D * cube_vertices()[i];
    pair.Qbar[i] = -pair.P[i];
  }
  return pair;
}

inline TetraPair build_pair(const BoxDims& dims) {
  TetraPair pair = build_pair(ParallelepipedMap::from_dims(dims));
  pair.dims = dims;
  return pair;
}

/// The six raw coplanarity residuals of the placement Phi(x) = A x + b,
/// ordered by the pairing table. All-zero iff the placement is an admitted
/// motion.
inline Vec6 residuals(const TetraPair& pair, const RigidMotion& m) {
  Vec6 r;
  int row = 0;
  for (const auto& e : edge_pairing()) {
    r[row++] = coplanarity_residual(pair.P[e.pi], pair.P[e.pj],
                                    m.apply(pair.Qbar[e.qk]), m.apply(pair.Qbar[e.ql]));
  }
  return r;
}

/// Per-pairing scale: product of the two basic segment lengths. Raw
/// residuals grow like d^3, so zero tests divide by this.
inline Vec6 residual_scales(const TetraPair& pair) {
  Vec6 s;
  int row = 0;
  for (const auto& e : edge_pairing()) {
    s[row++] = (pair.P[e.pj] - pair.P[e.pi]).norm() *
               (pair.Qbar[e.ql] - pair.Qbar[e.qk]).norm();
  }
  return s;
}

inline double max_scaled_residual(const TetraPair& pair, const RigidMotion& m) {
  return (residuals(pair, m).cwiseQuotient(residual_scales(pair))).cwiseAbs().maxCoeff();
}

/// Same constraints evaluated through the conjugated motion
/// D^-1 A D (x) + D^-1 b acting on the cube vertices. Every entry equals the
/// corresponding residuals() entry divided by det D (> 0), so the zero sets
/// and sign patterns coincide.
inline Vec6 conjugated_motion_check(const ParallelepipedMap& map, const RigidMotion& m) {
  const Mat3 Dinv = map.D.inverse();
  RigidMotion conj;
  conj.A = Dinv * m.A * map.D;
  conj.b = Dinv * m.b;
  TetraPair cube = build_pair(BoxDims(1.0, 1.0, 1.0));
  Vec6 r;
  int row = 0;
  for (const auto& e : edge_pairing()) {
    r[row++] = coplanarity_residual(cube.P[e.pi], cube.P[e.pj],
                                    conj.apply(cube.Qbar[e.qk]), conj.apply(cube.Qbar[e.ql]));
  }
  return r;
}

namespace detail {

/// Coefficients and right-hand side of one trace-style (II/i) equation for a
/// general conjugated matrix B: rows are indexed by the cyclic permutations
/// (1,2,3) -> (2,3,1) -> (3,1,2).
inline void ii_row(const Mat3& B, int p, int q, int r, Vec3* coeff, double* rhs) {
  auto a = [&B](int i, int j) { return B(i - 1, j - 1); };
  (*coeff) = Vec3::Zero();
  (*coeff)[p - 1] = -(a(q, r) + a(r, q));
  (*coeff)[q - 1] = a(p, r);
  (*coeff)[r - 1] = a(p, q);
  *rhs = a(p, q) * a(q, p) + a(r, p) * a(p, r) + (a(q, q) + a(r, r)) * (1.0 - a(p, p));
}

}  // namespace detail

/// The sum of the three (II/i) equations is the identity 0 = 0 for every
/// invertible map and rotation: the left-hand coefficients cancel
/// symbolically and the right-hand sides sum to 2 Tr(B) - 2 m2(B), which
/// vanishes for B similar to a rotation. Returns the magnitude of the summed
/// row (coefficients and right-hand side); the contract is a value below
/// 1e-10 for every input.
inline double ii_sum_identity(const ParallelepipedMap& map, const Mat3& A) {
  const Mat3 B = map.D.inverse() * A * map.D;
  Vec3 coeff_sum = Vec3::Zero();
  double rhs_sum = 0.0;
  static const int perms[3][3] = {{1, 2, 3}, {2, 3, 1}, {3, 1, 2}};
  for (const auto& p : perms) {
    Vec3 c;
    double r;
    detail::ii_row(B, p[0], p[1], p[2], &c, &r);
    coeff_sum += c;
    rhs_sum += r;
  }
  return std::max(coeff_sum.cwiseAbs().maxCoeff(), std::abs(rhs_sum));
}

inline double ii_sum_identity(const ParallelepipedMap& map, const AxisAngle& aa) {
  return ii_sum_identity(map, rotation_from_axis_angle(aa));
}

}  // namespace tetrakin
