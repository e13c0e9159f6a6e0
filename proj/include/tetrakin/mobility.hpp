#pragma once

// First-order rigidity of bar structures with length and coplanar-edge-pair
// constraints: the coaxial pyramid pairs and the tetrahedra pair expressed
// in the same machinery.

#include <optional>
#include <vector>

#include "tetrakin/geometry.hpp"
#include "tetrakin/mechanism.hpp"

namespace tetrakin {

struct Bar {
  int a = 0, b = 0;
  double rest = 0.0;
};

struct CoplanarPair {
  int a = 0, b = 0;  // first edge
  int c = 0, d = 0;  // second edge
  double scale = 1.0;  // product of the two rest edge lengths
};

/// Vertices with bar (length) constraints, coplanar-edge-pair constraints,
/// and a per-coordinate fixed mask. Configurations are flat 3N vectors.
struct BarStructure {
  std::vector<Vec3> vertices;
  std::vector<Bar> bars;
  std::vector<CoplanarPair> coplanar_pairs;
  std::vector<char> fixed;  // size 3N, nonzero = coordinate pinned

  int n_vertices() const { return int(vertices.size()); }
  int n_constraints() const { return int(bars.size() + coplanar_pairs.size()); }
  int n_free() const {
    int n = 0;
    for (char f : fixed) n += f ? 0 : 1;
    return n;
  }

  void pin_vertex(int i) {
    fixed[3 * i] = fixed[3 * i + 1] = fixed[3 * i + 2] = 1;
  }

  Eigen::VectorXd base_configuration() const {
    Eigen::VectorXd x(3 * n_vertices());
    for (int i = 0; i < n_vertices(); ++i) x.segment<3>(3 * i) = vertices[i];
    return x;
  }

  void add_bar(int a, int b) {
    bars.push_back({a, b, (vertices[a] - vertices[b]).norm()});
  }
  void add_coplanar(int a, int b, int c, int d) {
    const double s = (vertices[a] - vertices[b]).norm() * (vertices[c] - vertices[d]).norm();
    coplanar_pairs.push_back({a, b, c, d, s});
  }
};

/// Constraint values at a configuration, in commensurate units: bar rows
/// are (|p-q|^2 - rest^2) / (2 rest), coplanarity rows are the triple
/// product divided by the product of the two rest edge lengths.
inline Eigen::VectorXd constraint_values(const BarStructure& s, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(s.n_constraints());
  int row = 0;
  for (const auto& bar : s.bars) {
    const Vec3 d = x.segment<3>(3 * bar.a) - x.segment<3>(3 * bar.b);
    g[row++] = (d.squaredNorm() - bar.rest * bar.rest) / (2.0 * bar.rest);
  }
  for (const auto& cp : s.coplanar_pairs) {
    g[row++] = coplanarity_residual(x.segment<3>(3 * cp.a), x.segment<3>(3 * cp.b),
                                    x.segment<3>(3 * cp.c), x.segment<3>(3 * cp.d)) /
               cp.scale;
  }
  return g;
}

/// Analytic constraint gradients restricted to the free coordinates: one row
/// per bar, one per coplanar pair, scaled exactly as constraint_values so
/// bar and coplanarity rows have comparable magnitude for rank analysis.
inline Eigen::MatrixXd constraint_jacobian(const BarStructure& s, const Eigen::VectorXd& x) {
  const int n = s.n_vertices();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(s.n_constraints(), 3 * n);
  int row = 0;
  for (const auto& bar : s.bars) {
    const Vec3 d = x.segment<3>(3 * bar.a) - x.segment<3>(3 * bar.b);
    full.block<1, 3>(row, 3 * bar.a) = d.transpose() / bar.rest;
    full.block<1, 3>(row, 3 * bar.b) = -d.transpose() / bar.rest;
    ++row;
  }
  for (const auto& cp : s.coplanar_pairs) {
    const Vec3 pa = x.segment<3>(3 * cp.a), pb = x.segment<3>(3 * cp.b);
    const Vec3 pc = x.segment<3>(3 * cp.c), pd = x.segment<3>(3 * cp.d);
    const Vec3 gb = (pc - pa).cross(pd - pa);
    const Vec3 gc = (pd - pa).cross(pb - pa);
    const Vec3 gd = (pb - pa).cross(pc - pa);
    full.block<1, 3>(row, 3 * cp.b) += gb.transpose() / cp.scale;
    full.block<1, 3>(row, 3 * cp.c) += gc.transpose() / cp.scale;
    full.block<1, 3>(row, 3 * cp.d) += gd.transpose() / cp.scale;
    full.block<1, 3>(row, 3 * cp.a) -= (gb + gc + gd).transpose() / cp.scale;
    ++row;
  }
  Eigen::MatrixXd J(s.n_constraints(), s.n_free());
  int col = 0;
  for (int c = 0; c < 3 * n; ++c) {
    if (!s.fixed[c]) J.col(col++) = full.col(c);
  }
  return J;
}

struct MobilityReport {
  int free_count = 0;
  int rank = 0;
  int dof = 0;  // free_count - rank
  std::vector<double> singular_values;
  double max_violation = 0.0;
};

inline constexpr double kMobilityRankTol = 1e-8;

/// Infinitesimal degree of freedom at a configuration: free coordinate
/// count minus the numerical Jacobian rank (singular values above
/// kMobilityRankTol * sigma_max; the full spectrum is reported so the
/// threshold is auditable). Returns nullopt when the configuration violates
/// the constraints beyond config_tol; max_violation carries the magnitude
/// either way.
inline std::optional<MobilityReport> infinitesimal_dof(const BarStructure& s,
                                                       const Eigen::VectorXd& x,
                                                       double config_tol = 1e-8,
                                                       MobilityReport* rejected = nullptr) {
  MobilityReport rep;
  rep.max_violation = constraint_values(s, x).cwiseAbs().maxCoeff();
  if (rep.max_violation > config_tol) {
    if (rejected) *rejected = rep;
    return std::nullopt;
  }
  const Eigen::MatrixXd J = constraint_jacobian(s, x);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  rep.free_count = s.n_free();
  rep.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() ? sv(0) : 0.0;
  for (double v : rep.singular_values) {
    if (v > kMobilityRankTol * smax) ++rep.rank;
  }
  rep.dof = rep.free_count - rep.rank;
  return rep;
}

/// Smallest ratio at which the right pyramid over a regular n-gon exists
/// (lateral edge above the base circumradius).
inline double min_pyramid_ratio(int n) { return 1.0 / (2.0 * std::sin(kPi / n)); }

/// Reference ratio for the (n, ratio) sweeps: sqrt(3) / (2 sin(pi/n)), the
/// constant-apex-shape scaling that reduces to the regular tetrahedron
/// (lateral edge = basic edge) at n = 3.
inline double regular_ratio(int n) { return std::sqrt(3.0) / (2.0 * std::sin(kPi / n)); }

struct PyramidPair {
  BarStructure structure;
  int n = 0;
  double ratio = 0.0;
  double base_edge = 1.0;
  double height = 0.0;   // apex over base plane
  double half_offset = 0.0;  // base planes sit at z = -+ half_offset
  // vertex layout: 0..n-1 base of the fixed pyramid, n its apex,
  //                n+1..2n base of the moving pyramid, 2n+1 its apex
  int moving_begin() const { return n + 1; }
  int moving_end() const { return 2 * n + 2; }
};

/// Two congruent coaxial right pyramids with regular n-gon bases twisted by
/// pi/n, pointing in opposite directions, placed so that the basic edges of
/// one intersect the lateral edges of the other and conversely. The axial
/// placement that realizes the intersections is z_b = H (1 - cos(pi/n)) / 2,
/// verified against the coplanarity residuals at build time. One lateral
/// face (apex and two base vertices) of the first pyramid is pinned.
inline PyramidPair build_pyramid_pair(int n, double ratio) {
  if (n < 3) throw std::invalid_argument("build_pyramid_pair: n must be >= 3");
  const double ell = 1.0;
  const double R = ell / (2.0 * std::sin(kPi / n));
  const double L = ratio * ell;
  if (!(L * L - R * R > 1e-9)) {
    throw std::invalid_argument("build_pyramid_pair: ratio too small, lateral edge must exceed the base circumradius");
  }
  const double H = std::sqrt(L * L - R * R);
  const double zb = 0.5 * H * (1.0 - std::cos(kPi / n));

  PyramidPair pp;
  pp.n = n;
  pp.ratio = ratio;
  pp.base_edge = ell;
  pp.height = H;
  pp.half_offset = zb;
  BarStructure& s = pp.structure;
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * k / n;
    s.vertices.emplace_back(R * std::cos(t), R * std::sin(t), -zb);
  }
  s.vertices.emplace_back(0.0, 0.0, -zb + H);  // fixed apex
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * k / n + kPi / n;
    s.vertices.emplace_back(R * std::cos(t), R * std::sin(t), zb);
  }
  s.vertices.emplace_back(0.0, 0.0, zb - H);  // moving apex
  s.fixed.assign(3 * s.n_vertices(), 0);

  const int apex_u = n, apex_w = 2 * n + 1;
  for (int k = 0; k < n; ++k) {
    s.add_bar(k, (k + 1) % n);
    s.add_bar(k, apex_u);
    s.add_bar(n + 1 + k, n + 1 + (k + 1) % n);
    s.add_bar(n + 1 + k, apex_w);
  }
  for (int k = 0; k < n; ++k) {
    // base edge of the fixed pyramid against the lateral edge of the moving
    // one crossing it, and conversely
    s.add_coplanar(k, (k + 1) % n, apex_w, n + 1 + k);
    s.add_coplanar(n + 1 + k, n + 1 + (k + 1) % n, apex_u, (k + 1) % n);
  }
  s.pin_vertex(0);
  s.pin_vertex(1);
  s.pin_vertex(apex_u);

  const double worst = constraint_values(s, s.base_configuration()).cwiseAbs().maxCoeff();
  if (worst > 1e-9) {
    throw std::logic_error("build_pyramid_pair: basic position fails the intersection constraints");
  }
  return pp;
}

/// The tetrahedra pair as a bar structure: 8 vertices, the 12 tetrahedron
/// edges as bars, the 6 face-diagonal pairings as coplanarity constraints,
/// fixed tetrahedron fully pinned.
inline BarStructure tetra_pair_as_bar_structure(const BoxDims& dims) {
  const TetraPair pair = build_pair(dims);
  BarStructure s;
  for (const Vec3& p : pair.P) s.vertices.push_back(p);
  for (const Vec3& q : pair.Qbar) s.vertices.push_back(q);
  s.fixed.assign(3 * s.n_vertices(), 0);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      s.add_bar(i, j);
      s.add_bar(4 + i, 4 + j);
    }
  }
  for (const auto& e : edge_pairing()) {
    s.add_coplanar(e.pi, e.pj, 4 + e.qk, 4 + e.ql);
  }
  for (int i = 0; i < 4; ++i) s.pin_vertex(i);
  return s;
}

/// Configuration of the axial screw family: the moving pyramid rotated by
/// `angle` about the common axis and translated along it by the compensating
/// amount found by a one-dimensional root bracket on the coplanarity
/// residual, then verified on all pairs. Returns nullopt when no bracketed
/// root exists or some residual stays off zero.
inline std::optional<Eigen::VectorXd> pyramid_axial_motion(const PyramidPair& pp, double angle) {
  const BarStructure& s = pp.structure;
  auto config_at = [&](double tau) {
    Eigen::VectorXd x = s.base_configuration();
    const Mat3 Rz = rotation_about(Vec3::UnitZ(), angle);
    for (int i = pp.moving_begin(); i < pp.moving_end(); ++i) {
      x.segment<3>(3 * i) = Rz * s.vertices[i] + Vec3(0.0, 0.0, tau);
    }
    return x;
  };
  auto first_residual = [&](double tau) {
    const Eigen::VectorXd x = config_at(tau);
    const auto& cp = s.coplanar_pairs.front();
    return coplanarity_residual(x.segment<3>(3 * cp.a), x.segment<3>(3 * cp.b),
                                x.segment<3>(3 * cp.c), x.segment<3>(3 * cp.d));
  };
  double lo = -0.5 * pp.height, hi = 0.5 * pp.height;
  double flo = first_residual(lo), fhi = first_residual(hi);
  for (int grow = 0; grow < 40 && flo * fhi > 0.0; ++grow) {
    lo *= 1.4;
    hi *= 1.4;
    flo = first_residual(lo);
    fhi = first_residual(hi);
  }
  if (flo * fhi > 0.0) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = first_residual(mid);
    if (flo * fm <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  const Eigen::VectorXd x = config_at(0.5 * (lo + hi));
  if (constraint_values(s, x).cwiseAbs().maxCoeff() > 1e-10) return std::nullopt;
  return x;
}

}  // namespace tetrakin
