#pragma once

// Exploration of the third-kind solution branches (feasible s-intervals,
// connectivity, endpoint behavior), Gauss-Newton projection onto the
// constraint manifold, predictor-corrector continuation, and a stochastic
// completeness probe for the motion taxonomy.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "tetrakin/families.hpp"
#include "tetrakin/geometry.hpp"
#include "tetrakin/mechanism.hpp"
#include "tetrakin/parallel.hpp"
#include "tetrakin/random.hpp"
#include "tetrakin/solver.hpp"

namespace tetrakin {

/// Unique s2 >= 0 with f_of(s2) = y, for y in (1/3, 1]. Monotone bisection
/// to 1e-12 (the function is strictly decreasing).
inline double f_inverse(double y) {
  if (!(y > 1.0 / 3.0 && y <= 1.0)) {
    throw std::invalid_argument("f_inverse: argument must lie in (1/3, 1]");
  }
  if (y == 1.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (f_of(hi) > y) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f_of(mid) > y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

enum class Connectivity { AllS, Connected, ThreeComponents };

inline const char* connectivity_name(Connectivity c) {
  switch (c) {
    case Connectivity::AllS: return "all_s";
    case Connectivity::Connected: return "connected";
    case Connectivity::ThreeComponents: return "three_components";
  }
  return "?";
}

/// Cube: feasible for all s. Otherwise the feasible set is |s| <
/// sqrt(f_inverse(max D_i / sum D_i)), punctured at s = +-1 when that
/// radius exceeds 1 (three components) and not otherwise (connected).
/// The threshold ratio is f_of(1) = 1/2.
inline Connectivity connectivity_class(const BoxDims& dims) {
  if (dims.is_cube()) return Connectivity::AllS;
  return dims.ratio_max() >= f_of(1.0) ? Connectivity::Connected : Connectivity::ThreeComponents;
}

enum class EndpointTag { IntermediateKindLimit, FirstKindLimit, DivergesAtUnitS, Unbounded };

inline const char* endpoint_name(EndpointTag t) {
  switch (t) {
    case EndpointTag::IntermediateKindLimit: return "intermediate_kind_limit";
    case EndpointTag::FirstKindLimit: return "first_kind_limit";
    case EndpointTag::DivergesAtUnitS: return "diverges_at_unit_s";
    case EndpointTag::Unbounded: return "unbounded";
  }
  return "?";
}

struct SInterval {
  double lo = 0.0, hi = 0.0;  // open interval
  EndpointTag lo_tag = EndpointTag::IntermediateKindLimit;
  EndpointTag hi_tag = EndpointTag::IntermediateKindLimit;
};

struct BranchReport {
  BoxDims dims;
  std::array<int, 3> signs = {1, 1, 1};
  Connectivity connectivity = Connectivity::Connected;
  int component_count = 0;  // 0 stands for "all s" (cube)
  std::vector<SInterval> intervals;
  long n_samples = 0;
  double max_scaled_residual = 0.0;
  /// |b| evaluated at s-distance 1e-4 inside a diverging +-1 endpoint
  /// (0 when no such endpoint exists).
  double b_norm_near_unit_s = 0.0;
};

namespace detail {

/// u_i = 0 boundary endpoints are intermediate-kind limits, except when two
/// D_i are jointly maximal (both components vanish there), which is a
/// first-kind limit.
inline EndpointTag boundary_tag(const BoxDims& dims) {
  const Vec3 D = dims.inv_sq();
  const double dmax = D.maxCoeff();
  int n_max = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(D[i] - dmax) <= 1e-9 * dmax) ++n_max;
  }
  return n_max >= 2 ? EndpointTag::FirstKindLimit : EndpointTag::IntermediateKindLimit;
}

}  // namespace detail

/// Scans the feasible s-set of the third-kind branch with the given orthant
/// signs: uniform samples per interval plus geometric tails toward every
/// endpoint (stopping 1e-3 short of the divergent +-1 endpoints, where b
/// blows up). Every sample is verified through the residual oracle.
inline BranchReport branch_scan(const BoxDims& dims, std::array<int, 3> signs = {1, 1, 1},
                                int resolution = 2048) {
  if (resolution < 2) throw std::invalid_argument("branch_scan: resolution must be >= 2");
  BranchReport rep;
  rep.dims = dims;
  rep.signs = signs;
  rep.connectivity = connectivity_class(dims);

  const double unit_gap = 1e-3;  // closest approach to the divergent s = +-1
  if (rep.connectivity == Connectivity::AllS) {
    rep.component_count = 0;
    const double s_cap = 1e3;  // stands in for the basic position at |s| = inf
    rep.intervals = {
        {-s_cap, -1.0, EndpointTag::Unbounded, EndpointTag::DivergesAtUnitS},
        {-1.0, 1.0, EndpointTag::DivergesAtUnitS, EndpointTag::DivergesAtUnitS},
        {1.0, s_cap, EndpointTag::DivergesAtUnitS, EndpointTag::Unbounded},
    };
  } else {
    const double sigma = std::sqrt(f_inverse(dims.ratio_max()));
    // at the threshold ratio the feasibility boundary collides with the
    // divergent |s| = 1 wall (the sixth-kind bifurcation)
    const EndpointTag btag = std::abs(sigma - 1.0) < 1e-9 ? EndpointTag::DivergesAtUnitS
                                                          : detail::boundary_tag(dims);
    if (rep.connectivity == Connectivity::Connected) {
      rep.component_count = 1;
      rep.intervals = {{-sigma, sigma, btag, btag}};
    } else {
      rep.component_count = 3;
      rep.intervals = {
          {-sigma, -1.0, btag, EndpointTag::DivergesAtUnitS},
          {-1.0, 1.0, EndpointTag::DivergesAtUnitS, EndpointTag::DivergesAtUnitS},
          {1.0, sigma, EndpointTag::DivergesAtUnitS, btag},
      };
    }
  }

  const TetraPair pair = build_pair(dims);
  auto sample = [&](double s) {
    if (std::abs(std::abs(s) - 1.0) < unit_gap) return;  // b diverges at |s| = 1
    const auto p = third_kind_axis(dims, s, signs);
    if (!p) return;  // boundary round-off
    RigidMotion m;
    m.A = rotation_about(p->u, phi_from_cot_half(s));
    const SolutionSet sol = solve_b(affine_system_direct(pair, m.A));
    if (sol.kind != SolutionKind::Unique) return;
    m.b = sol.point;
    rep.max_scaled_residual = std::max(rep.max_scaled_residual, max_scaled_residual(pair, m));
    ++rep.n_samples;
  };

  for (const auto& iv : rep.intervals) {
    const double gap_lo = iv.lo_tag == EndpointTag::DivergesAtUnitS ? unit_gap : 1e-9;
    const double gap_hi = iv.hi_tag == EndpointTag::DivergesAtUnitS ? unit_gap : 1e-9;
    const double lo = iv.lo + gap_lo, hi = iv.hi - gap_hi;
    if (!(hi > lo)) continue;
    for (int k = 0; k < resolution; ++k) {
      sample(lo + (hi - lo) * (k + 0.5) / resolution);
    }
    // geometric approach to both endpoints
    for (double f = 0.25; f > 1e-12; f *= 0.5) {
      sample(lo + (hi - lo) * f);
      sample(hi - (hi - lo) * f);
    }
    // divergence probe just inside a +-1 endpoint
    auto probe_divergence = [&](double s_end, double sign) {
      const auto p = third_kind_axis(dims, s_end + sign * 1e-4, signs);
      if (!p) return;
      const Mat3 A = rotation_about(p->u, phi_from_cot_half(p->s));
      const SolutionSet sol = solve_b(affine_system_direct(pair, A));
      if (sol.kind != SolutionKind::Empty) {
        rep.b_norm_near_unit_s = std::max(rep.b_norm_near_unit_s, sol.point.norm());
      }
    };
    if (iv.lo_tag == EndpointTag::DivergesAtUnitS) probe_divergence(iv.lo, +1.0);
    if (iv.hi_tag == EndpointTag::DivergesAtUnitS) probe_divergence(iv.hi, -1.0);
  }
  return rep;
}

/// Jacobian of the six residuals with respect to the motion chart
/// (rotation vector w, translation b). The b-block is the exact affine
/// coefficient matrix; the w-block uses central differences.
inline Eigen::Matrix<double, 6, 6> motion_jacobian(const TetraPair& pair, const Vec3& w,
                                                   const Vec3& b) {
  Eigen::Matrix<double, 6, 6> J;
  J.rightCols<3>() = affine_system_direct(pair, rotation_from_rotvec(w)).M;
  const double h = 1e-7;
  for (int k = 0; k < 3; ++k) {
    Vec3 wp = w, wm = w;
    wp[k] += h;
    wm[k] -= h;
    const Vec6 rp = residuals(pair, {rotation_from_rotvec(wp), b});
    const Vec6 rm = residuals(pair, {rotation_from_rotvec(wm), b});
    J.col(k) = (rp - rm) / (2.0 * h);
  }
  return J;
}

struct RefineResult {
  bool converged = false;
  RigidMotion motion;
  double max_scaled_residual = 0.0;
  int iterations = 0;
};

/// Gauss-Newton with the pseudo-inverse step (minimum-norm), projecting m0
/// onto the constraint manifold. The constraint Jacobian has rank 5 on the
/// one-dimensional families away from bifurcations, so the pseudo-inverse
/// handles the rank deficiency naturally. Non-convergence within the
/// iteration budget is a reported outcome, not an error.
inline RefineResult newton_refine(const TetraPair& pair, const RigidMotion& m0,
                                  double tol = 1e-12, int max_iter = 80) {
  const Vec6 scales = residual_scales(pair);
  Vec3 w = rotvec_from_rotation(m0.A);
  Vec3 b = m0.b;
  RefineResult out;
  for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
    const Vec6 r = residuals(pair, {rotation_from_rotvec(w), b});
    const double err = r.cwiseQuotient(scales).cwiseAbs().maxCoeff();
    if (err < tol) {
      out.converged = true;
      break;
    }
    const Eigen::Matrix<double, 6, 6> J = motion_jacobian(pair, w, b);
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(J,
                                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Matrix<double, 6, 1> step = Eigen::Matrix<double, 6, 1>::Zero();
    for (int i = 0; i < 6; ++i) {
      if (sv(i) > 1e-10 * sv(0)) {
        step -= svd.matrixV().col(i) * (svd.matrixU().col(i).dot(r) / sv(i));
      }
    }
    // backtracking on the residual norm
    const double r0 = r.norm();
    double tstep = 1.0;
    Vec3 wn = w + step.head<3>(), bn = b + step.tail<3>();
    for (int ls = 0; ls < 25; ++ls) {
      if (residuals(pair, {rotation_from_rotvec(wn), bn}).norm() < r0) break;
      tstep *= 0.5;
      wn = w + tstep * step.head<3>();
      bn = b + tstep * step.tail<3>();
    }
    w = wn;
    b = bn;
    const double th = w.norm();
    if (th > kPi) w *= (1.0 - kTwoPi / th);  // switch to the antipodal chart
  }
  out.motion = {rotation_from_rotvec(w), b};
  out.max_scaled_residual = max_scaled_residual(pair, out.motion);
  out.converged = out.max_scaled_residual < tol;
  return out;
}

struct TracePoint {
  double param = 0.0;  // signed arc length in the (w, b) chart
  RigidMotion motion;
  double max_scaled_residual = 0.0;
};

struct ContinuationTrace {
  std::vector<TracePoint> points;
  std::string stop_reason;
};

/// Predictor-corrector tracking of a one-parameter solution set. The
/// tangent is the Jacobian nullspace direction, oriented consistently along
/// the trace; steps halve on corrector failure down to a floor of 1e-10
/// (fold or dead end), and the trace is truncated cleanly with a reason.
inline ContinuationTrace continuation(const TetraPair& pair, const RigidMotion& seed,
                                      int direction, int steps, double tol = 1e-8,
                                      double step0 = 0.05) {
  ContinuationTrace trace;
  RefineResult cur = newton_refine(pair, seed, 1e-12);
  if (!cur.converged) {
    cur = newton_refine(pair, seed, tol);
    if (!cur.converged) {
      trace.stop_reason = "seed residual above tolerance";
      return trace;
    }
  }
  Vec3 w = rotvec_from_rotation(cur.motion.A);
  Vec3 b = cur.motion.b;
  trace.points.push_back({0.0, cur.motion, cur.max_scaled_residual});

  Eigen::Matrix<double, 6, 1> prev_tan = Eigen::Matrix<double, 6, 1>::Zero();
  prev_tan(0) = direction >= 0 ? 1.0 : -1.0;  // fixed orientation reference
  bool have_prev = false;
  double h = step0;
  double arc = 0.0;

  for (int k = 0; k < steps;) {
    const Eigen::Matrix<double, 6, 6> J = motion_jacobian(pair, w, b);
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(J,
                                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < 6; ++i) {
      if (sv(i) > 1e-8 * sv(0)) ++rank;
    }
    if (rank > 5) {
      trace.stop_reason = "isolated point: empty tangent space";
      return trace;
    }
    Eigen::Matrix<double, 6, 1> tan = svd.matrixV().col(5);
    if (have_prev) {
      if (tan.dot(prev_tan) < 0.0) tan = -tan;
    } else if (direction < 0) {
      tan = -tan;
    }

    bool stepped = false;
    while (h > 1e-10) {
      const Vec3 wp = w + h * tan.head<3>();
      const Vec3 bp = b + h * tan.tail<3>();
      const RefineResult corr = newton_refine(pair, {rotation_from_rotvec(wp), bp}, 1e-12, 30);
      if (corr.converged && corr.max_scaled_residual < tol) {
        const Vec3 wn = rotvec_from_rotation(corr.motion.A);
        arc += std::sqrt((wn - w).squaredNorm() + (corr.motion.b - b).squaredNorm()) *
               (direction >= 0 ? 1.0 : -1.0);
        w = wn;
        b = corr.motion.b;
        trace.points.push_back({arc, corr.motion, corr.max_scaled_residual});
        prev_tan = tan;
        have_prev = true;
        h = std::min(h * 1.4, step0);
        stepped = true;
        ++k;
        break;
      }
      h *= 0.5;
    }
    if (!stepped) {
      trace.stop_reason = "step floor reached (fold or branch end)";
      return trace;
    }
  }
  trace.stop_reason = "completed";
  return trace;
}

/// Nullity of the motion Jacobian at the basic position: the numerically
/// observed local dimension of the solution set at the identity. Reported,
/// never asserted.
inline int local_dimension_at_basic(const TetraPair& pair) {
  const Eigen::Matrix<double, 6, 6> J = motion_jacobian(pair, Vec3::Zero(), Vec3::Zero());
  Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(J);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < 6; ++i) {
    if (sv(i) > 1e-8 * sv(0)) ++rank;
  }
  return 6 - rank;
}

struct ProbeReport {
  int n_seeds = 0;
  int n_converged = 0;
  int n_unclassified = 0;
  std::map<std::string, int> kind_counts;
  std::vector<RigidMotion> unclassified;  // falsification candidates (expected none)
  int local_dim_at_basic = 0;
};

/// Draws random placements, projects each onto the constraint manifold, and
/// classifies every converged solution. A converged solution outside the
/// known families would contradict the completeness of the taxonomy; the
/// expected count is zero. Seeds are evaluated independently (parallel-safe with
/// identical results for any thread count).
inline ProbeReport completeness_probe(const BoxDims& dims, int n_seeds, uint64_t seed = 1) {
  if (n_seeds <= 0) throw std::invalid_argument("completeness_probe: n_seeds must be positive");
  const TetraPair pair = build_pair(dims);
  ProbeReport rep;
  rep.n_seeds = n_seeds;
  rep.local_dim_at_basic = local_dimension_at_basic(pair);
  const double scale = dims.half().mean();

  std::vector<KindTag> tags(n_seeds, KindTag::NotAMotion);
  std::vector<char> converged(n_seeds, 0);
  std::vector<RigidMotion> motions(n_seeds);
  parallel_for(n_seeds, [&](int i) {
    Rng rng(mix_seed(seed, uint64_t(i)));
    RigidMotion m0{random_rotation(rng), Vec3(normal01(rng), normal01(rng), normal01(rng)) * scale};
    const RefineResult res = newton_refine(pair, m0, 1e-12);
    if (!res.converged) return;
    converged[i] = 1;
    motions[i] = res.motion;
    tags[i] = classify(pair, res.motion, 1e-9).tag;
  });
  for (int i = 0; i < n_seeds; ++i) {
    if (!converged[i]) continue;
    ++rep.n_converged;
    ++rep.kind_counts[kind_name(tags[i])];
    if (tags[i] == KindTag::Unclassified || tags[i] == KindTag::NotAMotion) {
      ++rep.n_unclassified;
      if (rep.unclassified.size() < 5) rep.unclassified.push_back(motions[i]);
    }
  }
  return rep;
}

}  // namespace tetrakin
