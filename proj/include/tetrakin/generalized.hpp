#pragma once

// The signed-volume relaxation of the coplanarity constraints: each
// constraint determinant may be zero or carry the sign opposite to its
// centered reference configuration. The relaxed admissible set provably
// coincides with the strict one; the harness searches for violations of
// that equivalence and is expected to find none.

#include <array>
#include <vector>

#include "tetrakin/geometry.hpp"
#include "tetrakin/manifold.hpp"
#include "tetrakin/mechanism.hpp"
#include "tetrakin/parallel.hpp"
#include "tetrakin/random.hpp"

namespace tetrakin {

/// Per-pairing reference sign: the sign of the signed volume of
/// P_i P_j R_k R_l, where R_k R_l is the basic segment Qbar_k Qbar_l
/// translated so its midpoint sits at the centre.
struct SignConvention {
  std::array<int, 6> sigma = {0, 0, 0, 0, 0, 0};
};

inline SignConvention reference_signs(const TetraPair& pair) {
  SignConvention conv;
  int row = 0;
  for (const auto& e : edge_pairing()) {
    const Vec3 mid = 0.5 * (pair.Qbar[e.qk] + pair.Qbar[e.ql]);
    const double vol = coplanarity_residual(pair.P[e.pi], pair.P[e.pj], pair.Qbar[e.qk] - mid,
                                            pair.Qbar[e.ql] - mid);
    if (vol == 0.0) {
      throw std::logic_error("reference_signs: degenerate centered reference volume");
    }
    conv.sigma[row++] = vol > 0.0 ? 1 : -1;
  }
  return conv;
}

/// True iff every residual is zero (within the tolerance band) or has the
/// sign opposite to its reference.
inline bool generalized_admissible(const TetraPair& pair, const RigidMotion& m,
                                   const SignConvention& conv, double tol_band = 1e-10) {
  const Vec6 r = residuals(pair, m);
  const Vec6 scales = residual_scales(pair);
  for (int k = 0; k < 6; ++k) {
    if (conv.sigma[k] * r[k] > tol_band * scales[k]) return false;
  }
  return true;
}

struct RelaxationReport {
  int n_samples = 0;
  int n_opt_starts = 0;
  int admissible_count = 0;       // relaxed-admissible placements encountered
  int counterexample_count = 0;   // admissible with some residual genuinely nonzero
  double worst_admissible_residual = 0.0;  // max scaled |r| over admissible placements
  std::vector<RigidMotion> counterexamples;
};

namespace detail {

/// Penalty pushed to zero exactly on the relaxed-admissible cone.
inline double cone_penalty(const TetraPair& pair, const SignConvention& conv, const Vec3& w,
                           const Vec3& b) {
  const Vec6 r = residuals(pair, {rotation_from_rotvec(w), b});
  const Vec6 scales = residual_scales(pair);
  double p = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double v = std::max(0.0, conv.sigma[k] * r[k] / scales[k]);
    p += v * v;
  }
  return p;
}

/// Compact Nelder-Mead on R^n, enough for the 6-dimensional cone search.
template <typename F>
Eigen::VectorXd nelder_mead(F f, Eigen::VectorXd x0, double spread, int max_iter) {
  const int n = int(x0.size());
  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (int i = 1; i <= n; ++i) xs[i][i - 1] += spread;
  for (int i = 0; i <= n; ++i) fs[i] = f(xs[i]);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> ord(n + 1);
    for (int i = 0; i <= n; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2(n + 1);
    std::vector<double> fs2(n + 1);
    for (int i = 0; i <= n; ++i) {
      xs2[i] = xs[ord[i]];
      fs2[i] = fs[ord[i]];
    }
    xs = xs2;
    fs = fs2;
    if (fs[0] < 1e-24 || (fs[n] - fs[0]) < 1e-18 * (1.0 + std::abs(fs[0]))) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[i];
    centroid /= n;
    const Eigen::VectorXd xr = centroid + (centroid - xs[n]);
    const double fr = f(xr);
    if (fr < fs[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[n]);
      const double fe = f(xe);
      if (fe < fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (xs[n] - centroid);
      const double fc = f(xc);
      if (fc < fs[n]) {
        xs[n] = xc;
        fs[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (fs[i] < fs[best]) best = i;
  }
  return xs[best];
}

}  // namespace detail

/// Counterexample search for the relaxed/strict equivalence: random
/// placements plus Nelder-Mead runs that push the residuals into the
/// allowed sign cone. A counterexample is a relaxed-admissible placement
/// with some scaled residual above 1e-8 in magnitude; the expected count is
/// zero for every map with positive determinant.
inline RelaxationReport relaxation_harness(const TetraPair& pair, int n_samples, uint64_t seed = 1,
                                       int n_opt_starts = 50) {
  if (n_samples <= 0) throw std::invalid_argument("relaxation_harness: n_samples must be positive");
  const SignConvention conv = reference_signs(pair);
  const Vec6 scales = residual_scales(pair);
  double box_scale = 0.0;
  for (const Vec3& p : pair.P) box_scale = std::max(box_scale, p.cwiseAbs().maxCoeff());

  RelaxationReport rep;
  rep.n_samples = n_samples;
  rep.n_opt_starts = n_opt_starts;

  const int total = n_samples + n_opt_starts;
  std::vector<RigidMotion> candidates(total);
  parallel_for(total, [&](int i) {
    if (i < n_samples) {
      Rng rng(mix_seed(seed, uint64_t(i)));
      candidates[i] = {random_rotation(rng),
                       Vec3(normal01(rng), normal01(rng), normal01(rng)) * box_scale};
    } else {
      Rng rng(mix_seed(seed ^ 0xc0ffee, uint64_t(i - n_samples)));
      Eigen::VectorXd x0(6);
      x0.head<3>() = rotvec_from_rotation(random_rotation(rng));
      x0.tail<3>() = Vec3(normal01(rng), normal01(rng), normal01(rng)) * box_scale;
      const Eigen::VectorXd x = detail::nelder_mead(
          [&](const Eigen::VectorXd& v) {
            return detail::cone_penalty(pair, conv, v.head<3>(), v.tail<3>());
          },
          x0, 0.4, 400);
      candidates[i] = {rotation_from_rotvec(x.head<3>()), x.tail<3>()};
    }
  });
  for (const RigidMotion& m : candidates) {
    if (!generalized_admissible(pair, m, conv, 1e-10)) continue;
    ++rep.admissible_count;
    const double worst = residuals(pair, m).cwiseQuotient(scales).cwiseAbs().maxCoeff();
    rep.worst_admissible_residual = std::max(rep.worst_admissible_residual, worst);
    if (worst > 1e-8) {
      ++rep.counterexample_count;
      if (rep.counterexamples.size() < 5) rep.counterexamples.push_back(m);
    }
  }
  return rep;
}

}  // namespace tetrakin
