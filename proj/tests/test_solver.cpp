#include <catch2/catch_amalgamated.hpp>

#include "tetrakin/families.hpp"
#include "tetrakin/manifold.hpp"
#include "tetrakin/random.hpp"
#include "tetrakin/solver.hpp"

using namespace tetrakin;

namespace {

AxisAngle random_axis_angle(Rng& rng, double margin = 1e-3) {
  for (;;) {
    const double phi = uniform(rng, margin, kTwoPi - margin);
    if (std::abs(phi - kPi) < margin || std::abs(phi - kPi / 2) < margin ||
        std::abs(phi - 3 * kPi / 2) < margin) {
      continue;
    }
    return AxisAngle::from_axis_angle(random_unit_vec(rng), phi);
  }
}

}  // namespace

TEST_CASE("direct system reproduces the residuals affinely") {
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const TetraPair pair = build_pair(random_box(rng));
    const Mat3 A = random_rotation(rng);
    const Vec3 b(normal01(rng), normal01(rng), normal01(rng));
    const ConstraintSystem sys = affine_system_direct(pair, A);
    const Vec6 r = residuals(pair, {A, b});
    CHECK((sys.M * b - sys.rhs - r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("identity rotation solves to b = 0 uniquely") {
  const TetraPair pair = build_pair(BoxDims(1, 1, 1));
  const SolutionSet sol = solve_b(affine_system_direct(pair, Mat3::Identity()));
  CHECK(sol.kind == SolutionKind::Unique);
  CHECK(sol.point.norm() < 1e-12);
}

TEST_CASE("half turn about e3 solves to the b3 = 0 plane") {
  const TetraPair pair = build_pair(BoxDims(0.8, 1.7, 1.2));
  const SolutionSet sol = solve_b(affine_system_direct(pair, rotation_about(Vec3::UnitZ(), kPi)));
  REQUIRE(sol.kind == SolutionKind::Affine);
  CHECK(sol.dimension() == 2);
  CHECK(std::abs(sol.point.z()) < 1e-12);
  for (int c = 0; c < 2; ++c) {
    CHECK(std::abs(sol.basis.col(c).z()) < 1e-12);
  }
}

TEST_CASE("first kind at 60 degrees about e3 solves to b = 0 uniquely") {
  const TetraPair pair = build_pair(BoxDims(1, 1, 1));
  const SolutionSet sol =
      solve_b(affine_system_direct(pair, rotation_about(Vec3::UnitZ(), kPi / 3.0)));
  CHECK(sol.kind == SolutionKind::Unique);
  CHECK(sol.point.norm() < 1e-12);
}

TEST_CASE("matrix C row identities") {
  Rng rng(22);
  for (int i = 0; i < 200; ++i) {
    const auto aa = AxisAngle::from_axis_angle(random_unit_vec(rng), uniform(rng, 1e-3, kTwoPi - 1e-3));
    const double D1 = uniform(rng, 0.3, 3.0), D2 = uniform(rng, 0.3, 3.0), D3 = uniform(rng, 0.3, 3.0);
    const Mat64 C = reduced_matrix_C(aa, D1, D2, D3);
    const double u1 = aa.u.x(), u2 = aa.u.y(), u3 = aa.u.z(), s = aa.s;
    const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());

    // fourth column vanishes in the three lower rows
    CHECK(C.col(3).tail<3>().cwiseAbs().maxCoeff() == 0.0);

    // D_i-weighted sum of the lower rows is the zero row
    Eigen::Matrix<double, 1, 4> zsum = D1 * C.row(3) + D2 * C.row(4) + D3 * C.row(5);
    CHECK(zsum.cwiseAbs().maxCoeff() < 1e-12 * scale);

    // u_i-weighted sum of the upper rows has the closed form
    Eigen::Matrix<double, 1, 4> usum = u1 * C.row(0) + u2 * C.row(1) + u3 * C.row(2);
    Eigen::Matrix<double, 1, 4> expect;
    expect << u1 * (1 - s * s), u2 * (1 - s * s), u3 * (1 - s * s),
        2.0 * u1 * u2 * u3 * (D1 + D2 + D3);
    CHECK((usum - expect).cwiseAbs().maxCoeff() < 1e-10 * scale);

    // determinant of the upper-left 3x3 block: s^2 (1 - s^4), zero exactly
    // at s in {0, +-1}
    const double det3 = C.topLeftCorner<3, 3>().determinant();
    CHECK(det3 == Catch::Approx(s * s * (1.0 - std::pow(s, 4))).margin(1e-8 * (1 + std::pow(s, 6))));

    // the 4x4 minor over rows I/1..I/3, II/1 factors through the branch
    // condition: s u1 u2 u3 (s^2+1) (sum D) [D2 (s^2+1-2u3^2) - D3 (s^2+1-2u2^2)]
    Eigen::Matrix4d M4;
    M4.topRows<3>() = C.topRows<3>();
    M4.row(3) = C.row(3);
    const double brace = D2 * (s * s + 1 - 2 * u3 * u3) - D3 * (s * s + 1 - 2 * u2 * u2);
    const double expectD = s * u1 * u2 * u3 * (s * s + 1) * (D1 + D2 + D3) * brace;
    CHECK(M4.determinant() == Catch::Approx(expectD).margin(1e-8 * (1 + std::abs(expectD))));
  }
}

TEST_CASE("matrix C at the cube equals the cube-case array up to the fourth column factor") {
  // D1 = D2 = D3: the coefficient block depends only on (u, s) and the
  // fourth column carries the common factor D2 + D3 = 2.
  Rng rng(23);
  const auto aa = random_axis_angle(rng);
  const Mat64 C1 = reduced_matrix_C(aa, 1.0, 1.0, 1.0);
  const Mat64 C2 = reduced_matrix_C(aa, 2.0, 2.0, 2.0);
  CHECK((C1.leftCols<3>().topRows<3>() - C2.leftCols<3>().topRows<3>()).cwiseAbs().maxCoeff() <
        1e-15);
  CHECK((2.0 * C1.col(3) - C2.col(3)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("cross check: direct and reduced-C systems agree over random draws") {
  Rng rng(24);
  for (int i = 0; i < 300; ++i) {
    const BoxDims dims = random_box(rng);
    const auto aa = random_axis_angle(rng);
    const CrossCheck res = cross_check(build_pair(dims), aa);
    INFO(res.detail << " row " << res.first_bad_row);
    CHECK(res.ok);
  }
}

TEST_CASE("cross check on family rotations (nonempty solution sets)") {
  Rng rng(25);
  for (int i = 0; i < 60; ++i) {
    const BoxDims dims = random_box(rng);
    const TetraPair pair = build_pair(dims);

    // first kind
    {
      const int axis = 1 + int(uniform01(rng) * 2.99);
      const auto aa = AxisAngle::from_axis_angle(Vec3::Unit(axis - 1), uniform(rng, 0.1, kPi - 0.1));
      const CrossCheck res = cross_check(pair, aa);
      INFO("first: " << res.detail);
      CHECK(res.ok);
    }
    // intermediate kind
    {
      Vec3 u = Vec3::Zero();
      u[0] = normal01(rng);
      u[1] = normal01(rng);
      if (u.head<2>().norm() < 1e-3) continue;
      u.normalize();
      const auto aa = AxisAngle::from_axis_angle(u, uniform(rng, 0.2, kPi - 0.2));
      const CrossCheck res = cross_check(pair, aa);
      INFO("intermediate: " << res.detail);
      CHECK(res.ok);
    }
    // third kind
    {
      const double sigma = std::sqrt(f_inverse(std::min(1.0, dims.ratio_max())));
      const double s = uniform(rng, -0.8, 0.8) * std::min(sigma, 3.0);
      const auto params = third_kind_axis(dims, s);
      if (params) {
        const auto aa = AxisAngle::from_axis_cot(params->u, s);
        const CrossCheck res = cross_check(pair, aa);
        INFO("third: " << res.detail);
        CHECK(res.ok);
      }
    }
  }
}

TEST_CASE("cross check on the cube third-kind rotation: same unique b") {
  const BoxDims dims(1, 1, 1);
  const TetraPair pair = build_pair(dims);
  const auto p = third_kind_axis(dims, 0.5);
  REQUIRE(p.has_value());
  const auto aa = AxisAngle::from_axis_cot(p->u, 0.5);
  CHECK(cross_check(pair, aa, 1e-9).ok);
  const SolutionSet sd = solve_b(affine_system_direct(pair, rotation_from_axis_angle(aa)));
  const SolutionSet sp = solve_b(system_from_reduced_C(aa, dims));
  REQUIRE(sd.kind == SolutionKind::Unique);
  REQUIRE(sp.kind == SolutionKind::Unique);
  CHECK((sd.point - sp.point).norm() < 1e-10);
}

TEST_CASE("cross check at the s = 0 half-turn plane") {
  const BoxDims dims(1.3, 0.9, 1.1);
  const auto aa = AxisAngle::from_axis_angle(Vec3::UnitZ(), kPi);
  const TetraPair pair = build_pair(dims);
  const CrossCheck res = cross_check(pair, aa);
  CHECK(res.ok);
  const SolutionSet sol = solve_b(system_from_reduced_C(aa, dims));
  CHECK(sol.dimension() == 2);
  CHECK(std::abs(sol.point.z()) < 1e-12);
}

TEST_CASE("sixth-kind rotation solution sets through both routes") {
  const BoxDims dims(1.0, 1.0, 1.0 / std::sqrt(2.0));
  const Vec3 u = Vec3(1, 1, 0).normalized();
  const auto aa = AxisAngle::from_axis_angle(u, kPi / 2.0);
  const TetraPair pair = build_pair(dims);
  CHECK(cross_check(pair, aa).ok);
  const SolutionSet direct = solve_b(affine_system_direct(pair, rotation_from_axis_angle(aa)));
  REQUIRE(direct.kind == SolutionKind::Affine);
  CHECK(direct.dimension() == 1);
  // the solution line runs along the rotation axis
  CHECK(std::abs(std::abs(direct.basis.col(0).dot(u)) - 1.0) < 1e-10);
}

TEST_CASE("quarter turn with all axis components nonzero has no solution") {
  const BoxDims dims(1, 1, 1);
  const auto aa = AxisAngle::from_axis_angle(Vec3(1, 1, 1).normalized(), kPi / 2.0);
  const SolutionSet sol = solve_b(affine_system_direct(build_pair(dims), rotation_from_axis_angle(aa)));
  CHECK(sol.kind == SolutionKind::Empty);
}

TEST_CASE("non-unique solutions occur only at s in {0, +-1}") {
  Rng rng(26);
  for (int i = 0; i < 2000; ++i) {
    const auto aa = random_axis_angle(rng);
    const SolutionSet sol = solve_b(affine_system_direct(build_pair(random_box(rng)),
                                                         rotation_from_axis_angle(aa)));
    CHECK(sol.kind != SolutionKind::Affine);
  }
}

TEST_CASE("nonempty solutions satisfy the residual oracle including basis directions") {
  Rng rng(27);
  int checked = 0;
  for (int i = 0; i < 400 && checked < 60; ++i) {
    const BoxDims dims = random_box(rng);
    const TetraPair pair = build_pair(dims);
    Mat3 A;
    const double pick = uniform01(rng);
    if (pick < 0.4) {
      A = rotation_about(Vec3::Unit(int(uniform01(rng) * 2.99)), kPi);
    } else {
      Vec3 u = Vec3::Zero();
      u[1] = normal01(rng);
      u[2] = normal01(rng);
      if (u.norm() < 1e-3) continue;
      double phi = uniform(rng, 0.2, kTwoPi - 0.2);
      if (std::abs(phi - kPi) < 0.05) phi += 0.1;  // the solve degrades near 180 degrees
      A = rotation_about(u.normalized(), phi);
    }
    const SolutionSet sol = solve_b(affine_system_direct(pair, A));
    if (sol.kind == SolutionKind::Empty) continue;
    ++checked;
    CHECK(max_scaled_residual(pair, {A, sol.point}) < 1e-10);
    for (int c = 0; c < sol.basis.cols(); ++c) {
      CHECK(max_scaled_residual(pair, {A, sol.point + sol.basis.col(c)}) < 1e-10);
    }
  }
  CHECK(checked >= 60);
}

TEST_CASE("cross check requires a box pair") {
  Mat3 D = Mat3::Identity();
  D(0, 1) = 0.2;
  const TetraPair general = build_pair(ParallelepipedMap(D));
  Rng rng(28);
  CHECK_FALSE(cross_check(general, random_axis_angle(rng)).ok);
}
