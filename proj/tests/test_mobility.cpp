#include <catch2/catch_amalgamated.hpp>

#include "tetrakin/mobility.hpp"
#include "tetrakin/random.hpp"

using namespace tetrakin;

namespace {

// central finite differences of the scaled constraint values
Eigen::MatrixXd fd_jacobian(const BarStructure& s, const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::MatrixXd J(s.n_constraints(), s.n_free());
  int col = 0;
  for (int c = 0; c < int(x.size()); ++c) {
    if (s.fixed[c]) continue;
    Eigen::VectorXd xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    J.col(col++) = (constraint_values(s, xp) - constraint_values(s, xm)) / (2.0 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("pyramid pair counts and basic-position residuals") {
  const PyramidPair pp = build_pyramid_pair(5, 1.3 * regular_ratio(5));
  CHECK(pp.structure.n_vertices() == 12);           // 2 (n + 1)
  CHECK(int(pp.structure.bars.size()) == 20);       // 4 n
  CHECK(int(pp.structure.coplanar_pairs.size()) == 10);  // 2 n
  CHECK(constraint_values(pp.structure, pp.structure.base_configuration())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  for (int n = 3; n <= 7; ++n) {
    const PyramidPair p = build_pyramid_pair(n, 1.1 * regular_ratio(n));
    CHECK(constraint_values(p.structure, p.structure.base_configuration())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("n = 3 at the regular ratio reproduces the cube-pair geometry") {
  CHECK(regular_ratio(3) == Catch::Approx(1.0).epsilon(1e-15));
  const PyramidPair pp = build_pyramid_pair(3, 1.0);
  // all bars equal: two regular tetrahedra
  for (const auto& bar : pp.structure.bars) {
    CHECK(bar.rest == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("degenerate ratios are rejected") {
  CHECK_THROWS_AS(build_pyramid_pair(4, min_pyramid_ratio(4)), std::invalid_argument);
  CHECK_THROWS_AS(build_pyramid_pair(7, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_pyramid_pair(2, 2.0), std::invalid_argument);
}

TEST_CASE("single free bar gradient") {
  BarStructure s;
  s.vertices = {Vec3(0, 0, 0), Vec3(1.0, 0.5, -0.25)};
  s.fixed.assign(6, 0);
  s.add_bar(0, 1);
  s.pin_vertex(0);
  const Eigen::VectorXd x = s.base_configuration();
  const Eigen::MatrixXd J = constraint_jacobian(s, x);
  REQUIRE(J.rows() == 1);
  REQUIRE(J.cols() == 3);
  // gradient of |p - q|^2 at the free end is 2 (p - q); rows carry 1/(2 rest)
  const Vec3 expect = (s.vertices[1] - s.vertices[0]) / s.bars[0].rest;
  CHECK((J.row(0).transpose() - expect).norm() < 1e-12);
}

TEST_CASE("jacobian matches finite differences") {
  const PyramidPair pp = build_pyramid_pair(4, 1.2 * regular_ratio(4));
  Eigen::VectorXd x = pp.structure.base_configuration();
  CHECK((constraint_jacobian(pp.structure, x) - fd_jacobian(pp.structure, x))
            .cwiseAbs()
            .maxCoeff() < 1e-6);
  // also away from the basic position
  Rng rng(51);
  for (int i = 0; i < int(x.size()); ++i) x[i] += 0.05 * normal01(rng);
  CHECK((constraint_jacobian(pp.structure, x) - fd_jacobian(pp.structure, x))
            .cwiseAbs()
            .maxCoeff() < 1e-6);

  const BarStructure tp = tetra_pair_as_bar_structure(BoxDims(1.0, 1.4, 0.8));
  const Eigen::VectorXd xt = tp.base_configuration();
  CHECK((constraint_jacobian(tp, xt) - fd_jacobian(tp, xt)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("bar and coplanarity rows annihilate rigid velocity fields when unpinned") {
  PyramidPair pp = build_pyramid_pair(5, 1.4 * regular_ratio(5));
  BarStructure s = pp.structure;
  s.fixed.assign(3 * s.n_vertices(), 0);  // release everything
  const Eigen::VectorXd x = s.base_configuration();
  const Eigen::MatrixXd J = constraint_jacobian(s, x);
  Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 omega(normal01(rng), normal01(rng), normal01(rng));
    const Vec3 t(normal01(rng), normal01(rng), normal01(rng));
    Eigen::VectorXd v(3 * s.n_vertices());
    for (int i = 0; i < s.n_vertices(); ++i) {
      v.segment<3>(3 * i) = omega.cross(s.vertices[i]) + t;
    }
    CHECK((J * v).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("triangle with a pinned edge flaps with one degree of freedom") {
  BarStructure s;
  s.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.4, 0.8, 0)};
  s.fixed.assign(9, 0);
  s.add_bar(0, 1);
  s.add_bar(1, 2);
  s.add_bar(0, 2);
  s.pin_vertex(0);
  s.pin_vertex(1);
  const auto rep = infinitesimal_dof(s, s.base_configuration());
  REQUIRE(rep.has_value());
  CHECK(rep->free_count == 3);
  CHECK(rep->dof == 1);
}

TEST_CASE("pyramid pairs have one infinitesimal degree of freedom") {
  for (int n = 3; n <= 7; ++n) {
    for (double mult : {0.8, 1.0, 1.2, 1.5, 2.0}) {
      if (n == 3 && mult == 1.0) continue;  // the exceptional regular pair
      const PyramidPair pp = build_pyramid_pair(n, mult * regular_ratio(n));
      const auto rep = infinitesimal_dof(pp.structure, pp.structure.base_configuration());
      REQUIRE(rep.has_value());
      INFO("n=" << n << " mult=" << mult);
      CHECK(rep->dof == 1);
    }
  }
}

TEST_CASE("the regular n = 3 pair is the exceptional case") {
  const PyramidPair pp = build_pyramid_pair(3, regular_ratio(3));
  const auto rep = infinitesimal_dof(pp.structure, pp.structure.base_configuration());
  REQUIRE(rep.has_value());
  CHECK(rep->dof > 1);
  CHECK(int(rep->singular_values.size()) == rep->free_count);
}

TEST_CASE("dof is invariant under relabeling and uniform scaling") {
  const PyramidPair pp = build_pyramid_pair(4, 1.3 * regular_ratio(4));
  const auto base = infinitesimal_dof(pp.structure, pp.structure.base_configuration());
  REQUIRE(base.has_value());

  // uniform scaling
  BarStructure scaled = pp.structure;
  for (auto& v : scaled.vertices) v *= 3.7;
  for (auto& bar : scaled.bars) bar.rest *= 3.7;
  for (auto& cp : scaled.coplanar_pairs) cp.scale *= 3.7 * 3.7;
  const auto srep = infinitesimal_dof(scaled, scaled.base_configuration());
  REQUIRE(srep.has_value());
  CHECK(srep->dof == base->dof);

  // relabeling: swap two free base vertices of the moving pyramid
  BarStructure rel = pp.structure;
  const int a = 5, b = 7;  // inside the moving pyramid range for n = 4
  std::swap(rel.vertices[a], rel.vertices[b]);
  auto remap = [&](int i) { return i == a ? b : (i == b ? a : i); };
  for (auto& bar : rel.bars) {
    bar.a = remap(bar.a);
    bar.b = remap(bar.b);
  }
  for (auto& cp : rel.coplanar_pairs) {
    cp.a = remap(cp.a);
    cp.b = remap(cp.b);
    cp.c = remap(cp.c);
    cp.d = remap(cp.d);
  }
  const auto rrep = infinitesimal_dof(rel, rel.base_configuration());
  REQUIRE(rrep.has_value());
  CHECK(rrep->dof == base->dof);
}

TEST_CASE("violating configurations are rejected with the max violation") {
  const PyramidPair pp = build_pyramid_pair(4, 1.3 * regular_ratio(4));
  Eigen::VectorXd x = pp.structure.base_configuration();
  x[3 * pp.moving_begin()] += 0.05;
  MobilityReport rejected;
  CHECK_FALSE(infinitesimal_dof(pp.structure, x, 1e-8, &rejected).has_value());
  CHECK(rejected.max_violation > 1e-3);
}

TEST_CASE("tetra pair as a bar structure") {
  const BarStructure s = tetra_pair_as_bar_structure(BoxDims(1, 1, 1));
  CHECK(s.n_vertices() == 8);
  CHECK(int(s.bars.size()) == 12);
  CHECK(int(s.coplanar_pairs.size()) == 6);
  CHECK(s.n_free() == 12);
  // bars are the face diagonals: length 2 sqrt(d_i^2 + d_j^2) = 2 sqrt 2
  for (const auto& bar : s.bars) {
    CHECK(bar.rest == Catch::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  }
  CHECK(constraint_values(s, s.base_configuration()).cwiseAbs().maxCoeff() < 1e-12);
  const auto rep = infinitesimal_dof(s, s.base_configuration());
  REQUIRE(rep.has_value());
  CHECK(rep->rank == rep->free_count - rep->dof);
}

TEST_CASE("axial screw family of the pyramid pair") {
  const PyramidPair pp = build_pyramid_pair(4, 1.3 * regular_ratio(4));
  // angle 0 is the basic position
  const auto x0 = pyramid_axial_motion(pp, 0.0);
  REQUIRE(x0.has_value());
  CHECK((*x0 - pp.structure.base_configuration()).cwiseAbs().maxCoeff() < 1e-10);
  // small sweep: all constraints re-zeroed
  for (double angle : {-0.3, -0.1, 0.05, 0.2, 0.35}) {
    const auto x = pyramid_axial_motion(pp, angle);
    REQUIRE(x.has_value());
    CHECK(constraint_values(pp.structure, *x).cwiseAbs().maxCoeff() < 1e-10);
    const auto rep = infinitesimal_dof(pp.structure, *x);
    CHECK(rep.has_value());  // family configurations satisfy the dof precondition
  }
}

TEST_CASE("family tangent lies in the jacobian nullspace") {
  const PyramidPair pp = build_pyramid_pair(5, 1.2 * regular_ratio(5));
  const double h = 5e-5;
  const auto xp = pyramid_axial_motion(pp, h);
  const auto xm = pyramid_axial_motion(pp, -h);
  REQUIRE(xp.has_value());
  REQUIRE(xm.has_value());
  Eigen::VectorXd tangent_full = (*xp - *xm) / (2.0 * h);
  Eigen::VectorXd tangent(pp.structure.n_free());
  int col = 0;
  for (int c = 0; c < int(tangent_full.size()); ++c) {
    if (!pp.structure.fixed[c]) tangent[col++] = tangent_full[c];
  }
  tangent.normalize();
  const Eigen::MatrixXd J =
      constraint_jacobian(pp.structure, pp.structure.base_configuration());
  CHECK((J * tangent).cwiseAbs().maxCoeff() < 1e-4);  // fd tangent accuracy O(h^2)
  // compare against the svd nullspace direction
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  const Eigen::VectorXd null_dir = svd.matrixV().col(pp.structure.n_free() - 1);
  CHECK(std::abs(std::abs(null_dir.dot(tangent)) - 1.0) < 1e-6);
}
