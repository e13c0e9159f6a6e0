#include <catch2/catch_amalgamated.hpp>

#include "tetrakin/io.hpp"
#include "tetrakin/random.hpp"

using namespace tetrakin;

TEST_CASE("config parsing accepts exactly one of dims and matrix") {
  const Config c1 = config_from_json(Json::parse(R"({"dims": [1, 2, 3]})"));
  REQUIRE(c1.dims.has_value());
  CHECK(c1.dims->d2 == 2.0);

  const Config c2 = config_from_json(
      Json::parse(R"({"matrix": [[1, 0.1, 0], [0, 1, 0], [0, 0, 1]], "seed": 42})"));
  REQUIRE(c2.matrix.has_value());
  CHECK(c2.seed == 42);

  CHECK_THROWS_AS(config_from_json(Json::parse(R"({})")), ValidationError);
  CHECK_THROWS_AS(
      config_from_json(Json::parse(R"({"dims": [1,2,3], "matrix": [[1,0,0],[0,1,0],[0,0,1]]})")),
      ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"dims": [1, -2, 3]})")), std::invalid_argument);
  // singular / reflecting maps rejected
  CHECK_THROWS_AS(
      config_from_json(Json::parse(R"({"matrix": [[1,0,0],[0,1,0],[0,0,-1]]})")),
      std::invalid_argument);
}

TEST_CASE("motion files round-trip losslessly") {
  Rng rng(71);
  for (int i = 0; i < 50; ++i) {
    RigidMotion m{random_rotation(rng),
                  Vec3(normal01(rng), normal01(rng), normal01(rng)) * 2.0};
    const Json j = to_json(m);
    const RigidMotion back = motion_from_json(Json::parse(j.dump()));
    CHECK((back.A - m.A).cwiseAbs().maxCoeff() == 0.0);  // lossless double round-trip
    CHECK((back.b - m.b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("exported motions re-verify under the residual oracle at load time") {
  const BoxDims dims(1.0, 1.0, 1.2);
  const TetraPair pair = build_pair(dims);
  const RigidMotion m = third_kind(dims, 0.3);
  const RigidMotion back = motion_from_json(Json::parse(to_json(m).dump()));
  CHECK(max_scaled_residual(pair, back) < 1e-10);
}

TEST_CASE("motions with invalid rotation blocks are rejected") {
  Json j = to_json(RigidMotion::identity());
  j["rotation"][0][0] = 2.0;
  CHECK_THROWS_AS(motion_from_json(j), ValidationError);
  j = Json::parse(R"({"rotation": [[1,0],[0,1]], "b": [0,0,0]})");
  CHECK_THROWS_AS(motion_from_json(j), ParseError);
}

TEST_CASE("axis-angle block is advisory and present for non-identity motions") {
  const Json j = to_json(first_kind(3, 0.7));
  REQUIRE(j.contains("axis_angle"));
  CHECK(j["axis_angle"]["phi"].get<double>() == Catch::Approx(0.7));
  CHECK_FALSE(to_json(RigidMotion::identity()).contains("axis_angle"));
}

TEST_CASE("config hash is deterministic and configuration-sensitive") {
  const Config a = config_from_json(Json::parse(R"({"dims": [1, 2, 3]})"));
  const Config b = config_from_json(Json::parse(R"({"dims": [1, 2, 3]})"));
  const Config c = config_from_json(Json::parse(R"({"dims": [1, 2, 3.0001]})"));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("csv rows follow the frozen column order") {
  CHECK(csv_header() == "s,u1,u2,u3,phi,b1,b2,b3,max_residual,kind");
  const BoxDims dims(1, 1, 1);
  const TetraPair pair = build_pair(dims);
  const RigidMotion m = third_kind(dims, 0.5);
  const std::string row = csv_row(pair, m, classify(pair, m));
  CHECK(std::count(row.begin(), row.end(), ',') == 9);
  CHECK(row.find("third") != std::string::npos);
}

TEST_CASE("report payloads serialize") {
  const BoxDims dims(1.0, 1.0, 1.7);
  const Json scan = to_json(branch_scan(dims, {1, 1, 1}, 32));
  CHECK(scan["component_count"].get<int>() == 3);
  CHECK(scan["intervals"].size() == 3);

  const Json probe = to_json(completeness_probe(dims, 30, 3));
  CHECK(probe["n_unclassified"].get<int>() == 0);

  const auto rep = infinitesimal_dof(tetra_pair_as_bar_structure(dims),
                                     tetra_pair_as_bar_structure(dims).base_configuration());
  REQUIRE(rep.has_value());
  const Json mob = to_json(*rep);
  CHECK(mob["free_count"].get<int>() == 12);
  CHECK(mob["singular_values"].size() == 12);
}
