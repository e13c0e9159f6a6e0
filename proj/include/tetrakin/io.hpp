#pragma once

// JSON and CSV serialization for the CLI: configuration ingestion, motion
// files (rotation matrix authoritative, axis-angle advisory), and report
// payloads. Doubles pass through nlohmann/json, which serializes them
// losslessly (shortest round-trip representation).

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tetrakin/families.hpp"
#include "tetrakin/generalized.hpp"
#include "tetrakin/manifold.hpp"
#include "tetrakin/mechanism.hpp"
#include "tetrakin/mobility.hpp"

namespace tetrakin {

using Json = nlohmann::json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Json to_json(const Mat3& m) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  }
  return rows;
}

inline Mat3 mat3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3x3 row-major array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw ParseError("expected a 3x3 row-major array");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

/// CLI configuration: exactly one of dims / matrix, optional seed and
/// residual-tolerance override.
struct Config {
  std::optional<BoxDims> dims;
  std::optional<Mat3> matrix;
  uint64_t seed = 1;
  double residual_tol = 1e-9;

  TetraPair make_pair() const {
    if (dims) return build_pair(*dims);
    if (matrix) return build_pair(ParallelepipedMap(*matrix));
    throw ValidationError("a configuration is required (--config or --dims)");
  }
  BoxDims require_dims(const char* what) const {
    if (!dims) throw ValidationError(std::string(what) + " requires a box configuration (dims)");
    return *dims;
  }
};

inline Config config_from_json(const Json& j) {
  Config cfg;
  const bool has_dims = j.contains("dims");
  const bool has_matrix = j.contains("matrix");
  if (has_dims == has_matrix) {
    throw ValidationError("config: exactly one of \"dims\" or \"matrix\" must be present");
  }
  if (has_dims) {
    const Vec3 d = vec3_from_json(j.at("dims"));
    cfg.dims = BoxDims(d.x(), d.y(), d.z());
  } else {
    cfg.matrix = mat3_from_json(j.at("matrix"));
    ParallelepipedMap{*cfg.matrix};  // validates
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("tolerances") && j.at("tolerances").contains("residual")) {
    cfg.residual_tol = j.at("tolerances").at("residual").get<double>();
  }
  return cfg;
}

inline Json to_json(const Config& cfg) {
  Json j;
  if (cfg.dims) {
    j["dims"] = Json::array({cfg.dims->d1, cfg.dims->d2, cfg.dims->d3});
  } else if (cfg.matrix) {
    j["matrix"] = to_json(*cfg.matrix);
  }
  j["seed"] = cfg.seed;
  j["tolerances"] = {{"residual", cfg.residual_tol}};
  return j;
}

/// Motion file schema: rotation stored both as a row-major matrix
/// (authoritative) and axis-angle (advisory), b as a 3-array.
inline Json to_json(const RigidMotion& m) {
  Json j;
  j["rotation"] = to_json(m.A);
  j["b"] = to_json(m.b);
  if (const auto aa = axis_angle_from_rotation(m.A)) {
    j["axis_angle"] = {{"u", to_json(aa->u)}, {"phi", aa->phi}, {"s", aa->s}};
  }
  return j;
}

inline RigidMotion motion_from_json(const Json& j) {
  RigidMotion m;
  m.A = mat3_from_json(j.at("rotation"));
  m.b = vec3_from_json(j.at("b"));
  if (!is_rotation(m.A, 1e-9)) {
    throw ValidationError("motion: rotation block is not orthogonal with determinant +1");
  }
  return m;
}

inline Json to_json(const MotionKind& k) {
  Json j;
  j["kind"] = kind_name(k.tag);
  j["max_scaled_residual"] = k.max_scaled_residual;
  switch (k.tag) {
    case KindTag::First:
      j["axis"] = k.axis_i;
      j["phi"] = k.phi;
      break;
    case KindTag::Intermediate:
      j["axes"] = {k.axis_i, k.axis_j};
      j["phi"] = k.phi;
      j["s"] = k.s;
      j["axis_vector"] = to_json(k.axis);
      break;
    case KindTag::Third:
      j["s"] = k.s;
      j["signs"] = {k.signs[0], k.signs[1], k.signs[2]};
      j["axis_vector"] = to_json(k.axis);
      break;
    case KindTag::Fourth:
    case KindTag::Fifth:
      j["axis"] = k.axis_i;
      j["c1"] = k.c1;
      j["c2"] = k.c2;
      break;
    case KindTag::Sixth:
      j["k"] = k.k;
      j["sense"] = k.s > 0 ? 1 : -1;
      j["t"] = k.t;
      j["axis_vector"] = to_json(k.axis);
      break;
    default:
      break;
  }
  return j;
}

inline Json to_json(const SolutionSet& s) {
  Json j;
  j["kind"] = s.kind == SolutionKind::Empty    ? "empty"
              : s.kind == SolutionKind::Unique ? "unique"
                                               : "affine";
  if (s.kind != SolutionKind::Empty) {
    j["point"] = to_json(s.point);
    Json basis = Json::array();
    for (int c = 0; c < s.basis.cols(); ++c) basis.push_back(to_json(Vec3(s.basis.col(c))));
    j["basis"] = basis;
    j["dimension"] = s.dimension();
  }
  return j;
}

inline Json to_json(const BranchReport& r) {
  Json j;
  j["dims"] = Json::array({r.dims.d1, r.dims.d2, r.dims.d3});
  j["signs"] = {r.signs[0], r.signs[1], r.signs[2]};
  j["connectivity"] = connectivity_name(r.connectivity);
  j["component_count"] = r.component_count;
  Json ivs = Json::array();
  for (const auto& iv : r.intervals) {
    ivs.push_back({{"lo", iv.lo},
                   {"hi", iv.hi},
                   {"lo_tag", endpoint_name(iv.lo_tag)},
                   {"hi_tag", endpoint_name(iv.hi_tag)}});
  }
  j["intervals"] = ivs;
  j["n_samples"] = r.n_samples;
  j["max_scaled_residual"] = r.max_scaled_residual;
  j["b_norm_near_unit_s"] = r.b_norm_near_unit_s;
  return j;
}

inline Json to_json(const MobilityReport& r) {
  Json j;
  j["free_count"] = r.free_count;
  j["rank"] = r.rank;
  j["dof"] = r.dof;
  j["singular_values"] = r.singular_values;
  j["max_violation"] = r.max_violation;
  return j;
}

inline Json to_json(const ProbeReport& r) {
  Json j;
  j["n_seeds"] = r.n_seeds;
  j["n_converged"] = r.n_converged;
  j["n_unclassified"] = r.n_unclassified;
  j["kind_counts"] = r.kind_counts;
  j["local_dim_at_basic"] = r.local_dim_at_basic;
  Json ms = Json::array();
  for (const auto& m : r.unclassified) ms.push_back(to_json(m));
  j["unclassified_motions"] = ms;
  return j;
}

inline Json to_json(const RelaxationReport& r) {
  Json j;
  j["n_samples"] = r.n_samples;
  j["n_opt_starts"] = r.n_opt_starts;
  j["admissible_count"] = r.admissible_count;
  j["counterexample_count"] = r.counterexample_count;
  j["worst_admissible_residual"] = r.worst_admissible_residual;
  Json ms = Json::array();
  for (const auto& m : r.counterexamples) ms.push_back(to_json(m));
  j["counterexamples"] = ms;
  return j;
}

inline Json to_json(const ContinuationTrace& t) {
  Json j;
  j["stop_reason"] = t.stop_reason;
  Json pts = Json::array();
  for (const auto& p : t.points) {
    pts.push_back(
        {{"param", p.param}, {"motion", to_json(p.motion)}, {"max_scaled_residual", p.max_scaled_residual}});
  }
  j["points"] = pts;
  return j;
}

/// Frozen CSV column order for family samples.
inline std::string csv_header() { return "s,u1,u2,u3,phi,b1,b2,b3,max_residual,kind"; }

inline std::string csv_row(const TetraPair& pair, const RigidMotion& m, const MotionKind& kind) {
  std::ostringstream os;
  os.precision(17);
  const auto aa = axis_angle_from_rotation(m.A);
  const double s = aa ? aa->s : std::numeric_limits<double>::infinity();
  const Vec3 u = aa ? aa->u : Vec3::Zero();
  const double phi = aa ? aa->phi : 0.0;
  os << s << ',' << u.x() << ',' << u.y() << ',' << u.z() << ',' << phi << ',' << m.b.x() << ','
     << m.b.y() << ',' << m.b.z() << ',' << max_scaled_residual(pair, m) << ','
     << kind_name(kind.tag);
  return os.str();
}

/// FNV-1a hash of the canonical config dump; stable across runs.
inline std::string config_hash(const Config& cfg) {
  const std::string dump = to_json(cfg).dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("json parse error in ") + path + ": " + e.what());
  }
}

}  // namespace tetrakin
