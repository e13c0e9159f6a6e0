// Command-line front end: configuration ingestion, family sampling, branch
// scanning, classification, mobility reports, probes, and JSON/CSV export.
//
// Exit codes: 0 success, 2 infeasible request, 3 validation failure,
// 4 parse error. Stdout (and --out files) are deterministic for a fixed
// (config, seed, command); wall time goes to stderr.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tetrakin/families.hpp"
#include "tetrakin/generalized.hpp"
#include "tetrakin/io.hpp"
#include "tetrakin/manifold.hpp"
#include "tetrakin/mobility.hpp"
#include "tetrakin/random.hpp"

using namespace tetrakin;

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitValidation = 3;
constexpr int kExitParse = 4;

struct CommonOpts {
  std::string config_path;
  std::string dims_csv;
  std::string out_path;
  uint64_t seed = 0;  // 0 = keep the config value
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config_path, "configuration JSON file");
  cmd->add_option("--dims", opts->dims_csv, "inline box half-dimensions d1,d2,d3");
  cmd->add_option("--out", opts->out_path, "write the report to this file instead of stdout");
  cmd->add_option("--seed", opts->seed, "seed override for stochastic commands");
}

// A missing configuration is tolerated here; commands that need one fail
// with a specific message through Config::require_dims / make_pair.
Config load_config(const CommonOpts& opts) {
  Config cfg;
  if (!opts.config_path.empty() && !opts.dims_csv.empty()) {
    throw ValidationError("provide either --config or --dims, not both");
  }
  if (!opts.config_path.empty()) {
    cfg = config_from_json(load_json_file(opts.config_path));
  } else if (!opts.dims_csv.empty()) {
    std::istringstream is(opts.dims_csv);
    double d[3];
    char comma;
    if (!(is >> d[0] >> comma >> d[1] >> comma >> d[2])) {
      throw ParseError("--dims expects three comma-separated numbers");
    }
    cfg.dims = BoxDims(d[0], d[1], d[2]);
  }
  if (opts.seed != 0) cfg.seed = opts.seed;
  return cfg;
}

void emit(const CommonOpts& opts, const std::string& text) {
  if (opts.out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(opts.out_path);
    if (!out) throw ValidationError("cannot write to " + opts.out_path);
    out << text << "\n";
  }
}

Json run_report(const std::string& command, const Config& cfg, Json results) {
  Json j;
  j["command"] = command;
  j["config"] = to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["results"] = std::move(results);
  return j;
}

struct FamilyOpts {
  std::string kind;
  int axis = 3;
  int axis_j = 0;
  double phi = 0.7;
  double c1 = 1.0, c2 = 0.0;
  double s = 0.5;
  std::string signs = "+++";
  std::string perm = "123";
  int sense = 1;
  double t = 0.0;
  int samples = 1;
  int s_grid = 0;
  bool csv = false;
};

std::array<int, 3> parse_signs(const std::string& text) {
  if (text.size() != 3 || text.find_first_not_of("+-") != std::string::npos) {
    throw ParseError("--signs expects three characters from {+,-}");
  }
  return {text[0] == '+' ? 1 : -1, text[1] == '+' ? 1 : -1, text[2] == '+' ? 1 : -1};
}

std::array<int, 3> parse_perm(const std::string& text) {
  if (text.size() != 3 || text.find_first_not_of("123") != std::string::npos) {
    throw ParseError("--perm expects a permutation of 123");
  }
  std::array<int, 3> p = {text[0] - '0', text[1] - '0', text[2] - '0'};
  if (p[0] + p[1] + p[2] != 6 || p[0] == p[1] || p[1] == p[2]) {
    throw ParseError("--perm expects a permutation of 123");
  }
  return p;
}

/// One family sample per requested parameter point.
std::vector<RigidMotion> family_samples(const BoxDims& dims, const FamilyOpts& fam, Rng& rng) {
  std::vector<RigidMotion> out;
  auto draws = [&](auto gen) {
    for (int i = 0; i < std::max(1, fam.samples); ++i) out.push_back(gen(rng));
  };
  if (fam.kind == "identity") {
    draws([&](Rng&) { return RigidMotion::identity(); });
  } else if (fam.kind == "first") {
    if (fam.samples > 1) {
      draws([&](Rng& r) { return first_kind(fam.axis, uniform(r, 1e-3, kTwoPi - 1e-3)); });
    } else {
      out.push_back(first_kind(fam.axis, fam.phi));
    }
  } else if (fam.kind == "intermediate") {
    const int j = fam.axis_j != 0 ? fam.axis_j : fam.axis % 3 + 1;
    if (fam.samples > 1) {
      draws([&](Rng& r) {
        double phi = uniform(r, 1e-2, kTwoPi - 1e-2);
        if (std::abs(phi - kPi) < 1e-2) phi += 2e-2;
        return intermediate_kind(dims, fam.axis, j, uniform(r, -2, 2), uniform(r, 0.05, 2), phi);
      });
    } else {
      out.push_back(intermediate_kind(dims, fam.axis, j, fam.c1, fam.c2, fam.phi));
    }
  } else if (fam.kind == "third") {
    const auto signs = parse_signs(fam.signs);
    if (fam.s_grid > 1) {
      // midpoint samples spread over the feasible s-intervals, kept clear of
      // the divergent |s| = 1 wall, so every requested row is a motion
      const double gap = 5e-3;
      const double cap = dims.is_cube() ? 3.0 : std::sqrt(f_inverse(dims.ratio_max()));
      std::vector<std::pair<double, double>> ivs;
      if (cap > 1.0 + gap) {
        ivs = {{-cap + gap, -1.0 - gap}, {-1.0 + gap, 1.0 - gap}, {1.0 + gap, cap - gap}};
      } else {
        ivs = {{-cap + gap * cap, cap - gap * cap}};
        if (cap > 1.0 - 2.0 * gap) ivs = {{-1.0 + gap, 1.0 - gap}};
      }
      double total = 0.0;
      for (const auto& [lo, hi] : ivs) total += hi - lo;
      int emitted = 0;
      for (size_t v = 0; v < ivs.size(); ++v) {
        const auto [lo, hi] = ivs[v];
        int quota = v + 1 == ivs.size()
                        ? fam.s_grid - emitted
                        : int(std::lround(fam.s_grid * (hi - lo) / total));
        for (int k = 0; k < quota; ++k) {
          const double s = lo + (hi - lo) * (k + 0.5) / quota;
          out.push_back(third_kind(dims, s, signs));
          ++emitted;
        }
      }
    } else {
      out.push_back(third_kind(dims, fam.s, signs));
    }
  } else if (fam.kind == "fourth") {
    out.push_back(fifth_kind(fam.axis, fam.c1, 0.0));
  } else if (fam.kind == "fifth") {
    if (fam.samples > 1) {
      draws([&](Rng& r) { return fifth_kind(fam.axis, uniform(r, -3, 3), uniform(r, -3, 3)); });
    } else {
      out.push_back(fifth_kind(fam.axis, fam.c1, fam.c2));
    }
  } else if (fam.kind == "sixth") {
    out.push_back(sixth_kind(dims, parse_perm(fam.perm), fam.sense, fam.t));
  } else {
    throw ValidationError("unknown family kind: " + fam.kind);
  }
  return out;
}

Json sample_row(const TetraPair& pair, const RigidMotion& m) {
  Json j;
  j["motion"] = to_json(m);
  j["max_scaled_residual"] = max_scaled_residual(pair, m);
  j["kind"] = to_json(classify(pair, m));
  Json q = Json::array();
  for (int i = 0; i < 4; ++i) q.push_back(to_json(Vec3(m.apply(pair.Qbar[i]))));
  j["Q"] = q;  // trajectory of the moving vertices
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinematics of the two inscribed tetrahedra and related bar structures"};
  app.require_subcommand(1);

  CommonOpts common;
  FamilyOpts fam;

  auto* cmd_families = app.add_subcommand("families", "sample a motion family");
  add_common(cmd_families, &common);
  cmd_families->add_option("--kind", fam.kind, "identity|first|intermediate|third|fourth|fifth|sixth")
      ->required();
  cmd_families->add_option("--axis", fam.axis, "coordinate axis index (1..3)");
  cmd_families->add_option("--axis2", fam.axis_j, "second axis for the intermediate kind");
  cmd_families->add_option("--phi", fam.phi, "rotation angle in radians");
  cmd_families->add_option("--c1", fam.c1, "first translation/axis coefficient");
  cmd_families->add_option("--c2", fam.c2, "second translation/axis coefficient");
  cmd_families->add_option("--s", fam.s, "third-kind parameter s = cot(phi/2)");
  cmd_families->add_option("--signs", fam.signs, "third-kind orthant signs, e.g. ++-");
  cmd_families->add_option("--perm", fam.perm, "sixth-kind permutation, e.g. 123");
  cmd_families->add_option("--sense", fam.sense, "sixth-kind sense (+1 or -1)");
  cmd_families->add_option("--t", fam.t, "sixth-kind line parameter");
  cmd_families->add_option("--samples", fam.samples, "random draws instead of one parameter point");
  cmd_families->add_option("--s-grid", fam.s_grid, "third-kind: sample an s-grid of this size");
  cmd_families->add_flag("--csv", fam.csv, "emit CSV rows instead of JSON");

  auto* cmd_export = app.add_subcommand("export-motion", "write a single family motion file");
  add_common(cmd_export, &common);
  cmd_export->add_option("--kind", fam.kind)->required();
  cmd_export->add_option("--axis", fam.axis);
  cmd_export->add_option("--axis2", fam.axis_j);
  cmd_export->add_option("--phi", fam.phi);
  cmd_export->add_option("--c1", fam.c1);
  cmd_export->add_option("--c2", fam.c2);
  cmd_export->add_option("--s", fam.s);
  cmd_export->add_option("--signs", fam.signs);
  cmd_export->add_option("--perm", fam.perm);
  cmd_export->add_option("--sense", fam.sense);
  cmd_export->add_option("--t", fam.t);

  std::array<int, 3> scan_signs = {1, 1, 1};
  std::string scan_signs_text = "+++";
  int scan_grid = 2048;
  auto* cmd_scan = app.add_subcommand("scan", "scan the third-kind branch structure");
  add_common(cmd_scan, &common);
  cmd_scan->add_option("--signs", scan_signs_text, "orthant signs, e.g. +++");
  cmd_scan->add_option("--grid", scan_grid, "samples per feasible interval");

  std::string motion_path;
  auto* cmd_classify = app.add_subcommand("classify", "classify a motion file");
  add_common(cmd_classify, &common);
  cmd_classify->add_option("--motion", motion_path, "motion JSON file")->required();

  std::vector<double> pyr;
  double pyr_ratio_mult = 0.0;
  auto* cmd_mobility = app.add_subcommand("mobility", "infinitesimal degree-of-freedom report");
  add_common(cmd_mobility, &common);
  cmd_mobility->add_option("--pyramid", pyr, "pyramid pair: n [ratio] (else: tetra pair)")
      ->expected(1, 2);
  cmd_mobility->add_option("--ratio-mult", pyr_ratio_mult, "ratio as a multiple of the reference ratio");
  cmd_mobility->add_flag("--regular", "use the reference ratio itself");

  int probe_seeds = 1000;
  auto* cmd_probe = app.add_subcommand("probe", "completeness probe over random seeds");
  add_common(cmd_probe, &common);
  cmd_probe->add_option("--seeds", probe_seeds, "number of random seeds");

  bool check_generalized = false;
  int check_samples = 10000;
  auto* cmd_check = app.add_subcommand("check", "verify a motion file against the constraints");
  add_common(cmd_check, &common);
  cmd_check->add_option("--motion", motion_path, "motion JSON file");
  cmd_check->add_flag("--generalized", check_generalized,
                      "evaluate the signed-volume relaxation (and run the harness without --motion)");
  cmd_check->add_option("--samples", check_samples, "harness sample count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitParse;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Config cfg = load_config(common);
    Rng rng(cfg.seed);

    if (cmd_families->parsed()) {
      const BoxDims dims = cfg.require_dims("families");
      const TetraPair pair = build_pair(dims);
      const auto samples = family_samples(dims, fam, rng);
      if (fam.csv) {
        std::ostringstream os;
        os << csv_header();
        for (const auto& m : samples) os << "\n" << csv_row(pair, m, classify(pair, m));
        emit(common, os.str());
      } else {
        Json rows = Json::array();
        for (const auto& m : samples) rows.push_back(sample_row(pair, m));
        emit(common, run_report("families", cfg, rows).dump(2));
      }
    } else if (cmd_export->parsed()) {
      const BoxDims dims = cfg.require_dims("export-motion");
      const auto samples = family_samples(dims, fam, rng);
      emit(common, to_json(samples.front()).dump(2));
    } else if (cmd_scan->parsed()) {
      const BoxDims dims = cfg.require_dims("scan");
      scan_signs = parse_signs(scan_signs_text);
      const BranchReport rep = branch_scan(dims, scan_signs, scan_grid);
      emit(common, run_report("scan", cfg, to_json(rep)).dump(2));
    } else if (cmd_classify->parsed()) {
      const TetraPair pair = cfg.make_pair();
      const RigidMotion m = motion_from_json(load_json_file(motion_path));
      const MotionKind kind = classify(pair, m, cfg.residual_tol);
      emit(common, run_report("classify", cfg, to_json(kind)).dump(2));
      if (kind.tag == KindTag::NotAMotion) return kExitValidation;
    } else if (cmd_mobility->parsed()) {
      BarStructure structure;
      Json meta;
      if (!pyr.empty()) {
        const int n = int(pyr[0]);
        double ratio = pyr.size() > 1 ? pyr[1] : 0.0;
        if (ratio <= 0.0) {
          const double mult =
              pyr_ratio_mult > 0.0 ? pyr_ratio_mult : (cmd_mobility->count("--regular") ? 1.0 : 1.3);
          ratio = mult * regular_ratio(n);
        }
        const PyramidPair pp = build_pyramid_pair(n, ratio);
        structure = pp.structure;
        meta["pyramid"] = {{"n", n}, {"ratio", ratio}, {"reference_ratio", regular_ratio(n)}};
      } else {
        structure = tetra_pair_as_bar_structure(cfg.require_dims("mobility"));
        meta["tetra_pair"] = true;
      }
      const auto rep = infinitesimal_dof(structure, structure.base_configuration());
      if (!rep) throw ValidationError("configuration violates the constraints");
      Json payload = to_json(*rep);
      payload["structure"] = meta;
      emit(common, run_report("mobility", cfg, payload).dump(2));
    } else if (cmd_probe->parsed()) {
      const BoxDims dims = cfg.require_dims("probe");
      const ProbeReport rep = completeness_probe(dims, probe_seeds, cfg.seed);
      emit(common, run_report("probe", cfg, to_json(rep)).dump(2));
    } else if (cmd_check->parsed()) {
      const TetraPair pair = cfg.make_pair();
      Json payload;
      if (!motion_path.empty()) {
        const RigidMotion m = motion_from_json(load_json_file(motion_path));
        const Vec6 r = residuals(pair, m);
        payload["residuals"] = std::vector<double>(r.data(), r.data() + 6);
        payload["max_scaled_residual"] = max_scaled_residual(pair, m);
        payload["admitted"] = max_scaled_residual(pair, m) < cfg.residual_tol;
        if (check_generalized) {
          payload["generalized_admissible"] =
              generalized_admissible(pair, m, reference_signs(pair));
        }
      } else if (check_generalized) {
        payload["harness"] = to_json(relaxation_harness(pair, check_samples, cfg.seed));
      } else {
        throw ValidationError("check: provide --motion and/or --generalized");
      }
      emit(common, run_report("check", cfg, payload).dump(2));
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "wall time: "
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            << " s\n";
  return 0;
}
