#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "setdist/approx.hpp"
#include "setdist/error.hpp"
#include "setdist/io.hpp"
#include "setdist/pointproc.hpp"
#include "setdist/rng.hpp"
#include "setdist/study.hpp"

namespace setdist::cli {
namespace {

namespace fs = std::filesystem;

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw InputError("cannot create output directory '" + dir.string() + "'" +
                     (ec ? ": " + ec.message() : std::string()));
  }
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

StudyConfig load_study(const std::string& path, const std::string& preset) {
  if (path.empty()) return study_preset(preset);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  return study_from_json(j);
}

struct SimulateArgs {
  std::string process = "boolean";
  std::string config;
  std::size_t count = 1;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  const StudyConfig study = load_study(a.config, "desk");
  const ProcessSpec& spec = study.process(a.process);
  if (a.count < 1) throw InputError("--count must be at least 1");
  const fs::path dir(a.out);
  ensure_directory(dir);

  nlohmann::json manifest;
  manifest["process"] = process_to_json(spec);
  manifest["window"] = {{"width", study.window.width},
                        {"height", study.window.height},
                        {"pixels_per_unit", study.window.pixels_per_unit}};
  manifest["seed"] = a.seed;
  manifest["rng"] = {{"algorithm", Rng::kAlgorithm}, {"version", Rng::kVersion}};
  manifest["realisations"] = nlohmann::json::array();
  for (std::size_t i = 0; i < a.count; ++i) {
    const std::uint64_t seed = derive_seed(a.seed, i);
    const DiscUnion u = simulate(spec, study.window, seed);
    const std::string pgm = io::pgm_bytes(rasterize(u));
    const std::string csv = io::discs_csv(u);
    char stem[32];
    std::snprintf(stem, sizeof stem, "realisation_%03zu", i);
    const std::string pgm_name = std::string(stem) + ".pgm";
    const std::string csv_name = std::string(stem) + ".csv";
    io::write_file(dir / pgm_name, pgm);
    io::write_file(dir / csv_name, csv);
    manifest["realisations"].push_back({{"index", i},
                                        {"seed", seed},
                                        {"discs", u.discs.size()},
                                        {"pgm", pgm_name},
                                        {"pgm_fnv1a64", io::hex64(io::fnv1a64(pgm))},
                                        {"csv", csv_name},
                                        {"csv_fnv1a64", io::hex64(io::fnv1a64(csv))}});
  }
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << a.count << " realisation(s) to " << dir.string() << '\n';
  return kExitOk;
}

struct PipelineArgs {
  double radius = 7.0;
  std::size_t m = 100;
  std::size_t n = 10;
  int disc_poly_k = 64;
  std::string origin = "generator";
  std::uint64_t seed = 1;
};

CoverConfig cover_from(const PipelineArgs& a) {
  CoverConfig c{a.radius, a.disc_poly_k, parse_origin_policy(a.origin)};
  c.validate();
  return c;
}

struct ApproximateArgs {
  std::string mask;
  std::string out;
  PipelineArgs pipe;
};

int cmd_approximate(const ApproximateArgs& a) {
  const RasterMask mask = io::read_pgm(a.mask);
  const CoverConfig cover = cover_from(a.pipe);
  Approximation approx = divide(mask, cover, a.pipe.seed);
  if (a.pipe.m > 0) draw_sample(approx, a.pipe.m, AngleGrid(a.pipe.n), cover.origin, a.pipe.seed);
  print_warnings(approx.warnings);

  const fs::path dir(a.out);
  ensure_directory(dir);
  io::write_file(dir / "tessellation.json", io::tessellation_to_json(approx.tessellation).dump() + "\n");
  std::vector<ConvexBody> pieces;
  for (const auto& p : approx.pieces) {
    if (p) pieces.push_back(*p);
  }
  std::ostringstream bodies;
  io::write_bodies_csv(bodies, pieces);
  io::write_file(dir / "pieces.csv", bodies.str());
  if (a.pipe.m > 0) {
    std::ostringstream support;
    io::write_support_csv(support, approx.samples);
    io::write_file(dir / "support.csv", support.str());
  }
  nlohmann::json summary{{"cells", approx.centers.size()},
                         {"pieces", pieces.size()},
                         {"chosen", approx.chosen},
                         {"R", cover.radius},
                         {"origin_policy", to_string(cover.origin)},
                         {"seed", a.pipe.seed}};
  std::cout << summary.dump(2) << '\n';
  return kExitOk;
}

struct TestArgs {
  std::string mask1;
  std::string mask2;
  PipelineArgs pipe;
  bool m_given = false;
  std::string kernel = "expweighted";
  double r = 1.0;
  double v_scale = 0.0;
  double w = 1.0;
  int depth = 3;
  std::string method = "permutation";
  std::size_t perms = kDefaultPermutations;
  bool compact = false;
};

int cmd_test(const TestArgs& a) {
  nlohmann::json kj{{"kind", a.kernel}, {"r", a.r}, {"w", a.w}, {"D", a.depth}};
  if (a.v_scale > 0.0) kj["v_scale"] = a.v_scale;
  TwoRealisationConfig cfg;
  cfg.kernel = io::kernel_from_json(kj);
  cfg.method = parse_test_method(a.method);
  cfg.cover = cover_from(a.pipe);
  cfg.n = a.pipe.n;
  cfg.m = a.pipe.m;
  if (!a.m_given && cfg.method != TestMethod::Permutation) cfg.m = 300;
  cfg.permutations = a.perms;
  const RasterMask mask1 = io::read_pgm(a.mask1);
  const RasterMask mask2 = io::read_pgm(a.mask2);
  TestResult r = two_realisation_test(mask1, mask2, cfg, a.pipe.seed);
  r.metadata["kernel_label"] = kernel_label(r.kernel);
  print_warnings(r.warnings);
  const nlohmann::json j = io::result_to_json(r);
  std::cout << (a.compact ? j.dump() : j.dump(2)) << '\n';
  return kExitOk;
}

struct StudyArgs {
  std::string config;
  std::string preset = "desk";
  std::string out;
  std::size_t threads = 0;
};

int cmd_study(const StudyArgs& a) {
  const StudyConfig cfg = load_study(a.config, a.preset);
  const fs::path dir(a.out);
  ensure_directory(dir);
  const StudyOutput out = run_study(cfg, a.threads);
  io::write_file(dir / "pvalues.csv", out.pvalues_csv);
  io::write_file(dir / "summary.csv", out.summary_csv);
  io::write_file(dir / "histogram.csv", out.histogram_csv);
  io::write_file(dir / "config.json", study_to_json(cfg).dump(2) + "\n");
  std::size_t failed = 0;
  for (const auto& row : out.rows) failed += row.p_value ? 0 : 1;
  if (failed > 0) std::cerr << "warning: " << failed << " study rows did not produce a p-value\n";
  std::cout << out.summary_csv;
  return kExitOk;
}

int cmd_config_init(const std::string& preset, const std::string& out) {
  const std::string text = study_to_json(study_preset(preset)).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_file(out, text);
  }
  return kExitOk;
}

void add_pipeline_options(CLI::App* cmd, PipelineArgs& p) {
  cmd->add_option("--radius", p.radius, "covering-disc radius in pixels")->capture_default_str();
  cmd->add_option("--n", p.n, "number of support directions")->capture_default_str();
  cmd->add_option("--k", p.disc_poly_k, "vertices of the polygonal disc")->capture_default_str();
  cmd->add_option("--origin", p.origin, "generator | centroid")->capture_default_str();
  cmd->add_option("--seed", p.seed, "master seed")->capture_default_str();
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Two-sample tests for random convex sets and two-realisation comparison"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate disc-process realisations");
  simulate_cmd->add_option("--process", sim.process, "process name")->capture_default_str();
  simulate_cmd->add_option("--config", sim.config, "study config holding the process definitions");
  simulate_cmd->add_option("--count", sim.count, "number of realisations")->capture_default_str();
  simulate_cmd->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  simulate_cmd->add_option("--out", sim.out, "output directory")->required();

  ApproximateArgs approx;
  approx.pipe.m = 0;
  auto* approx_cmd = app.add_subcommand("approximate", "cover, tessellate and sample one mask");
  approx_cmd->add_option("mask", approx.mask, "PGM mask")->required();
  approx_cmd->add_option("--out", approx.out, "output directory")->required();
  approx_cmd->add_option("--m", approx.pipe.m, "cells to sample (0 = none)")->capture_default_str();
  add_pipeline_options(approx_cmd, approx.pipe);

  TestArgs test;
  auto* test_cmd = app.add_subcommand("test", "two-realisation test on two PGM masks");
  test_cmd->add_option("mask1", test.mask1, "first PGM mask")->required();
  test_cmd->add_option("mask2", test.mask2, "second PGM mask")->required();
  auto* m_opt = test_cmd->add_option("--m", test.pipe.m, "cells sampled per realisation");
  add_pipeline_options(test_cmd, test.pipe);
  test_cmd->add_option("--kernel", test.kernel,
                       "euclidean | gaussian | cauchy | expweighted | radialpower")
      ->capture_default_str();
  test_cmd->add_option("--r", test.r, "exponent for euclidean / radialpower")->capture_default_str();
  test_cmd->add_option("--v-scale", test.v_scale, "V = v_scale * I for gaussian / cauchy");
  test_cmd->add_option("--w", test.w, "common weight for expweighted")->capture_default_str();
  test_cmd->add_option("--D", test.depth, "truncation depth")->capture_default_str();
  test_cmd->add_option("--method", test.method, "permutation | split_ks | split_ad | split")
      ->capture_default_str();
  test_cmd->add_option("--perms", test.perms, "permutations")->capture_default_str();
  test_cmd->add_flag("--json", test.compact, "single-line JSON output");

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("study", "run a simulation study");
  study_cmd->add_option("config", study.config, "study config JSON (default: preset)");
  study_cmd->add_option("--preset", study.preset, "desk | full")->capture_default_str();
  study_cmd->add_option("--out", study.out, "output directory")->required();
  study_cmd->add_option("--threads", study.threads, "worker threads (0 = all cores)")
      ->capture_default_str();

  std::string init_preset = "desk", init_out;
  auto* config_cmd = app.add_subcommand("config", "configuration helpers");
  config_cmd->require_subcommand(1);
  auto* init_cmd = config_cmd->add_subcommand("init", "print a full default study config");
  init_cmd->add_option("--preset", init_preset, "desk | full")->capture_default_str();
  init_cmd->add_option("--out", init_out, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim);
    if (*approx_cmd) return cmd_approximate(approx);
    if (*test_cmd) {
      test.m_given = m_opt->count() > 0;
      return cmd_test(test);
    }
    if (*study_cmd) return cmd_study(study);
    if (*init_cmd) return cmd_config_init(init_preset, init_out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const PipelineError& e) {
    std::cerr << "pipeline error: " << e.what() << '\n';
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "pipeline error: " << e.what() << '\n';
    return kExitPipeline;
  }
  return kExitInput;
}

}  // namespace setdist::cli
