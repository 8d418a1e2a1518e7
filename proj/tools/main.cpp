// sectkit: Euler characteristic transforms of shapes and two-sample
// hypothesis tests on shape collections.
//
// Exit codes: 0 success (tests: Accept), 3 tests: Reject, 1 usage error,
// 2 data/computation error.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "sectkit/errors.hpp"
#include "sectkit/io.hpp"
#include "sectkit/study.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitReject = 3;

struct ShapeRequest {
  sectkit::ShapeSpec shape;
  std::string id;
};

// --shape accepts builtin:K1, builtin:K2, family:eps=E,seed=S[,J=..][,sd=..],
// or a path to an OFF mesh.
ShapeRequest parse_shape(const std::string& spec, int curve_points) {
  using namespace sectkit;
  if (spec == "builtin:K1")
    return {make_deterministic_shape(DeterministicShape::K1, curve_points),
            "K1"};
  if (spec == "builtin:K2")
    return {make_deterministic_shape(DeterministicShape::K2, curve_points),
            "K2"};
  if (spec.rfind("family:", 0) == 0) {
    FamilyParams params;
    params.curve_points = curve_points;
    std::uint64_t seed = 0;
    std::string rest = spec.substr(7);
    std::string id_eps = "0", id_seed = "0";
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string item = rest.substr(0, comma);
      rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos)
        throw CLI::ValidationError("--shape", "bad family parameter: " + item);
      const std::string key = item.substr(0, eq);
      const std::string value = item.substr(eq + 1);
      if (key == "eps") {
        params.epsilon = std::stod(value);
        id_eps = value;
      } else if (key == "seed") {
        seed = std::stoull(value);
        id_seed = value;
      } else if (key == "J") {
        params.curve_points = std::stoi(value);
      } else if (key == "sd") {
        params.noise_sd = std::stod(value);
      } else {
        throw CLI::ValidationError("--shape", "unknown family key: " + key);
      }
    }
    RandomStream stream = RandomStream::keyed(seed, {});
    return {sample_random_shape(params, stream),
            "family_eps" + id_eps + "_seed" + id_seed};
  }
  const std::filesystem::path path(spec);
  TriMesh mesh = load_off_mesh(path);
  return {make_shape_spec(std::move(mesh)), path.stem().string()};
}

int run_compute(const std::string& shape_spec, const std::string& directions,
                int levels, std::optional<double> radius,
                const std::string& backend_name,
                const std::filesystem::path& out_dir, int curve_points,
                int threads) {
  using namespace sectkit;
  ShapeRequest request = parse_shape(shape_spec, curve_points);
  if (radius) {
    request.shape.bounding_radius = *radius;
    request.shape.validate();
  }

  DirectionGrid grid;
  char* end = nullptr;
  const long count = std::strtol(directions.c_str(), &end, 10);
  if (end && *end == '\0' && count > 0) {
    if (request.shape.dim() == 3)
      throw CLI::ValidationError(
          "--directions", "3-dimensional shapes need a direction file");
    grid = uniform_circle_grid(static_cast<int>(count));
  } else {
    grid = direction_grid_from_file(directions, request.shape.dim());
  }

  ComputeBackend backend;
  if (backend_name == "mesh") {
    backend.kind = ComputeBackend::Kind::mesh;
  } else if (backend_name == "cech") {
    backend.kind = ComputeBackend::Kind::cech_nerve;
  } else if (backend_name.rfind("raster", 0) == 0) {
    backend.kind = ComputeBackend::Kind::raster;
    if (backend_name.size() > 7 && backend_name[6] == ':')
      backend.raster_delta = std::stod(backend_name.substr(7));
  } else if (backend_name == "auto") {
    backend.kind = request.shape.is_mesh() ? ComputeBackend::Kind::mesh
                                           : ComputeBackend::Kind::cech_nerve;
  } else {
    throw CLI::ValidationError("--backend", "unknown backend: " + backend_name);
  }

  const LevelGrid level_grid{2.0 * request.shape.bounding_radius, levels};
  const FieldPair fields = compute_fields(request.shape, grid, level_grid,
                                          backend, request.id, threads);
  write_field(out_dir, fields.sect);
  write_field(out_dir, fields.ect);
  std::printf("shape=%s gamma=%zu delta=%d T=%.17g terminal_chi=%d\n",
              request.id.c_str(), grid.size(), levels, level_grid.horizon,
              fields.ect.values(0, levels - 1));
  return kExitOk;
}

int run_test(const std::filesystem::path& dir1,
             const std::filesystem::path& dir2, const std::string& method,
             double alpha, int permutations, std::uint64_t seed,
             const std::string& scheme_name,
             const std::filesystem::path& out_path, int threads) {
  using namespace sectkit;
  const bool wants_ect = method == "nhst";
  LoadedGroup g1 = load_group(dir1, !wants_ect, wants_ect);
  LoadedGroup g2 = load_group(dir2, !wants_ect, wants_ect);

  // Grid mismatch diagnostics name a manifest from each group.
  try {
    if (!wants_ect) {
      if (g1.group.sect.empty() || g2.group.sect.empty())
        throw ParseError("no SECT fields found in one of the groups");
      if (g1.group.sect.front().grid != g2.group.sect.front().grid ||
          !(g1.group.sect.front().levels == g2.group.sect.front().levels))
        throw GridMismatchError("grids differ between groups");
    } else {
      if (g1.group.ect.empty() || g2.group.ect.empty())
        throw ParseError("no ECT fields found in one of the groups");
      if (g1.group.ect.front().grid != g2.group.ect.front().grid ||
          !(g1.group.ect.front().levels == g2.group.ect.front().levels))
        throw GridMismatchError("grids differ between groups");
    }
  } catch (const GridMismatchError& e) {
    const auto& m1 = wants_ect ? g1.ect_manifests : g1.sect_manifests;
    const auto& m2 = wants_ect ? g2.ect_manifests : g2.sect_manifests;
    throw GridMismatchError(std::string(e.what()) + " (" +
                            m1.front().string() + " vs " +
                            m2.front().string() + ")");
  }

  TestReport report;
  if (method == "chi2") {
    report = algorithm1_chi2(g1.group, g2.group, alpha);
  } else if (method == "perm") {
    const PermutationScheme scheme = scheme_name == "pairswap"
                                         ? PermutationScheme::pair_swap
                                         : PermutationScheme::balanced;
    report = algorithm2_permutation(g1.group, g2.group, alpha, permutations,
                                    seed, scheme, threads);
  } else if (method == "nhst") {
    report = algorithm3_nhst(g1.group, g2.group, alpha, permutations, seed,
                             threads);
  } else {
    throw CLI::ValidationError("--method", "unknown method: " + method);
  }

  if (!out_path.empty()) write_test_report(out_path, report);
  std::printf("method=%s decision=%s statistic=%.17g reference=%.17g "
              "p_value=%.17g L=%d nu_star=%d\n",
              report.method.c_str(), report.rejected() ? "Reject" : "Accept",
              report.statistic, report.reference, report.p_value, report.l_hat,
              report.nu_star_index);
  return report.rejected() ? kExitReject : kExitOk;
}

int run_simulate(const std::string& study,
                 const std::filesystem::path& config_path,
                 const std::filesystem::path& out_dir, int threads) {
  using namespace sectkit;
  if (study == "rejection") {
    StudyConfig config;
    if (!config_path.empty()) config = read_study_config(config_path);
    if (threads > 0) config.threads = threads;
    const StudyResult result = run_rejection_study(config);
    write_rejection_outputs(out_dir, config, result);
  } else if (study == "runtime") {
    RuntimeConfig config;
    if (!config_path.empty()) config = read_runtime_config(config_path);
    if (threads > 0) config.threads = threads;
    const RuntimeResult result = run_runtime_study(config);
    write_runtime_outputs(out_dir, config, result);
  } else {
    throw CLI::ValidationError("--study", "unknown study: " + study);
  }
  std::printf("study=%s out=%s\n", study.c_str(), out_dir.string().c_str());
  return kExitOk;
}

int run_distance(const std::filesystem::path& a,
                 const std::filesystem::path& b) {
  using namespace sectkit;
  const ECTField fa = read_ect_field(a);
  const ECTField fb = read_ect_field(b);
  std::printf("%.12g\n", rho_discrete(fa, fb));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler characteristic curves, (smooth) Euler characteristic "
               "transforms, and two-sample hypothesis tests on shapes"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker thread cap (default: SECTKIT_THREADS or hardware)");

  auto* compute = app.add_subcommand("compute",
                                     "Compute SECT/ECT fields of one shape");
  std::string shape_spec, directions = "8", backend = "auto";
  int levels = 0, curve_points = 100;
  std::optional<double> radius;
  std::filesystem::path out_dir = ".";
  compute->add_option("--shape", shape_spec,
                      "builtin:K1 | builtin:K2 | family:eps=E,seed=S | OFF path")
      ->required();
  compute->add_option("--directions", directions,
                      "Direction count (uniform circle) or CSV file");
  compute->add_option("--levels", levels, "Number of sublevel grid points")
      ->required();
  compute->add_option("--radius", radius, "Reference ball radius R (T = 2R)");
  compute->add_option("--backend", backend, "mesh | cech | raster[:delta]");
  compute->add_option("--curve-points", curve_points,
                      "Ball centers per arc for builtin shapes");
  compute->add_option("--out", out_dir, "Output directory");

  auto* test = app.add_subcommand("test", "Two-sample test on field groups");
  std::filesystem::path group1, group2, report_path;
  std::string method = "perm", scheme = "balanced";
  double alpha = 0.05;
  int permutations = 1000;
  std::uint64_t seed = 0;
  test->add_option("--group1", group1, "Directory of first group")->required();
  test->add_option("--group2", group2, "Directory of second group")->required();
  test->add_option("--method", method, "chi2 | perm | nhst");
  test->add_option("--alpha", alpha, "Test level");
  test->add_option("--permutations", permutations, "Permutation count");
  test->add_option("--seed", seed, "Permutation seed");
  test->add_option("--scheme", scheme, "balanced | pairswap (perm only)");
  test->add_option("--out", report_path, "Report JSON path");

  auto* simulate = app.add_subcommand("simulate", "Run a simulation study");
  std::string study;
  std::filesystem::path config_path, sim_out;
  simulate->add_option("--study", study, "rejection | runtime")->required();
  simulate->add_option("--config", config_path, "JSON config (optional)");
  simulate->add_option("--out", sim_out, "Output directory")->required();

  auto* distance = app.add_subcommand("distance",
                                      "Discrete rho between two ECT fields");
  std::filesystem::path field_a, field_b;
  distance->add_option("--a", field_a, "First field (.ect.json or .csv)")
      ->required();
  distance->add_option("--b", field_b, "Second field")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (compute->parsed())
      return run_compute(shape_spec, directions, levels, radius, backend,
                         out_dir, curve_points, threads);
    if (test->parsed())
      return run_test(group1, group2, method, alpha, permutations, seed,
                      scheme, report_path, threads);
    if (simulate->parsed())
      return run_simulate(study, config_path, sim_out, threads);
    if (distance->parsed()) return run_distance(field_a, field_b);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
