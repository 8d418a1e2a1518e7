#include "sectkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sectkit/errors.hpp"

namespace sectkit {
namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  json data;
  try {
    in >> data;
  } catch (const json::exception& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return data;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path.string());
  out << text;
  if (!out) throw ParseError("write failed: " + path.string());
}

json direction_array(const DirectionGrid& grid) {
  json rows = json::array();
  for (const Point& d : grid.directions) {
    json row = json::array();
    for (int a = 0; a < grid.dim; ++a) row.push_back(d[a]);
    rows.push_back(std::move(row));
  }
  return rows;
}

DirectionGrid grid_from_manifest(const json& manifest) {
  DirectionGrid grid;
  grid.dim = manifest.at("d").get<int>();
  for (const auto& row : manifest.at("directions")) {
    Point d{0.0, 0.0, 0.0};
    if (static_cast<int>(row.size()) != grid.dim)
      throw ParseError("manifest direction row has wrong arity");
    for (int a = 0; a < grid.dim; ++a) d[a] = row[a].get<double>();
    grid.directions.push_back(d);
  }
  grid.validate();
  return grid;
}

template <typename Field>
json manifest_of(const Field& field, const std::string& kind) {
  json manifest;
  manifest["kind"] = kind;
  manifest["d"] = field.grid.dim;
  manifest["gamma"] = field.grid.size();
  manifest["delta"] = field.levels.count;
  manifest["T"] = field.levels.horizon;
  manifest["R"] = field.bounding_radius;
  manifest["shape_id"] = field.shape_id;
  manifest["directions"] = direction_array(field.grid);
  return manifest;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& path) {
  if (path.extension() == ".json") return path;
  if (path.extension() == ".csv") {
    std::filesystem::path manifest = path;
    manifest.replace_extension(".json");
    return manifest;
  }
  throw ParseError("field path must end in .json or .csv: " + path.string());
}

std::vector<std::vector<std::string>> read_csv_cells(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(
          start, comma == std::string::npos ? std::string::npos
                                            : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("malformed number: '" + cell + "'");
  return value;
}

int parse_int(const std::string& cell) {
  int value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("malformed integer: '" + cell + "'");
  return value;
}

template <typename Field, typename Format>
std::filesystem::path write_field_files(const std::filesystem::path& directory,
                                        const Field& field,
                                        const std::string& kind,
                                        Format&& format_cell) {
  field.validate();
  std::filesystem::create_directories(directory);
  const std::string stem = field.shape_id + "." + kind;
  const auto csv_path = directory / (stem + ".csv");
  const auto manifest_path = directory / (stem + ".json");

  std::ostringstream csv;
  for (Eigen::Index p = 0; p < field.values.rows(); ++p) {
    for (Eigen::Index q = 0; q < field.values.cols(); ++q) {
      if (q > 0) csv << ',';
      csv << format_cell(field.values(p, q));
    }
    csv << '\n';
  }
  write_text_file(csv_path, csv.str());
  write_text_file(manifest_path, manifest_of(field, kind).dump(2) + "\n");
  return manifest_path;
}

template <typename Field, typename Parse>
Field read_field_files(const std::filesystem::path& path,
                       const std::string& kind, Parse&& parse_cell) {
  const auto manifest_path = manifest_path_for(path);
  const json manifest = read_json_file(manifest_path);
  if (manifest.at("kind").get<std::string>() != kind)
    throw ParseError("manifest kind mismatch in " + manifest_path.string() +
                     " (expected " + kind + ")");

  Field field;
  field.grid = grid_from_manifest(manifest);
  field.levels.horizon = manifest.at("T").get<double>();
  field.levels.count = manifest.at("delta").get<int>();
  field.bounding_radius = manifest.at("R").get<double>();
  field.shape_id = manifest.at("shape_id").get<std::string>();
  if (manifest.at("gamma").get<std::size_t>() != field.grid.size())
    throw ParseError("manifest gamma/direction count mismatch");

  std::filesystem::path csv_path = manifest_path;
  csv_path.replace_extension(".csv");
  const auto cells = read_csv_cells(csv_path);
  if (cells.size() != field.grid.size())
    throw ParseError("CSV row count does not match gamma in " +
                     csv_path.string());
  field.values.resize(static_cast<Eigen::Index>(cells.size()),
                      field.levels.count);
  for (std::size_t p = 0; p < cells.size(); ++p) {
    if (cells[p].size() != static_cast<std::size_t>(field.levels.count))
      throw ParseError("CSV column count does not match delta in " +
                       csv_path.string());
    for (std::size_t q = 0; q < cells[p].size(); ++q)
      field.values(static_cast<Eigen::Index>(p),
                   static_cast<Eigen::Index>(q)) = parse_cell(cells[p][q]);
  }
  field.validate();
  return field;
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  const auto [ptr, ec] =
      std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

std::filesystem::path write_field(const std::filesystem::path& directory,
                                  const SECTField& field) {
  return write_field_files(directory, field, "sect",
                           [](double v) { return format_double(v); });
}

std::filesystem::path write_field(const std::filesystem::path& directory,
                                  const ECTField& field) {
  return write_field_files(directory, field, "ect",
                           [](int v) { return std::to_string(v); });
}

SECTField read_sect_field(const std::filesystem::path& path) {
  return read_field_files<SECTField>(
      path, "sect", [](const std::string& cell) { return parse_double(cell); });
}

ECTField read_ect_field(const std::filesystem::path& path) {
  return read_field_files<ECTField>(
      path, "ect", [](const std::string& cell) { return parse_int(cell); });
}

std::vector<std::filesystem::path> list_field_manifests(
    const std::filesystem::path& directory, const std::string& kind) {
  if (!std::filesystem::is_directory(directory))
    throw ParseError("not a directory: " + directory.string());
  const std::string suffix = "." + kind + ".json";
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

LoadedGroup load_group(const std::filesystem::path& directory, bool want_sect,
                       bool want_ect) {
  LoadedGroup loaded;
  if (want_sect) {
    loaded.sect_manifests = list_field_manifests(directory, "sect");
    for (const auto& path : loaded.sect_manifests)
      loaded.group.sect.push_back(read_sect_field(path));
  }
  if (want_ect) {
    loaded.ect_manifests = list_field_manifests(directory, "ect");
    for (const auto& path : loaded.ect_manifests)
      loaded.group.ect.push_back(read_ect_field(path));
  }
  return loaded;
}

void write_test_report(const std::filesystem::path& path,
                       const TestReport& report) {
  json data;
  data["method"] = report.method;
  data["statistic"] = report.statistic;
  data["reference"] = report.reference;
  data["p_value"] = report.p_value;
  data["l_hat"] = report.l_hat;
  data["nu_star_index"] = report.nu_star_index;
  data["decision"] = report.rejected() ? "Reject" : "Accept";
  data["r_frobenius"] = report.r_frobenius;
  data["r_max"] = report.r_max;
  data["seed"] = report.seed;
  data["permutations"] = report.permutations;
  data["k_star"] = report.k_star;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  write_text_file(path, data.dump(2) + "\n");
}

TestReport read_test_report(const std::filesystem::path& path) {
  const json data = read_json_file(path);
  TestReport report;
  report.method = data.at("method").get<std::string>();
  report.statistic = data.at("statistic").get<double>();
  report.reference = data.at("reference").get<double>();
  report.p_value = data.at("p_value").get<double>();
  report.l_hat = data.at("l_hat").get<int>();
  report.nu_star_index = data.at("nu_star_index").get<int>();
  report.decision = data.at("decision").get<std::string>() == "Reject"
                        ? Decision::reject
                        : Decision::accept;
  report.r_frobenius = data.at("r_frobenius").get<double>();
  report.r_max = data.at("r_max").get<double>();
  report.seed = data.at("seed").get<std::uint64_t>();
  report.permutations = data.at("permutations").get<int>();
  report.k_star = data.value("k_star", 0);
  return report;
}

StudyConfig read_study_config(const std::filesystem::path& path) {
  const json data = read_json_file(path);
  StudyConfig config;
  config.epsilons = data.value("epsilons", config.epsilons);
  config.shapes_per_group = data.value("shapes_per_group", config.shapes_per_group);
  config.replicates = data.value("replicates", config.replicates);
  config.directions = data.value("directions", config.directions);
  config.levels = data.value("levels", config.levels);
  config.alpha = data.value("alpha", config.alpha);
  config.permutations = data.value("permutations", config.permutations);
  config.seed = data.value("seed", config.seed);
  config.algorithms = data.value("algorithms", config.algorithms);
  config.family.noise_sd = data.value("noise_sd", config.family.noise_sd);
  config.family.curve_points = data.value("curve_points", config.family.curve_points);
  config.threads = data.value("threads", config.threads);
  config.nerve.max_simplex_vertices =
      data.value("max_simplex_vertices", config.nerve.max_simplex_vertices);
  config.validate();
  return config;
}

RuntimeConfig read_runtime_config(const std::filesystem::path& path) {
  const json data = read_json_file(path);
  RuntimeConfig config;
  config.direction_counts = data.value("direction_counts", config.direction_counts);
  config.level_counts = data.value("level_counts", config.level_counts);
  config.group_sizes = data.value("group_sizes", config.group_sizes);
  config.replicates = data.value("replicates", config.replicates);
  config.permutations = data.value("permutations", config.permutations);
  config.alpha = data.value("alpha", config.alpha);
  config.seed = data.value("seed", config.seed);
  config.threads = data.value("threads", config.threads);
  config.validate();
  return config;
}

void write_rejection_outputs(const std::filesystem::path& directory,
                             const StudyConfig& config,
                             const StudyResult& result) {
  std::filesystem::create_directories(directory);

  std::ostringstream csv;
  csv << "epsilon,algorithm,rejection_rate,mean_r_frobenius,mean_r_max,"
         "mean_runtime_seconds,replicates\n";
  for (const auto& cell : result.cells) {
    csv << format_double(cell.epsilon) << ',' << cell.algorithm << ','
        << format_double(cell.rejection_rate) << ','
        << format_double(cell.mean_r_frobenius) << ','
        << format_double(cell.mean_r_max) << ','
        << format_double(cell.mean_runtime_seconds) << ',' << cell.replicates
        << '\n';
  }
  write_text_file(directory / "rejection_rates.csv", csv.str());

  // Plot data: one row per epsilon, one column per algorithm.
  std::ostringstream plot;
  plot << "epsilon,algorithm1,algorithm2,algorithm3\n";
  for (double epsilon : config.epsilons) {
    plot << format_double(epsilon);
    for (int algorithm = 1; algorithm <= 3; ++algorithm) {
      plot << ',';
      if (const auto* cell = result.find(epsilon, algorithm))
        plot << format_double(cell->rejection_rate);
    }
    plot << '\n';
  }
  write_text_file(directory / "rejection_plot_data.csv", plot.str());

  json summary;
  summary["study"] = "rejection";
  summary["config"] = {{"epsilons", config.epsilons},
                       {"shapes_per_group", config.shapes_per_group},
                       {"replicates", config.replicates},
                       {"directions", config.directions},
                       {"levels", config.levels},
                       {"alpha", config.alpha},
                       {"permutations", config.permutations},
                       {"seed", config.seed},
                       {"algorithms", config.algorithms},
                       {"noise_sd", config.family.noise_sd},
                       {"curve_points", config.family.curve_points}};
  json cells = json::array();
  for (const auto& cell : result.cells) {
    cells.push_back({{"epsilon", cell.epsilon},
                     {"algorithm", cell.algorithm},
                     {"rejection_rate", cell.rejection_rate},
                     {"mean_r_frobenius", cell.mean_r_frobenius},
                     {"mean_r_max", cell.mean_r_max},
                     {"mean_runtime_seconds", cell.mean_runtime_seconds},
                     {"replicates", cell.replicates}});
  }
  summary["cells"] = std::move(cells);
  write_text_file(directory / "summary.json", summary.dump(2) + "\n");
}

void write_runtime_outputs(const std::filesystem::path& directory,
                           const RuntimeConfig& config,
                           const RuntimeResult& result) {
  std::filesystem::create_directories(directory);

  std::ostringstream csv;
  csv << "algorithm,directions,levels,group_size,mean_seconds,sd_seconds\n";
  for (const auto& cell : result.cells) {
    csv << cell.algorithm << ',' << cell.directions << ',' << cell.levels
        << ',' << cell.group_size << ',' << format_double(cell.mean_seconds)
        << ',' << format_double(cell.sd_seconds) << '\n';
  }
  write_text_file(directory / "runtime.csv", csv.str());

  json summary;
  summary["study"] = "runtime";
  summary["config"] = {{"direction_counts", config.direction_counts},
                       {"level_counts", config.level_counts},
                       {"group_sizes", config.group_sizes},
                       {"replicates", config.replicates},
                       {"permutations", config.permutations},
                       {"alpha", config.alpha},
                       {"seed", config.seed}};
  json cells = json::array();
  for (const auto& cell : result.cells) {
    cells.push_back({{"algorithm", cell.algorithm},
                     {"directions", cell.directions},
                     {"levels", cell.levels},
                     {"group_size", cell.group_size},
                     {"mean_seconds", cell.mean_seconds},
                     {"sd_seconds", cell.sd_seconds}});
  }
  summary["cells"] = std::move(cells);
  write_text_file(directory / "summary.json", summary.dump(2) + "\n");
}

}  // namespace sectkit
