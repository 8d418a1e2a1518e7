#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sectkit/infer.hpp"
#include "sectkit/sect.hpp"
#include "sectkit/study.hpp"

namespace sectkit {

/// Field files: <shape_id>.<kind>.csv holds the value array (rows =
/// directions, columns = levels) and <shape_id>.<kind>.json the manifest
/// {kind, d, gamma, delta, T, R, shape_id, directions}.  Doubles are written
/// in shortest round-trip decimal form, so re-reading reproduces the
/// in-memory field bit-exactly.
std::filesystem::path write_field(const std::filesystem::path& directory,
                                  const SECTField& field);
std::filesystem::path write_field(const std::filesystem::path& directory,
                                  const ECTField& field);

/// `path` may point at the manifest (.json) or the value file (.csv).
SECTField read_sect_field(const std::filesystem::path& path);
ECTField read_ect_field(const std::filesystem::path& path);

/// Manifests of the given kind ("sect" | "ect") in a directory, sorted by
/// filename.
std::vector<std::filesystem::path> list_field_manifests(
    const std::filesystem::path& directory, const std::string& kind);

struct LoadedGroup {
  GroupSample group;
  std::vector<std::filesystem::path> sect_manifests;
  std::vector<std::filesystem::path> ect_manifests;
};

LoadedGroup load_group(const std::filesystem::path& directory, bool want_sect,
                       bool want_ect);

void write_test_report(const std::filesystem::path& path,
                       const TestReport& report);
TestReport read_test_report(const std::filesystem::path& path);

/// Study configs as JSON; absent keys keep their defaults.
StudyConfig read_study_config(const std::filesystem::path& path);
RuntimeConfig read_runtime_config(const std::filesystem::path& path);

/// Study outputs: a per-(epsilon, algorithm) CSV, a plot-data CSV with one
/// row per epsilon, and a JSON summary.
void write_rejection_outputs(const std::filesystem::path& directory,
                             const StudyConfig& config,
                             const StudyResult& result);
void write_runtime_outputs(const std::filesystem::path& directory,
                           const RuntimeConfig& config,
                           const RuntimeResult& result);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace sectkit
