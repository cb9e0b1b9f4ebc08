#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>

#include "fpmlab/estimates.hpp"
#include "fpmlab/solver.hpp"

namespace fpm {

using Json = nlohmann::ordered_json;

/// Shortest-exact decimal form, stable for byte-identical reports.
std::string format_double(double v);

std::uint64_t fnv1a(std::string_view data);
std::string hash_hex(std::string_view data);

/// Canonical hash of a JSON document (keys sorted before serialization).
std::string json_hash(const Json& j);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

Json report_to_json(const BoundReport& rep, bool expected_fail);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Run sidecar: config hash, Newton statistics, clamped mass, wall time.
/// Wall time is diagnostic and excluded from determinism comparisons.
Json meta_json(const Trajectory& traj, const std::string& config_hash, long wall_ms);

}  // namespace fpm
