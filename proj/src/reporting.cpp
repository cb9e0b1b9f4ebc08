#include "fpmlab/reporting.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fpm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::string_view data) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a(data));
  return buf;
}

std::string json_hash(const Json& j) {
  const nlohmann::json sorted = nlohmann::json::parse(j.dump());  // sorts keys
  return hash_hex(sorted.dump());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json report_to_json(const BoundReport& rep, bool expected_fail) {
  Json j;
  j["claim"] = rep.claim;
  j["verdict"] = rep.verdict;
  j["expected_fail"] = expected_fail;
  j["effective_pass"] = rep.passed() != expected_fail;
  j["margin_worst"] = rep.margin_worst;
  Json fitted = Json::object();
  for (const auto& [k, v] : rep.fitted) fitted[k] = v;
  j["fitted"] = fitted;
  if (!rep.note.empty()) j["note"] = rep.note;
  j["resolution"] = Json{{"n", rep.n}, {"n_steps", rep.n_steps}};
  j["inputs_hash"] = rep.inputs_hash;
  return j;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ostringstream out;
  out << "t";
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  out << "\n";
  for (int k = 0; k < traj.size(); ++k) {
    out << format_double(traj.times[k]);
    for (int i = 0; i < n; ++i) out << ',' << format_double(traj.states[k](i));
    out << "\n";
  }
  write_text_file(path, out.str());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trajectory " + path.string());
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trajectory file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      row.push_back(std::stod(line.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    if (row.size() < 2) throw std::runtime_error("malformed trajectory row");
    traj.times.push_back(row[0]);
    Eigen::VectorXd state(row.size() - 1);
    for (std::size_t i = 1; i < row.size(); ++i) state(i - 1) = row[i];
    traj.states.push_back(std::move(state));
    traj.at_step_time.push_back(true);
  }
  return traj;
}

Json meta_json(const Trajectory& traj, const std::string& config_hash, long wall_ms) {
  Json j;
  j["config_hash"] = config_hash;
  j["newton_iterations"] = traj.stats.newton_iterations;
  j["step_halvings"] = traj.stats.step_halvings;
  j["clamped_mass"] = traj.stats.clamped_mass;
  j["snapshots"] = traj.size();
  Json flags = Json::array();
  for (bool b : traj.at_step_time) flags.push_back(b ? 1 : 0);
  j["at_step"] = flags;
  j["wall_ms"] = wall_ms;
  return j;
}

}  // namespace fpm
