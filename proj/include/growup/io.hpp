#pragma once

#include "growup/graph.hpp"
#include "growup/operator_core.hpp"
#include "growup/point_cloud.hpp"
#include "growup/semiflow.hpp"

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace growup {

using json = nlohmann::json;

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

// From GROWUP_LOG (quiet, info, debug); info when unset.
LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// Throws ConfigError naming the first key of `obj` outside `allowed`.
void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where);

json read_json_file(const std::filesystem::path& path);

// Keys: n_plus, a_plus (rows), minus_rates (numbers or [re, im] pairs),
// norm_choice (optional).
SplitSystem parse_system(const json& j);
json system_to_json(const SplitSystem& sys);

State parse_state(const json& j, int n_plus, int n_minus);
json state_to_json(const State& u);

// Round-trip safe number formatting.
std::string fmt(double x);

// CSV rows kept in memory; save() prefixes a "# generated" timestamp line
// unless `reproducible` is set.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  std::size_t size() const { return lines_.size(); }
  std::string str(bool reproducible) const;
  void save(const std::filesystem::path& path, bool reproducible) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> lines_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);

// Columns p_1..p_n, q_1..q_m (plus q_j_im for complex rates).
void write_graph_csv(const std::filesystem::path& path, const GraphFn& g, bool complex_q,
                     bool reproducible);
json graph_to_json(const GraphFn& g);
GraphFn graph_from_json(const json& j);

// Columns time, p_i, q_j (plus q_j_im for complex rates).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          bool complex_q, bool reproducible);

void write_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud,
                     const std::vector<std::string>& header, bool reproducible);

}  // namespace growup
