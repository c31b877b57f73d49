#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acbench/algorithms.hpp"
#include "acbench/mdp.hpp"

namespace acbench {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// One JSON document:
///   {"env": {"preset": "chain-5", ...}, "algo": {"algo": "nora", "episodes": 1000, ...},
///    "algos": ["nora", "douhua"], "seeds": [0, 1], "offline": {...} | {"file": "x.csv"},
///    "output": "out", "snapshot_every": 50, "emit": {"csv": true, "json": true, "svg": false}}
/// "algos" is only read by sweep; everything in "algo" applies to every algorithm.
struct RunConfig {
  nlohmann::json env;
  AlgoConfig algo;
  std::vector<Algo> algos;
  std::vector<std::uint64_t> seeds;
  std::optional<nlohmann::json> offline;
  std::string output = "acbench-out";
  bool emit_csv = true;
  bool emit_json = true;
  bool emit_svg = false;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

/// ACBENCH_OUT replaces the configured output directory when set.
std::string resolve_output_dir(const RunConfig& cfg);
/// ACBENCH_JOBS, else the number of hardware threads (at least 1).
int resolve_jobs();

void write_episodes_csv(const RunResult& run, std::ostream& out);
nlohmann::json run_summary(const RunResult& run, const Environment& env);

int cmd_run(const std::string& config_path, std::ostream& log);
int cmd_sweep(const std::string& config_path, std::ostream& log);
int cmd_plot(const std::string& input_csv, const std::string& kind, bool loglog,
             const std::string& output_svg, std::ostream& log);
int cmd_gen_offline(const std::string& config_path, const std::string& out_dir, std::ostream& log);

/// Series drawn by cmd_plot: mean with an optional lo/hi band.
struct PlotSeries {
  std::string label;
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};
struct PlotOptions {
  std::string title;
  std::string y_label;
  bool loglog = false;
  bool annotate_slope = false;
};
std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options);

}  // namespace acbench
