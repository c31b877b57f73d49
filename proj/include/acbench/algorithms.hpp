#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acbench/approx.hpp"
#include "acbench/critic.hpp"
#include "acbench/mdp.hpp"
#include "acbench/offline.hpp"

namespace acbench {

enum class Algo { Douhua, Nora, NoraPi, NoahPi, NoahStar, HybridNora, LsviUcbRs };

std::string to_string(Algo algo);
Algo algo_from_string(const std::string& name);
std::string to_string(SwitchRule rule);
SwitchRule switch_rule_from_string(const std::string& name);
bool needs_offline(Algo algo);

struct AlgoConfig {
  Algo algo = Algo::Nora;
  int episodes = 1000;
  std::uint64_t seed = 0;

  std::optional<double> eta;  // overrides the default learning rate
  double eta_scale = 1.0;     // constant in front of the default rate
  /// Default rate evaluated with T replaced by the current episode index t,
  /// so the step size shrinks as the run proceeds.
  bool anytime_eta = false;
  std::optional<double> beta;  // td-gap confidence width
  double beta_scale = 1.0;
  std::optional<double> bonus;  // bonus multiplier
  double lambda = 1.0;
  double delta = 0.05;
  std::optional<SwitchRule> switch_rule;
  std::optional<bool> clip;
  std::optional<CriticKind> critic;  // defaults to linear when the env has features

  /// Tabular nora only: critic from the enumerated confidence set instead of bonuses.
  bool confidence_set = false;
  /// Ablation: the trigger never fires, so the initial critic is kept for the whole run.
  bool freeze_trigger = false;
  bool allow_empty_offline = false;
  int snapshot_every = 50;
  bool track_td_gaps = false;
};

AlgoConfig algo_config_from_json(const nlohmann::json& doc);

struct EpisodeRecord {
  int t = 0;
  double reward = 0.0;  // sampled return
  double regret = 0.0;  // V*_1(s1) - V^{pi_t}_1(s1), exact
  double cum_regret = 0.0;
  bool switched = false;
  int cum_switches = 0;
  bool reset = false;
  std::vector<double> td_gaps;
};

struct CriticSnapshot {
  int t = 0;
  Critic critic;
};

struct RunResult {
  Algo algo = Algo::Nora;
  std::string env_name;
  AlgoConfig config;
  double v_star = 0.0;
  double v_uniform = 0.0;
  double eta = 0.0;
  double beta = 0.0;
  double bonus = 0.0;
  SwitchRule switch_rule = SwitchRule::Never;
  int refits = 0;
  int resets = 0;
  double max_ridge_residual = 0.0;
  std::vector<EpisodeRecord> records;
  /// Critic in force at t = 1, 1 + k, 1 + 2k, ... (k = snapshot_every).
  std::vector<CriticSnapshot> snapshots;

  double final_regret() const { return records.empty() ? 0.0 : records.back().cum_regret; }
  int switches() const { return records.empty() ? 0 : records.back().cum_switches; }
};

/// Learning rate used when AlgoConfig::eta is unset:
///   douhua, noah-pi:           scale * sqrt(log A / (H^2 T))
///   nora variants, noah-star:  scale * sqrt(d log T log A / (H T)), d = S*A for tabular critics
double default_eta(Algo algo, int n_actions, int horizon, int episodes, int dim, double scale);

/// Dispatches on cfg.algo. Hybrid variants require `offline` unless
/// cfg.allow_empty_offline is set.
RunResult run_algorithm(const Environment& env, const AlgoConfig& cfg,
                        const OfflineDataset* offline = nullptr);

RunResult run_douhua(const Environment& env, AlgoConfig cfg);
RunResult run_nora(const Environment& env, AlgoConfig cfg);
RunResult run_nora_pi(const Environment& env, AlgoConfig cfg);
RunResult run_noah_pi(const Environment& env, AlgoConfig cfg, const OfflineDataset* offline);
RunResult run_noah_star(const Environment& env, AlgoConfig cfg, const OfflineDataset* offline);
RunResult run_hybrid_nora(const Environment& env, AlgoConfig cfg, const OfflineDataset* offline);
RunResult run_lsvi_ucb_rs(const Environment& env, AlgoConfig cfg);

}  // namespace acbench
