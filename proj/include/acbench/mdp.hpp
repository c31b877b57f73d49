#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace acbench {

/// Probability mass on one successor state.
struct Outcome {
  int next_state;
  double prob;
};

/// Sentinel successor recorded for the last step of an episode.
inline constexpr int kTerminalState = -1;

/// Finite-horizon episodic MDP with deterministic rewards and a fixed start
/// state. Steps are 0-based internally (h = 0 is the first step); all value
/// bounds H - h below use that convention.
///
/// Transition rows are stored sparsely. Construction validates every row
/// (nonnegative, sums to 1 within 1e-9) and every reward (in [0, 1]) and throws
/// std::invalid_argument otherwise. Immutable afterwards.
class TabularMdp {
 public:
  TabularMdp(int n_states, int n_actions, int horizon,
             std::vector<std::vector<Outcome>> transitions,
             std::vector<double> rewards, int initial_state);

  /// Builds from a dense table indexed [h][s][a][s'] (flattened row-major).
  static TabularMdp from_dense(int n_states, int n_actions, int horizon,
                               const std::vector<double>& transitions,
                               std::vector<double> rewards, int initial_state);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int horizon() const { return horizon_; }
  int initial_state() const { return initial_state_; }

  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * n_states_ + s) * n_actions_ + a;
  }
  std::size_t n_cells() const {
    return static_cast<std::size_t>(horizon_) * n_states_ * n_actions_;
  }

  std::span<const Outcome> next(int h, int s, int a) const {
    return transitions_[index(h, s, a)];
  }
  double reward(int h, int s, int a) const { return rewards_[index(h, s, a)]; }
  double prob(int h, int s, int a, int next_state) const;

  const std::vector<double>& rewards() const { return rewards_; }

  bool operator==(const TabularMdp& other) const;

 private:
  int n_states_;
  int n_actions_;
  int horizon_;
  std::vector<std::vector<Outcome>> transitions_;
  std::vector<double> rewards_;
  int initial_state_;
};

/// φ(h, s, a) table for a linear critic class.
class FeatureMap {
 public:
  FeatureMap(int n_states, int n_actions, int horizon, int dim,
             std::vector<Eigen::VectorXd> rows);

  /// One-hot φ(h,s,a) = e_{(s,a)} with d = S*A, shared across steps.
  static FeatureMap one_hot(int n_states, int n_actions, int horizon);

  int dim() const { return dim_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int horizon() const { return horizon_; }

  const Eigen::VectorXd& operator()(int h, int s, int a) const {
    return rows_[(static_cast<std::size_t>(h) * n_states_ + s) * n_actions_ + a];
  }

  double max_norm() const;

 private:
  int n_states_;
  int n_actions_;
  int horizon_;
  int dim_;
  std::vector<Eigen::VectorXd> rows_;
};

/// Linear MDP: features plus the tabular ground truth used for simulation and
/// exact oracles. Feature norms must be at most 1 (within 1e-9).
struct LinearMdp {
  LinearMdp(TabularMdp underlying, FeatureMap features);

  TabularMdp underlying;
  FeatureMap features;

  int dim() const { return features.dim(); }
};

/// What the algorithms run against: a tabular ground truth and, for linear
/// environments, its feature map.
struct Environment {
  std::string name;
  TabularMdp mdp;
  std::optional<FeatureMap> features;

  static Environment tabular(std::string name, TabularMdp mdp);
  static Environment linear(std::string name, LinearMdp lin);
};

struct Transition {
  int step;
  int state;
  int action;
  double reward;
  int next_state;  // kTerminalState at the last step

  bool operator==(const Transition&) const = default;
};

struct Trajectory {
  int episode_index = 0;
  std::vector<Transition> transitions;

  double total_reward() const;
  bool operator==(const Trajectory&) const = default;
};

enum class ValueKind { Optimal, PolicyEval };

/// Q and V tables; V at step H (past the horizon) is identically zero and not stored.
struct ValueTables {
  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  ValueKind kind = ValueKind::Optimal;
  std::vector<double> q;  // [h][s][a]
  std::vector<double> v;  // [h][s]

  double q_at(int h, int s, int a) const {
    return q[(static_cast<std::size_t>(h) * n_states + s) * n_actions + a];
  }
  double v_at(int h, int s) const {
    return v[static_cast<std::size_t>(h) * n_states + s];
  }
};

/// Parses an MDP document: n_states, n_actions, horizon, transitions (dense
/// nested [h][s][a][s']), rewards ([h][s][a]), initial_state, optional
/// features ([h][s][a][k]).
Environment environment_from_json(const nlohmann::json& doc, std::string name = "file");
Environment load_environment(const std::string& path);
nlohmann::json environment_to_json(const Environment& env);

}  // namespace acbench
