#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acbench/mdp.hpp"

namespace acbench {

enum class EnvKind { Chain, RandomTabular, RandomLinear, Tetris };

/// Tetris pieces available to make_tetris. All are flat-bottomed column stacks.
enum class TetrisPiece { Mono, Domino, TrominoI, TrominoL };

struct EnvConfig {
  EnvKind kind = EnvKind::Chain;
  std::uint64_t seed = 0;
  int n_states = 5;
  int n_actions = 2;
  int horizon = 8;
  int dim = 4;  // random-linear feature dimension

  double reward_sparsity = 0.0;  // probability that a reward entry is zeroed
  double dirichlet_alpha = 1.0;  // symmetric Dirichlet concentration for transitions
  double slip = 0.0;             // chain: probability the intended move is replaced by the other one

  int board_width = 4;
  int height_cap = 3;
  std::vector<TetrisPiece> pieces = {TetrisPiece::Mono, TetrisPiece::Domino};
  std::size_t max_states = 200000;
};

/// Chain of `length` states starting at the left end. Action 1 moves right,
/// action 0 moves left (both saturate at the ends). Reward 1 for any
/// (s, a) whose intended successor is the rightmost state, so
/// V*_1(s1) = H - S + 2 without slip. Requires S >= 2 and H >= S - 1.
TabularMdp make_chain(int length, int horizon, double slip = 0.0);

/// Dirichlet transitions, U[0,1] rewards zeroed with probability reward_sparsity.
TabularMdp make_random_tabular(const EnvConfig& cfg);

/// Low-rank linear MDP: phi(h,s,a) on the probability simplex, P_h = phi^T mu_h
/// with mu_h rows Dirichlet distributions over states, r_h = phi^T theta_h with
/// theta_h in [0,1]^d. Q^pi is exactly linear in phi for every pi.
LinearMdp make_random_linear(const EnvConfig& cfg);

/// Enumerable tetris. States are (capped column-height profile, current piece);
/// actions are rotation * W + column. A placement lands on the highest covered
/// column, full rows are cleared (reward = rows cleared / height cap),
/// and a placement that would exceed the height cap is discarded with reward 0.
/// The next piece is uniform over cfg.pieces. Features are the afterstate
/// column heights in thermometer form (W * cap indicators), the current-piece
/// one-hot, the normalized rows cleared and a bias, all scaled by 1/sqrt(d).
LinearMdp make_tetris(const EnvConfig& cfg);

std::size_t tetris_state_count(const EnvConfig& cfg);

/// Named presets: chain-5, random-tab, random-lin, tetris-small.
EnvConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

Environment make_environment(const EnvConfig& cfg, std::string name = "");

/// Preset (or "file") plus overrides: {"preset": "...", "seed": 3, "horizon": 6, ...}
/// or {"file": "mdp.json"}.
Environment environment_from_config(const nlohmann::json& doc);
EnvConfig env_config_from_json(const nlohmann::json& doc);

std::string to_string(EnvKind kind);

}  // namespace acbench
