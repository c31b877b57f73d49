#include "acbench/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "acbench/rng.hpp"

namespace acbench {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::vector<double> dirichlet(int n, double alpha, Rng& rng) {
  std::vector<double> x(n);
  double total = 0.0;
  if (alpha == 1.0) {
    for (double& v : x) {
      v = -std::log1p(-uniform01(rng));
      total += v;
    }
  } else {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    for (double& v : x) {
      v = gamma(rng);
      total += v;
    }
  }
  if (!(total > 0.0)) {
    std::fill(x.begin(), x.end(), 1.0 / n);
    return x;
  }
  for (double& v : x) v /= total;
  return x;
}

// Column-height stacks per rotation; every piece is flat-bottomed.
std::vector<std::vector<int>> piece_rotations(TetrisPiece p) {
  switch (p) {
    case TetrisPiece::Mono:
      return {{1}};
    case TetrisPiece::Domino:
      return {{1, 1}, {2}};
    case TetrisPiece::TrominoI:
      return {{1, 1, 1}, {3}};
    case TetrisPiece::TrominoL:
      return {{2, 1}, {1, 2}};
  }
  return {{1}};
}

TetrisPiece piece_from_string(const std::string& s) {
  if (s == "mono") return TetrisPiece::Mono;
  if (s == "domino") return TetrisPiece::Domino;
  if (s == "tromino-i") return TetrisPiece::TrominoI;
  if (s == "tromino-l") return TetrisPiece::TrominoL;
  throw std::invalid_argument("unknown tetris piece '" + s + "'");
}

EnvKind kind_from_string(const std::string& s) {
  if (s == "chain") return EnvKind::Chain;
  if (s == "random-tabular") return EnvKind::RandomTabular;
  if (s == "random-linear") return EnvKind::RandomLinear;
  if (s == "tetris") return EnvKind::Tetris;
  throw std::invalid_argument("unknown env kind '" + s + "'");
}

}  // namespace

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Chain:
      return "chain";
    case EnvKind::RandomTabular:
      return "random-tabular";
    case EnvKind::RandomLinear:
      return "random-linear";
    case EnvKind::Tetris:
      return "tetris";
  }
  return "unknown";
}

TabularMdp make_chain(int length, int horizon, double slip) {
  require(length >= 2, "chain: need at least 2 states");
  require(horizon >= length - 1, "chain: horizon shorter than the chain makes V* = 0");
  require(slip >= 0.0 && slip <= 1.0, "chain: slip must lie in [0,1]");
  const int S = length, A = 2, H = horizon;
  std::vector<std::vector<Outcome>> rows(static_cast<std::size_t>(H) * S * A);
  std::vector<double> rewards(rows.size(), 0.0);
  auto move = [&](int s, int a) { return a == 1 ? std::min(s + 1, S - 1) : std::max(s - 1, 0); };
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::size_t i = (static_cast<std::size_t>(h) * S + s) * A + a;
        const int intended = move(s, a);
        const int other = move(s, 1 - a);
        rows[i].push_back({intended, 1.0 - slip});
        if (slip > 0.0) rows[i].push_back({other, slip});
        rewards[i] = intended == S - 1 ? 1.0 : 0.0;
      }
    }
  }
  return TabularMdp(S, A, H, std::move(rows), std::move(rewards), 0);
}

TabularMdp make_random_tabular(const EnvConfig& cfg) {
  require(cfg.n_states > 0 && cfg.n_actions > 0 && cfg.horizon > 0,
          "random-tabular: sizes must be positive");
  require(cfg.reward_sparsity >= 0.0 && cfg.reward_sparsity <= 1.0,
          "random-tabular: sparsity must lie in [0,1]");
  require(cfg.dirichlet_alpha > 0.0, "random-tabular: dirichlet alpha must be positive");
  const int S = cfg.n_states, A = cfg.n_actions, H = cfg.horizon;
  Rng rng(cfg.seed);
  std::vector<std::vector<Outcome>> rows(static_cast<std::size_t>(H) * S * A);
  std::vector<double> rewards(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto p = dirichlet(S, cfg.dirichlet_alpha, rng);
    for (int s2 = 0; s2 < S; ++s2) rows[i].push_back({s2, p[s2]});
    // Renormalise against round-off so the 1e-9 row check always holds.
    double total = 0.0;
    for (const auto& o : rows[i]) total += o.prob;
    for (auto& o : rows[i]) o.prob /= total;
    const double r = uniform01(rng);
    const bool zeroed = uniform01(rng) < cfg.reward_sparsity;
    rewards[i] = zeroed ? 0.0 : r;
  }
  return TabularMdp(S, A, H, std::move(rows), std::move(rewards), 0);
}

LinearMdp make_random_linear(const EnvConfig& cfg) {
  const int S = cfg.n_states, A = cfg.n_actions, H = cfg.horizon, d = cfg.dim;
  require(S > 0 && A > 0 && H > 0 && d > 0, "random-linear: sizes must be positive");
  require(d <= S * A, "random-linear: need d <= S*A");
  require(cfg.dirichlet_alpha > 0.0, "random-linear: dirichlet alpha must be positive");
  Rng rng(cfg.seed);

  std::vector<Eigen::VectorXd> features;
  features.reserve(static_cast<std::size_t>(H) * S * A);
  for (std::size_t i = 0; i < static_cast<std::size_t>(H) * S * A; ++i) {
    const auto w = dirichlet(d, cfg.dirichlet_alpha, rng);
    Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(w.data(), d);
    // Projection onto the simplex: clamp at zero and renormalise.
    phi = phi.cwiseMax(0.0);
    const double mass = phi.sum();
    require(mass > 0.0, "random-linear: feature normalisation failed");
    features.push_back(phi / mass);
  }

  std::vector<std::vector<Outcome>> rows(features.size());
  std::vector<double> rewards(features.size());
  for (int h = 0; h < H; ++h) {
    // mu_h: d distributions over next states; theta_h in [0,1]^d.
    std::vector<std::vector<double>> mu(d);
    for (int k = 0; k < d; ++k) mu[k] = dirichlet(S, cfg.dirichlet_alpha, rng);
    Eigen::VectorXd theta(d);
    for (int k = 0; k < d; ++k) {
      const double r = uniform01(rng);
      theta[k] = uniform01(rng) < cfg.reward_sparsity ? 0.0 : r;
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::size_t i = (static_cast<std::size_t>(h) * S + s) * A + a;
        const Eigen::VectorXd& phi = features[i];
        std::vector<double> p(S, 0.0);
        double total = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          for (int k = 0; k < d; ++k) p[s2] += phi[k] * mu[k][s2];
          total += p[s2];
        }
        require(std::abs(total - 1.0) < 1e-6, "random-linear: transition normalisation failed");
        for (int s2 = 0; s2 < S; ++s2) rows[i].push_back({s2, p[s2] / total});
        rewards[i] = std::clamp(phi.dot(theta), 0.0, 1.0);
      }
    }
  }
  TabularMdp mdp(S, A, H, std::move(rows), std::move(rewards), 0);
  FeatureMap fmap(S, A, H, d, std::move(features));
  return LinearMdp(std::move(mdp), std::move(fmap));
}

std::size_t tetris_state_count(const EnvConfig& cfg) {
  std::size_t profiles = 1;
  for (int c = 0; c < cfg.board_width; ++c) {
    profiles *= static_cast<std::size_t>(cfg.height_cap + 1);
    if (profiles > cfg.max_states * 16) break;
  }
  return profiles * cfg.pieces.size();
}

LinearMdp make_tetris(const EnvConfig& cfg) {
  const int W = cfg.board_width, C = cfg.height_cap, H = cfg.horizon;
  require(W >= 3 && W <= 6, "tetris: board width must lie in [3,6]");
  require(C >= 3 && C <= 6, "tetris: height cap must lie in [3,6]");
  require(H > 0, "tetris: horizon must be positive");
  require(!cfg.pieces.empty(), "tetris: need at least one piece");
  const std::size_t n_states = tetris_state_count(cfg);
  require(n_states <= cfg.max_states,
          "tetris: " + std::to_string(n_states) + " states exceeds the cap of " +
              std::to_string(cfg.max_states));

  const int P = static_cast<int>(cfg.pieces.size());
  std::vector<std::vector<std::vector<int>>> shapes;
  std::size_t max_rotations = 1;
  for (TetrisPiece p : cfg.pieces) {
    shapes.push_back(piece_rotations(p));
    max_rotations = std::max(max_rotations, shapes.back().size());
  }
  const int S = static_cast<int>(n_states);
  const int A = static_cast<int>(max_rotations) * W;
  const int n_profiles = S / P;

  auto decode = [&](int profile) {
    std::vector<int> heights(W);
    for (int c = 0; c < W; ++c) {
      heights[c] = profile % (C + 1);
      profile /= C + 1;
    }
    return heights;
  };
  auto encode = [&](const std::vector<int>& heights) {
    int profile = 0;
    for (int c = W - 1; c >= 0; --c) profile = profile * (C + 1) + heights[c];
    return profile;
  };

  // Afterstate of placing piece `piece` with `action` on `heights`; returns rows cleared,
  // or -1 when the placement overflows the cap (piece discarded, board unchanged).
  auto place = [&](std::vector<int>& heights, int piece, int action) {
    const auto& rotations = shapes[piece];
    const auto& stack = rotations[static_cast<std::size_t>(action / W) % rotations.size()];
    const int width = static_cast<int>(stack.size());
    const int col = std::min(action % W, W - width);
    int base = 0;
    for (int k = 0; k < width; ++k) base = std::max(base, heights[col + k]);
    std::vector<int> next = heights;
    for (int k = 0; k < width; ++k) next[col + k] = base + stack[k];
    const int cleared = *std::min_element(next.begin(), next.end());
    for (int& v : next) v -= cleared;
    if (*std::max_element(next.begin(), next.end()) > C) return -1;
    heights = std::move(next);
    return cleared;
  };

  const int d = W * C + P + 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<std::vector<Outcome>> rows(static_cast<std::size_t>(H) * S * A);
  std::vector<double> rewards(rows.size(), 0.0);
  std::vector<Eigen::VectorXd> features(rows.size());

  // Dynamics are stationary; build one step and replicate across h.
  std::vector<std::vector<Outcome>> step_rows(static_cast<std::size_t>(S) * A);
  std::vector<double> step_rewards(step_rows.size());
  std::vector<Eigen::VectorXd> step_features(step_rows.size());
  for (int profile = 0; profile < n_profiles; ++profile) {
    const std::vector<int> heights = decode(profile);
    for (int piece = 0; piece < P; ++piece) {
      const int s = profile * P + piece;
      for (int a = 0; a < A; ++a) {
        std::vector<int> after = heights;
        const int cleared = place(after, piece, a);
        const double rows_cleared = cleared > 0 ? static_cast<double>(cleared) : 0.0;
        const std::size_t i = static_cast<std::size_t>(s) * A + a;
        step_rewards[i] = rows_cleared / C;
        const int after_profile = encode(after);
        for (int next_piece = 0; next_piece < P; ++next_piece)
          step_rows[i].push_back({after_profile * P + next_piece, 1.0 / P});

        Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
        // Each column height as C threshold indicators [height >= k].
        for (int c = 0; c < W; ++c)
          for (int k = 0; k < after[c]; ++k) phi[c * C + k] = 1.0;
        phi[W * C + piece] = 1.0;
        phi[W * C + P] = rows_cleared / C;
        phi[W * C + P + 1] = 1.0;
        step_features[i] = scale * phi;
      }
    }
  }
  for (int h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < step_rows.size(); ++i) {
      const std::size_t j = static_cast<std::size_t>(h) * step_rows.size() + i;
      rows[j] = step_rows[i];
      rewards[j] = step_rewards[i];
      features[j] = step_features[i];
    }
  }
  const int initial = static_cast<int>(cfg.seed % static_cast<std::uint64_t>(P));
  TabularMdp mdp(S, A, H, std::move(rows), std::move(rewards), initial);
  FeatureMap fmap(S, A, H, d, std::move(features));
  return LinearMdp(std::move(mdp), std::move(fmap));
}

EnvConfig preset_config(const std::string& name) {
  EnvConfig cfg;
  if (name == "chain-5") {
    cfg.kind = EnvKind::Chain;
    cfg.n_states = 5;
    cfg.n_actions = 2;
    cfg.horizon = 8;
    cfg.slip = 0.15;
  } else if (name == "random-tab") {
    cfg.kind = EnvKind::RandomTabular;
    cfg.n_states = 4;
    cfg.n_actions = 2;
    cfg.horizon = 3;
  } else if (name == "random-lin") {
    cfg.kind = EnvKind::RandomLinear;
    cfg.n_states = 6;
    cfg.n_actions = 3;
    cfg.horizon = 4;
    cfg.dim = 4;
    cfg.seed = 7;
  } else if (name == "tetris-small") {
    cfg.kind = EnvKind::Tetris;
    cfg.board_width = 4;
    cfg.height_cap = 3;
    cfg.horizon = 6;
    cfg.pieces = {TetrisPiece::Mono, TetrisPiece::Domino};
  } else {
    throw std::invalid_argument("unknown env preset '" + name + "'");
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"chain-5", "random-tab", "random-lin", "tetris-small"};
}

Environment make_environment(const EnvConfig& cfg, std::string name) {
  if (name.empty()) name = to_string(cfg.kind);
  switch (cfg.kind) {
    case EnvKind::Chain:
      return Environment::tabular(std::move(name), make_chain(cfg.n_states, cfg.horizon, cfg.slip));
    case EnvKind::RandomTabular:
      return Environment::tabular(std::move(name), make_random_tabular(cfg));
    case EnvKind::RandomLinear:
      return Environment::linear(std::move(name), make_random_linear(cfg));
    case EnvKind::Tetris:
      return Environment::linear(std::move(name), make_tetris(cfg));
  }
  throw std::invalid_argument("unknown env kind");
}

EnvConfig env_config_from_json(const nlohmann::json& doc) {
  try {
    EnvConfig cfg = doc.contains("preset") ? preset_config(doc.at("preset").get<std::string>())
                                           : EnvConfig{};
    if (doc.contains("kind")) cfg.kind = kind_from_string(doc.at("kind").get<std::string>());
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.n_states = doc.value("n_states", cfg.n_states);
    cfg.n_actions = doc.value("n_actions", cfg.n_actions);
    cfg.horizon = doc.value("horizon", cfg.horizon);
    cfg.dim = doc.value("dim", cfg.dim);
    cfg.reward_sparsity = doc.value("reward_sparsity", cfg.reward_sparsity);
    cfg.dirichlet_alpha = doc.value("dirichlet_alpha", cfg.dirichlet_alpha);
    cfg.slip = doc.value("slip", cfg.slip);
    cfg.board_width = doc.value("board_width", cfg.board_width);
    cfg.height_cap = doc.value("height_cap", cfg.height_cap);
    cfg.max_states = doc.value("max_states", cfg.max_states);
    if (doc.contains("pieces")) {
      cfg.pieces.clear();
      for (const auto& p : doc.at("pieces")) cfg.pieces.push_back(piece_from_string(p.get<std::string>()));
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("env config: ") + e.what());
  }
}

Environment environment_from_config(const nlohmann::json& doc) {
  if (doc.contains("file")) return load_environment(doc.at("file").get<std::string>());
  const std::string name = doc.value("preset", std::string{});
  return make_environment(env_config_from_json(doc), name);
}

}  // namespace acbench
