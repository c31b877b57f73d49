#include "acbench/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace acbench {

namespace {

constexpr double kRowTolerance = 1e-9;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

TabularMdp::TabularMdp(int n_states, int n_actions, int horizon,
                       std::vector<std::vector<Outcome>> transitions,
                       std::vector<double> rewards, int initial_state)
    : n_states_(n_states),
      n_actions_(n_actions),
      horizon_(horizon),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      initial_state_(initial_state) {
  require(n_states_ > 0 && n_actions_ > 0 && horizon_ > 0,
          "mdp: S, A and H must be positive");
  require(initial_state_ >= 0 && initial_state_ < n_states_,
          "mdp: initial state out of range");
  require(transitions_.size() == n_cells(), "mdp: transition table has wrong size");
  require(rewards_.size() == n_cells(), "mdp: reward table has wrong size");

  for (std::size_t i = 0; i < n_cells(); ++i) {
    const double r = rewards_[i];
    require(std::isfinite(r) && r >= 0.0 && r <= 1.0,
            "mdp: reward outside [0,1] at cell " + std::to_string(i));

    // Merge duplicate successors and drop zero-mass entries.
    std::map<int, double> merged;
    for (const Outcome& o : transitions_[i]) {
      require(o.next_state >= 0 && o.next_state < n_states_,
              "mdp: successor out of range at cell " + std::to_string(i));
      require(std::isfinite(o.prob) && o.prob >= 0.0,
              "mdp: negative probability at cell " + std::to_string(i));
      merged[o.next_state] += o.prob;
    }
    double total = 0.0;
    std::vector<Outcome> row;
    for (const auto& [s2, p] : merged) {
      total += p;
      if (p > 0.0) row.push_back({s2, p});
    }
    require(std::abs(total - 1.0) <= kRowTolerance,
            "mdp: transition row does not sum to 1 at cell " + std::to_string(i));
    transitions_[i] = std::move(row);
  }
}

TabularMdp TabularMdp::from_dense(int n_states, int n_actions, int horizon,
                                  const std::vector<double>& transitions,
                                  std::vector<double> rewards, int initial_state) {
  const std::size_t cells = static_cast<std::size_t>(horizon) * n_states * n_actions;
  require(transitions.size() == cells * static_cast<std::size_t>(n_states),
          "mdp: dense transition table has wrong size");
  std::vector<std::vector<Outcome>> rows(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    for (int s2 = 0; s2 < n_states; ++s2) {
      const double p = transitions[c * n_states + s2];
      if (p != 0.0) rows[c].push_back({s2, p});
    }
  }
  return TabularMdp(n_states, n_actions, horizon, std::move(rows), std::move(rewards),
                    initial_state);
}

double TabularMdp::prob(int h, int s, int a, int next_state) const {
  for (const Outcome& o : next(h, s, a)) {
    if (o.next_state == next_state) return o.prob;
  }
  return 0.0;
}

bool TabularMdp::operator==(const TabularMdp& other) const {
  if (n_states_ != other.n_states_ || n_actions_ != other.n_actions_ ||
      horizon_ != other.horizon_ || initial_state_ != other.initial_state_ ||
      rewards_ != other.rewards_)
    return false;
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    const auto& x = transitions_[i];
    const auto& y = other.transitions_[i];
    if (x.size() != y.size()) return false;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k].next_state != y[k].next_state || x[k].prob != y[k].prob) return false;
    }
  }
  return true;
}

FeatureMap::FeatureMap(int n_states, int n_actions, int horizon, int dim,
                       std::vector<Eigen::VectorXd> rows)
    : n_states_(n_states), n_actions_(n_actions), horizon_(horizon), dim_(dim),
      rows_(std::move(rows)) {
  require(dim_ > 0, "features: dimension must be positive");
  require(rows_.size() == static_cast<std::size_t>(horizon) * n_states * n_actions,
          "features: one row per (h,s,a) required");
  for (const auto& row : rows_) {
    require(row.size() == dim_, "features: inconsistent dimension");
    require(row.allFinite(), "features: non-finite entry");
  }
}

FeatureMap FeatureMap::one_hot(int n_states, int n_actions, int horizon) {
  const int d = n_states * n_actions;
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(static_cast<std::size_t>(horizon) * d);
  for (int h = 0; h < horizon; ++h) {
    for (int k = 0; k < d; ++k) rows.push_back(Eigen::VectorXd::Unit(d, k));
  }
  return FeatureMap(n_states, n_actions, horizon, d, std::move(rows));
}

double FeatureMap::max_norm() const {
  double m = 0.0;
  for (const auto& row : rows_) m = std::max(m, row.norm());
  return m;
}

LinearMdp::LinearMdp(TabularMdp underlying_mdp, FeatureMap feature_map)
    : underlying(std::move(underlying_mdp)), features(std::move(feature_map)) {
  require(features.n_states() == underlying.n_states() &&
              features.n_actions() == underlying.n_actions() &&
              features.horizon() == underlying.horizon(),
          "linear mdp: feature table shape does not match the mdp");
  require(features.max_norm() <= 1.0 + 1e-9, "linear mdp: feature norm exceeds 1");
}

Environment Environment::tabular(std::string name, TabularMdp mdp) {
  return Environment{std::move(name), std::move(mdp), std::nullopt};
}

Environment Environment::linear(std::string name, LinearMdp lin) {
  return Environment{std::move(name), std::move(lin.underlying), std::move(lin.features)};
}

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& tr : transitions) total += tr.reward;
  return total;
}

Environment environment_from_json(const nlohmann::json& doc, std::string name) {
  try {
    const int S = doc.at("n_states").get<int>();
    const int A = doc.at("n_actions").get<int>();
    const int H = doc.at("horizon").get<int>();
    require(S > 0 && A > 0 && H > 0, "mdp json: sizes must be positive");
    const auto& P = doc.at("transitions");
    const auto& R = doc.at("rewards");
    require(P.size() == static_cast<std::size_t>(H) && R.size() == static_cast<std::size_t>(H),
            "mdp json: transitions/rewards need one entry per step");

    std::vector<double> dense;
    std::vector<double> rewards;
    dense.reserve(static_cast<std::size_t>(H) * S * A * S);
    for (int h = 0; h < H; ++h) {
      require(P[h].size() == static_cast<std::size_t>(S) && R[h].size() == static_cast<std::size_t>(S),
              "mdp json: wrong number of states at step " + std::to_string(h));
      for (int s = 0; s < S; ++s) {
        require(P[h][s].size() == static_cast<std::size_t>(A) &&
                    R[h][s].size() == static_cast<std::size_t>(A),
                "mdp json: wrong number of actions");
        for (int a = 0; a < A; ++a) {
          const auto& row = P[h][s][a];
          require(row.size() == static_cast<std::size_t>(S), "mdp json: transition row length");
          for (int s2 = 0; s2 < S; ++s2) dense.push_back(row[s2].get<double>());
          rewards.push_back(R[h][s][a].get<double>());
        }
      }
    }
    TabularMdp mdp = TabularMdp::from_dense(S, A, H, dense, std::move(rewards),
                                            doc.value("initial_state", 0));
    if (!doc.contains("features")) return Environment::tabular(std::move(name), std::move(mdp));

    const auto& F = doc.at("features");
    std::vector<Eigen::VectorXd> rows;
    int dim = -1;
    require(F.size() == static_cast<std::size_t>(H), "mdp json: features need one entry per step");
    for (int h = 0; h < H; ++h) {
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          const auto& v = F.at(h).at(s).at(a);
          if (dim < 0) dim = static_cast<int>(v.size());
          require(static_cast<int>(v.size()) == dim, "mdp json: inconsistent feature dimension");
          Eigen::VectorXd row(dim);
          for (int k = 0; k < dim; ++k) row[k] = v[k].get<double>();
          rows.push_back(std::move(row));
        }
      }
    }
    FeatureMap features(S, A, H, dim, std::move(rows));
    return Environment::linear(std::move(name), LinearMdp(std::move(mdp), std::move(features)));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("mdp json: ") + e.what());
  }
}

Environment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mdp file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("mdp file " + path + ": " + e.what());
  }
  return environment_from_json(doc, path);
}

nlohmann::json environment_to_json(const Environment& env) {
  const TabularMdp& m = env.mdp;
  const int S = m.n_states(), A = m.n_actions(), H = m.horizon();
  nlohmann::json doc;
  doc["n_states"] = S;
  doc["n_actions"] = A;
  doc["horizon"] = H;
  doc["initial_state"] = m.initial_state();
  auto& P = doc["transitions"] = nlohmann::json::array();
  auto& R = doc["rewards"] = nlohmann::json::array();
  for (int h = 0; h < H; ++h) {
    nlohmann::json ph = nlohmann::json::array(), rh = nlohmann::json::array();
    for (int s = 0; s < S; ++s) {
      nlohmann::json ps = nlohmann::json::array(), rs = nlohmann::json::array();
      for (int a = 0; a < A; ++a) {
        std::vector<double> row(S, 0.0);
        for (const Outcome& o : m.next(h, s, a)) row[o.next_state] = o.prob;
        ps.push_back(row);
        rs.push_back(m.reward(h, s, a));
      }
      ph.push_back(std::move(ps));
      rh.push_back(std::move(rs));
    }
    P.push_back(std::move(ph));
    R.push_back(std::move(rh));
  }
  if (env.features) {
    auto& F = doc["features"] = nlohmann::json::array();
    for (int h = 0; h < H; ++h) {
      nlohmann::json fh = nlohmann::json::array();
      for (int s = 0; s < S; ++s) {
        nlohmann::json fs = nlohmann::json::array();
        for (int a = 0; a < A; ++a) {
          const auto& phi = (*env.features)(h, s, a);
          fs.push_back(std::vector<double>(phi.data(), phi.data() + phi.size()));
        }
        fh.push_back(std::move(fs));
      }
      F.push_back(std::move(fh));
    }
  }
  return doc;
}

}  // namespace acbench
