#include "acbench/offline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "acbench/oracle.hpp"
#include "acbench/rng.hpp"

namespace acbench {

std::size_t OfflineDataset::n_samples() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.size();
  return n;
}

OfflineDataset empty_offline(int horizon) {
  OfflineDataset d;
  d.steps = make_buffers(horizon);
  return d;
}

OfflineDataset generate_offline(const TabularMdp& mdp, const SoftmaxPolicy& behavior,
                                int n_episodes, std::uint64_t seed, std::string behavior_name,
                                double mix_weight) {
  if (n_episodes < 0) throw std::invalid_argument("offline: episode count must be >= 0");
  OfflineDataset d = empty_offline(mdp.horizon());
  d.behavior = std::move(behavior_name);
  d.mix_weight = mix_weight;
  d.n_episodes = n_episodes;
  d.seed = seed;
  Rng rng(seed);
  for (int e = 0; e < n_episodes; ++e) append_trajectory(d.steps, sample_episode(mdp, behavior, rng, e));
  return d;
}

SoftmaxPolicy mix_with_uniform(const SoftmaxPolicy& base, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw std::invalid_argument("offline: mix weight in [0,1]");
  const int S = base.n_states(), A = base.n_actions(), H = base.horizon();
  std::vector<double> probs(static_cast<std::size_t>(H) * S * A);
  std::vector<double> p(A);
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      base.action_probs(h, s, p);
      for (int a = 0; a < A; ++a)
        probs[(static_cast<std::size_t>(h) * S + s) * A + a] = weight * p[a] + (1.0 - weight) / A;
    }
  }
  return SoftmaxPolicy::from_probabilities(S, A, H, probs);
}

SoftmaxPolicy optimal_policy(const TabularMdp& mdp) {
  return greedy_policy(critic_from_values(dp_solve_optimal(mdp)));
}

OfflineSpec offline_spec_from_json(const nlohmann::json& doc) {
  OfflineSpec spec;
  try {
    spec.behavior = doc.value("behavior", spec.behavior);
    spec.mix = doc.value("mix", spec.mix);
    spec.samples = doc.value("samples", spec.samples);
    spec.seed = doc.value("seed", spec.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("offline config: ") + e.what());
  }
  if (spec.behavior != "optimal" && spec.behavior != "uniform")
    throw std::invalid_argument("offline config: behavior must be 'optimal' or 'uniform'");
  if (spec.samples < 0) throw std::invalid_argument("offline config: samples must be >= 0");
  return spec;
}

OfflineDataset generate_offline(const TabularMdp& mdp, const OfflineSpec& spec) {
  const int episodes = spec.samples / mdp.horizon();
  if (spec.behavior == "uniform") {
    const auto uniform = SoftmaxPolicy::uniform(mdp.n_states(), mdp.n_actions(), mdp.horizon(), 0.0);
    return generate_offline(mdp, uniform, episodes, spec.seed, "uniform", 1.0);
  }
  return generate_offline(mdp, mix_with_uniform(optimal_policy(mdp), spec.mix), episodes,
                          spec.seed, "optimal", spec.mix);
}

ConcentrabilityReport estimate_concentrability(const OfflineDataset& offline,
                                               const TabularMdp& mdp) {
  if (offline.horizon() != mdp.horizon())
    throw std::invalid_argument("concentrability: horizon mismatch");
  const int S = mdp.n_states(), A = mdp.n_actions(), H = mdp.horizon();
  const std::vector<double> d_star = occupancy_measures(mdp, optimal_policy(mdp));
  constexpr double kInf = std::numeric_limits<double>::infinity();
  ConcentrabilityReport out;
  out.per_step.assign(H, 0.0);
  for (int h = 0; h < H; ++h) {
    const auto& cells = offline.steps[h].cells();
    const double total = static_cast<double>(offline.steps[h].size());
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double d = d_star[mdp.index(h, s, a)];
        if (d <= 0.0) continue;
        const auto it = cells.find({s, a});
        const double mu = (it == cells.end() || total == 0.0) ? 0.0 : it->second.count / total;
        out.per_step[h] = std::max(out.per_step[h], mu > 0.0 ? d / mu : kInf);
      }
    }
    out.ratio = std::max(out.ratio, out.per_step[h]);
  }
  return out;
}

void validate_offline(const OfflineDataset& offline, const TabularMdp& mdp) {
  if (offline.horizon() != mdp.horizon()) throw std::invalid_argument("offline: horizon mismatch");
  for (const auto& step : offline.steps) {
    for (const Transition& t : step.transitions()) {
      const int h = t.step;
      if (t.state < 0 || t.state >= mdp.n_states() || t.action < 0 || t.action >= mdp.n_actions())
        throw std::invalid_argument("offline: index out of range");
      if (std::abs(t.reward - mdp.reward(h, t.state, t.action)) > 1e-9)
        throw std::invalid_argument("offline: reward inconsistent with the MDP");
      const bool last = h + 1 == mdp.horizon();
      if (last ? t.next_state != kTerminalState
               : (t.next_state < 0 || t.next_state >= mdp.n_states() ||
                  mdp.prob(h, t.state, t.action, t.next_state) <= 0.0))
        throw std::invalid_argument("offline: transition impossible under the MDP");
    }
  }
}

void save_offline(const OfflineDataset& offline, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  std::ofstream csv(base / "offline.csv");
  if (!csv) throw std::runtime_error("offline: cannot write " + (base / "offline.csv").string());
  csv << "h,s,a,r,s_next\n";
  csv.precision(17);
  for (const auto& step : offline.steps)
    for (const Transition& t : step.transitions())
      csv << t.step << ',' << t.state << ',' << t.action << ',' << t.reward << ',' << t.next_state
          << '\n';
  nlohmann::json side;
  side["seed"] = offline.seed;
  side["behavior"] = offline.behavior;
  side["mix"] = offline.mix_weight;
  side["n_off"] = offline.n_samples();
  side["n_episodes"] = offline.n_episodes;
  side["horizon"] = offline.horizon();
  std::ofstream js(base / "offline.json");
  if (!js) throw std::runtime_error("offline: cannot write sidecar");
  js << side.dump(2) << '\n';
}

OfflineDataset load_offline(const std::string& csv_path, int horizon) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("offline: cannot open " + csv_path);
  OfflineDataset d = empty_offline(horizon);
  std::string line;
  if (!std::getline(in, line) || line.rfind("h,s,a,r,s_next", 0) != 0)
    throw std::invalid_argument("offline: missing header h,s,a,r,s_next");
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Transition t{};
    char c1, c2, c3, c4;
    if (!(ss >> t.step >> c1 >> t.state >> c2 >> t.action >> c3 >> t.reward >> c4 >> t.next_state) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
      throw std::invalid_argument("offline: malformed row " + std::to_string(row));
    if (t.step < 0 || t.step >= horizon)
      throw std::invalid_argument("offline: step out of range on row " + std::to_string(row));
    d.steps[t.step].append(t);
  }
  d.n_episodes = horizon > 0 ? static_cast<int>(d.steps[0].size()) : 0;
  d.behavior = "file";
  std::filesystem::path side = std::filesystem::path(csv_path).replace_extension(".json");
  if (std::ifstream js(side); js) {
    try {
      const auto doc = nlohmann::json::parse(js);
      d.seed = doc.value("seed", std::uint64_t{0});
      d.behavior = doc.value("behavior", d.behavior);
      d.mix_weight = doc.value("mix", 0.0);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("offline sidecar: ") + e.what());
    }
  }
  return d;
}

}  // namespace acbench
