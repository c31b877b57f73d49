#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "acbench/approx.hpp"
#include "acbench/mdp.hpp"
#include "acbench/policy.hpp"

namespace acbench {

/// Full trajectories rolled out under a behavior policy, stored per step in the
/// same format as online data.
struct OfflineDataset {
  Buffers steps;
  std::string behavior = "none";
  double mix_weight = 0.0;  // weight on `behavior`; the rest is uniform
  int n_episodes = 0;
  std::uint64_t seed = 0;

  std::size_t n_samples() const;
  int horizon() const { return static_cast<int>(steps.size()); }
};

OfflineDataset empty_offline(int horizon);

OfflineDataset generate_offline(const TabularMdp& mdp, const SoftmaxPolicy& behavior,
                                int n_episodes, std::uint64_t seed,
                                std::string behavior_name = "custom", double mix_weight = 1.0);

/// w * base + (1 - w) * uniform, as an explicit probability table.
SoftmaxPolicy mix_with_uniform(const SoftmaxPolicy& base, double weight);

/// Greedy policy of the exact Q*.
SoftmaxPolicy optimal_policy(const TabularMdp& mdp);

/// Behavior description used by configs: {"behavior": "optimal" | "uniform",
/// "mix": w, "samples": n, "seed": k}. Samples are transitions, so the dataset
/// holds samples / H episodes.
struct OfflineSpec {
  std::string behavior = "optimal";
  double mix = 0.5;
  int samples = 10000;
  std::uint64_t seed = 1;
};
OfflineSpec offline_spec_from_json(const nlohmann::json& doc);
OfflineDataset generate_offline(const TabularMdp& mdp, const OfflineSpec& spec);

/// Occupancy-ratio proxy for the single-policy concentrability coefficient:
/// max_h max over optimal-support (s,a) of d^{pi*}_h(s,a) / mu_h(s,a), with mu
/// the empirical offline occupancy. +inf when an optimal-support cell is unseen.
struct ConcentrabilityReport {
  double ratio = 0.0;
  std::vector<double> per_step;
  std::string method = "occupancy ratio d^pi*/mu over optimal-support cells";
};
ConcentrabilityReport estimate_concentrability(const OfflineDataset& offline,
                                               const TabularMdp& mdp);

/// Throws std::invalid_argument on transitions the MDP cannot produce.
void validate_offline(const OfflineDataset& offline, const TabularMdp& mdp);

/// `<dir>/offline.csv` (h,s,a,r,s_next; 0-based steps, s_next = -1 at the
/// last step) plus `<dir>/offline.json` with seed, behavior, mix and counts.
void save_offline(const OfflineDataset& offline, const std::string& dir);
/// Reads the CSV; the sidecar next to it (same stem, .json) is optional.
OfflineDataset load_offline(const std::string& csv_path, int horizon);

}  // namespace acbench
