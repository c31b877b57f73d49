#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "acbench/algorithms.hpp"
#include "acbench/envs.hpp"
#include "acbench/offline.hpp"
#include "acbench/oracle.hpp"
#include "oracles.hpp"

using namespace acbench;

namespace {

Environment chain_env(double slip = 0.0) {
  EnvConfig cfg = preset_config("chain-5");
  cfg.slip = slip;
  return make_environment(cfg, "chain-5");
}

Environment zero_reward_env(std::uint64_t seed) {
  EnvConfig cfg = preset_config("random-tab");
  cfg.seed = seed;
  cfg.n_states = 4;
  cfg.n_actions = 3;
  cfg.horizon = 4;
  cfg.reward_sparsity = 1.0;
  return make_environment(cfg, "zero");
}

Environment small_linear_env(std::uint64_t seed) {
  EnvConfig cfg = preset_config("random-lin");
  cfg.seed = seed;
  cfg.n_states = 6;
  cfg.n_actions = 3;
  cfg.horizon = 4;
  cfg.dim = 3;
  return make_environment(cfg, "lin");
}

AlgoConfig config(Algo algo, int episodes, std::uint64_t seed = 0) {
  AlgoConfig cfg;
  cfg.algo = algo;
  cfg.episodes = episodes;
  cfg.seed = seed;
  return cfg;
}

const Algo kAll[] = {Algo::Douhua,   Algo::Nora,       Algo::NoraPi,    Algo::NoahPi,
                     Algo::NoahStar, Algo::HybridNora, Algo::LsviUcbRs};

RunResult run_any(const Environment& env, AlgoConfig cfg) {
  if (needs_offline(cfg.algo)) cfg.allow_empty_offline = true;
  return run_algorithm(env, cfg);
}

double mean_final(const Environment& env, AlgoConfig cfg, int seeds,
                  const OfflineDataset* offline = nullptr) {
  double total = 0.0;
  for (int k = 0; k < seeds; ++k) {
    cfg.seed = static_cast<std::uint64_t>(k);
    total += run_algorithm(env, cfg, offline).final_regret();
  }
  return total / seeds;
}

double mean_switches(const Environment& env, AlgoConfig cfg, int seeds,
                     const OfflineDataset* offline = nullptr) {
  double total = 0.0;
  for (int k = 0; k < seeds; ++k) {
    cfg.seed = static_cast<std::uint64_t>(k);
    total += run_algorithm(env, cfg, offline).switches();
  }
  return total / seeds;
}

bool same_trajectory(const RunResult& a, const RunResult& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto &x = a.records[i], &y = b.records[i];
    if (x.reward != y.reward || x.regret != y.regret || x.switched != y.switched) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("names round trip and unknown names are rejected") {
  for (Algo a : kAll) CHECK(algo_from_string(to_string(a)) == a);
  CHECK_THROWS_AS(algo_from_string("ppo"), std::invalid_argument);
  for (SwitchRule r : {SwitchRule::TdGap, SwitchRule::DetDoubling, SwitchRule::Never})
    CHECK(switch_rule_from_string(to_string(r)) == r);
  CHECK(needs_offline(Algo::NoahPi));
  CHECK(needs_offline(Algo::NoahStar));
  CHECK(needs_offline(Algo::HybridNora));
  CHECK_FALSE(needs_offline(Algo::Nora));
}

TEST_CASE("default learning rates") {
  CHECK(default_eta(Algo::Douhua, 2, 8, 100, 0, 1.0) ==
        doctest::Approx(std::sqrt(std::log(2.0) / (64.0 * 100.0))));
  CHECK(default_eta(Algo::NoahPi, 4, 2, 10, 0, 3.0) ==
        doctest::Approx(3.0 * std::sqrt(std::log(4.0) / 40.0)));
  CHECK(default_eta(Algo::Nora, 2, 8, 100, 10, 1.0) ==
        doctest::Approx(std::sqrt(10.0 * std::log(100.0) * std::log(2.0) / 800.0)));
}

TEST_CASE("first episode of douhua plays the uniform policy") {
  const Environment env = chain_env();
  const RunResult r = run_algorithm(env, config(Algo::Douhua, 1));
  REQUIRE(r.records.size() == 1);
  const SoftmaxPolicy uniform = SoftmaxPolicy::uniform(5, 2, 8, 0.0);
  CHECK(r.records[0].regret == doctest::Approx(r.v_star - oracle::path_value(env.mdp, uniform)));
  CHECK(r.v_star == doctest::Approx(8 - 5 + 2));
  CHECK(r.v_uniform == doctest::Approx(oracle::path_value(env.mdp, uniform)));
}

TEST_CASE("zero-reward environment gives zero regret for every algorithm") {
  for (std::uint64_t seed : {1u, 2u}) {
    const Environment env = zero_reward_env(seed);
    for (Algo a : kAll) {
      CAPTURE(to_string(a));
      const RunResult r = run_any(env, config(a, 30, seed));
      CHECK(r.v_star == 0.0);
      for (const auto& rec : r.records) {
        CHECK(std::abs(rec.regret) <= 1e-12);
        CHECK(rec.reward == 0.0);
      }
    }
  }
}

TEST_CASE("runs are deterministic given the seed") {
  const Environment tab = chain_env(0.15);
  const Environment lin = small_linear_env(3);
  for (Algo a : kAll) {
    CAPTURE(to_string(a));
    CHECK(same_trajectory(run_any(tab, config(a, 200, 7)), run_any(tab, config(a, 200, 7))));
    CHECK(same_trajectory(run_any(lin, config(a, 60, 7)), run_any(lin, config(a, 60, 7))));
  }
  CHECK_FALSE(same_trajectory(run_any(tab, config(Algo::Nora, 200, 7)),
                              run_any(tab, config(Algo::Nora, 200, 8))));
}

TEST_CASE("per-episode invariants across algorithms and environments") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    const bool linear = trial % 2 == 1;
    const Environment env = linear ? small_linear_env(rng()) : [&] {
      EnvConfig cfg = preset_config("random-tab");
      cfg.seed = rng();
      cfg.n_states = 3 + static_cast<int>(rng() % 3);
      cfg.n_actions = 2 + static_cast<int>(rng() % 2);
      cfg.horizon = 2 + static_cast<int>(rng() % 3);
      return make_environment(cfg, "rt");
    }();
    const double H = env.mdp.horizon();
    for (Algo a : kAll) {
      CAPTURE(to_string(a));
      AlgoConfig cfg = config(a, 80, rng());
      cfg.snapshot_every = 1;
      const RunResult r = run_any(env, cfg);
      REQUIRE(r.records.size() == 80);
      double prev = 0.0;
      int prev_switches = 0;
      for (const auto& rec : r.records) {
        CHECK(rec.regret >= -1e-9);
        CHECK(rec.regret <= r.v_star + 1e-9);
        CHECK(rec.regret <= H + 1e-9);
        CHECK(rec.cum_regret >= prev - 1e-12);
        CHECK(rec.cum_switches >= prev_switches);
        CHECK(rec.reset <= rec.switched);
        prev = rec.cum_regret;
        prev_switches = rec.cum_switches;
      }
      REQUIRE(r.snapshots.size() == 80);
      int resets = 0;
      for (const auto& rec : r.records) resets += rec.reset ? 1 : 0;
      CHECK(resets == r.resets);
      switch (a) {
        case Algo::Douhua:
        case Algo::NoahPi:
          CHECK(r.switches() == 0);
          CHECK(r.resets == 0);
          CHECK(r.refits == 80);
          break;
        case Algo::Nora:
          CHECK(r.refits == r.switches());
          CHECK(r.resets == r.switches());
          break;
        case Algo::NoraPi:
        case Algo::NoahStar:
        case Algo::HybridNora:
        case Algo::LsviUcbRs:
          CHECK(r.refits == r.switches());
          break;
      }
      if (a != Algo::Douhua && a != Algo::NoahPi) {
        // The critic only moves when a switch is recorded.
        for (std::size_t i = 1; i < r.snapshots.size(); ++i) {
          const bool moved = !r.snapshots[i].critic.same_parameters(r.snapshots[i - 1].critic);
          if (moved) CHECK(r.records[i - 1].switched);
        }
      }
    }
  }
}

TEST_CASE("nora switching") {
  const Environment env = chain_env(0.15);
  SUBCASE("huge ridge parameter: no switch after the first episode") {
    AlgoConfig cfg = config(Algo::Nora, 300);
    cfg.lambda = 1e12;
    const RunResult r = run_algorithm(env, cfg);
    for (std::size_t i = 1; i < r.records.size(); ++i) CHECK_FALSE(r.records[i].switched);
  }
  SUBCASE("det-doubling count stays under H d log2(T)") {
    for (int T : {100, 1000}) {
      const RunResult r = run_algorithm(env, config(Algo::Nora, T, 3));
      CHECK(r.switch_rule == SwitchRule::DetDoubling);
      CHECK(r.switches() <= 8 * 10 * std::log2(1.0 + T / 1.0) + 1e-9);
    }
  }
  SUBCASE("never rule") {
    AlgoConfig cfg = config(Algo::Nora, 200);
    cfg.switch_rule = SwitchRule::Never;
    const RunResult r = run_algorithm(env, cfg);
    CHECK(r.switches() == 0);
    CHECK(r.snapshots.front().critic.same_parameters(r.snapshots.back().critic));
  }
}

TEST_CASE("nora-pi with zero step size switches exactly like nora") {
  const Environment env = chain_env(0.15);
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    AlgoConfig a = config(Algo::Nora, 400, seed), b = config(Algo::NoraPi, 400, seed);
    a.eta = b.eta = 0.0;
    a.switch_rule = b.switch_rule = SwitchRule::DetDoubling;
    const RunResult ra = run_algorithm(env, a), rb = run_algorithm(env, b);
    CHECK(ra.switches() == rb.switches());
    for (std::size_t i = 0; i < ra.records.size(); ++i)
      CHECK(ra.records[i].switched == rb.records[i].switched);
  }
}

TEST_CASE("nora-pi switches at least as often as nora under the td-gap rule") {
  const Environment env = chain_env(0.15);
  AlgoConfig a = config(Algo::Nora, 2000), b = config(Algo::NoraPi, 2000);
  a.switch_rule = b.switch_rule = SwitchRule::TdGap;
  a.beta_scale = b.beta_scale = 0.01;
  CHECK(mean_switches(env, b, 4) >= mean_switches(env, a, 4));
}

TEST_CASE("hybrid variants and offline data") {
  const Environment env = chain_env(0.15);
  SUBCASE("missing offline data is rejected unless explicitly allowed") {
    for (Algo a : {Algo::NoahPi, Algo::NoahStar, Algo::HybridNora}) {
      CAPTURE(to_string(a));
      CHECK_THROWS_AS(run_algorithm(env, config(a, 5)), std::invalid_argument);
      AlgoConfig cfg = config(a, 5);
      cfg.allow_empty_offline = true;
      CHECK(run_algorithm(env, cfg).records.size() == 5);
    }
  }
  SUBCASE("hybrid nora with no offline data follows nora") {
    for (std::uint64_t seed : {0u, 5u}) {
      AlgoConfig h = config(Algo::HybridNora, 300, seed);
      h.allow_empty_offline = true;
      const RunResult nora = run_algorithm(env, config(Algo::Nora, 300, seed));
      CHECK(same_trajectory(run_algorithm(env, h), nora));
      const OfflineDataset empty = generate_offline(env.mdp, optimal_policy(env.mdp), 0, 1);
      CHECK(same_trajectory(run_algorithm(env, h, &empty), nora));
    }
  }
  SUBCASE("noah-pi with zero step size keeps the uniform policy") {
    AlgoConfig cfg = config(Algo::NoahPi, 50);
    cfg.eta = 0.0;
    const OfflineDataset off = generate_offline(env.mdp, OfflineSpec{});
    const RunResult r = run_algorithm(env, cfg, &off);
    for (const auto& rec : r.records) CHECK(rec.regret == doctest::Approx(r.v_star - r.v_uniform));
  }
  SUBCASE("noah-pi with optimal-policy data ends near optimal") {
    OfflineSpec spec;
    spec.behavior = "optimal";
    spec.mix = 0.0;
    const OfflineDataset off = generate_offline(env.mdp, spec);
    AlgoConfig cfg = config(Algo::NoahPi, 5000);
    double tail = 0.0, v_star = 0.0;
    for (std::uint64_t seed : {0u, 1u}) {
      cfg.seed = seed;
      const RunResult r = run_algorithm(env, cfg, &off);
      v_star = r.v_star;
      tail += (r.records[4999].cum_regret - r.records[3999].cum_regret) / 1000.0;
    }
    CHECK(tail / 2 < 0.1 * v_star);
  }
}

TEST_CASE("noah-star: online refits help when offline data is thin") {
  const Environment env = chain_env(0.15);
  OfflineSpec spec;
  spec.samples = 200;
  const OfflineDataset off = generate_offline(env.mdp, spec);
  AlgoConfig full = config(Algo::NoahStar, 5000);
  full.beta_scale = 0.01;
  AlgoConfig frozen = full;
  frozen.freeze_trigger = true;
  CHECK(mean_final(env, frozen, 10, &off) > mean_final(env, full, 10, &off));
  CHECK(mean_switches(env, frozen, 2, &off) == 0.0);
}

TEST_CASE("noah-star switch count grows slowly") {
  const Environment env = chain_env(0.15);
  OfflineSpec spec;
  spec.samples = 200;
  const OfflineDataset off = generate_offline(env.mdp, spec);
  AlgoConfig cfg = config(Algo::NoahStar, 1000);
  cfg.beta_scale = 1e-4;
  const double s1 = mean_switches(env, cfg, 10, &off);
  cfg.episodes = 10000;
  const double s2 = mean_switches(env, cfg, 10, &off);
  CHECK(s1 > 0.0);
  CHECK(s2 / s1 <= 2.5);
}

TEST_CASE("douhua beats the uniform baseline on the chain") {
  const Environment env = chain_env(0.15);
  const RunResult first = run_algorithm(env, config(Algo::Douhua, 1));
  const double baseline = 5000 * (first.v_star - first.v_uniform);
  AlgoConfig cfg = config(Algo::Douhua, 5000);
  cfg.anytime_eta = true;
  CHECK(mean_final(env, cfg, 10) < baseline);
}

TEST_CASE("lsvi-ucb with rare switching") {
  const Environment env = chain_env(0.15);
  const RunResult r = run_algorithm(env, config(Algo::LsviUcbRs, 2000, 1));
  CHECK(r.resets == 0);
  CHECK(r.switches() > 0);
  CHECK(r.final_regret() < 2000 * (r.v_star - r.v_uniform));
}

TEST_CASE("confidence-set critic is optimistic on a tiny MDP") {
  std::mt19937_64 rng(9);
  const TabularMdp mdp = oracle::random_mdp(rng, 2, 2, 2);
  const Environment env = Environment::tabular("tiny", mdp);
  AlgoConfig cfg = config(Algo::Nora, 40);
  cfg.confidence_set = true;
  cfg.snapshot_every = 1;
  const RunResult r = run_algorithm(env, cfg);
  const ValueTables q = dp_solve_optimal(mdp);
  for (const auto& snap : r.snapshots)
    for (int h = 0; h < 2; ++h)
      for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) CHECK(snap.critic.value(h, s, a) >= q.q_at(h, s, a) - 1e-9);
}
