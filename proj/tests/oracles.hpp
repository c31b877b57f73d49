#pragma once

// Reference computations for tests. Everything here is written independently of
// the library's DP code: values come from explicit path enumeration and optimal
// values from enumerating every deterministic Markov policy.

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include "acbench/critic.hpp"
#include "acbench/mdp.hpp"
#include "acbench/policy.hpp"

namespace oracle {

using acbench::Critic;
using acbench::SoftmaxPolicy;
using acbench::TabularMdp;

inline double unif(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Dense random MDP; each row gets a few exact zeros so sparse rows are exercised.
inline TabularMdp random_mdp(std::mt19937_64& rng, int S, int A, int H) {
  std::vector<double> p(static_cast<std::size_t>(H) * S * A * S);
  std::vector<double> r(static_cast<std::size_t>(H) * S * A);
  for (std::size_t row = 0; row < r.size(); ++row) {
    double total = 0.0;
    for (int k = 0; k < S; ++k) {
      double w = unif(rng);
      if (w < 0.2) w = 0.0;
      p[row * S + k] = w;
      total += w;
    }
    if (total == 0.0) {
      p[row * S] = 1.0;
      total = 1.0;
    }
    for (int k = 0; k < S; ++k) p[row * S + k] /= total;
    r[row] = unif(rng);
  }
  const int s1 = static_cast<int>(rng() % S);
  return TabularMdp::from_dense(S, A, H, p, r, s1);
}

inline SoftmaxPolicy random_policy(std::mt19937_64& rng, int S, int A, int H) {
  std::vector<double> probs(static_cast<std::size_t>(H) * S * A);
  for (std::size_t i = 0; i < probs.size(); i += A) {
    double total = 0.0;
    for (int a = 0; a < A; ++a) total += probs[i + a] = unif(rng) + 1e-3;
    for (int a = 0; a < A; ++a) probs[i + a] /= total;
  }
  return SoftmaxPolicy::from_probabilities(S, A, H, probs);
}

inline Critic random_critic(std::mt19937_64& rng, int S, int A, int H) {
  Critic f = Critic::tabular(S, A, H);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) f.set_table(h, s, a, (H - h) * unif(rng));
  return f;
}

// Expected return from (h, s) by summing over every action/next-state path.
inline double path_value(const TabularMdp& m, const SoftmaxPolicy& pi, int h, int s) {
  if (h == m.horizon()) return 0.0;
  const auto probs = pi.action_probs(h, s);
  double v = 0.0;
  for (int a = 0; a < m.n_actions(); ++a) {
    if (probs[a] == 0.0) continue;
    double cont = 0.0;
    for (int s2 = 0; s2 < m.n_states(); ++s2) {
      const double p = m.prob(h, s, a, s2);
      if (p > 0.0) cont += p * path_value(m, pi, h + 1, s2);
    }
    v += probs[a] * (m.reward(h, s, a) + cont);
  }
  return v;
}

inline double path_value(const TabularMdp& m, const SoftmaxPolicy& pi) {
  return path_value(m, pi, 0, m.initial_state());
}

inline double path_q(const TabularMdp& m, const SoftmaxPolicy& pi, int h, int s, int a) {
  double cont = 0.0;
  for (int s2 = 0; s2 < m.n_states(); ++s2) {
    const double p = m.prob(h, s, a, s2);
    if (p > 0.0) cont += p * path_value(m, pi, h + 1, s2);
  }
  return m.reward(h, s, a) + cont;
}

struct BruteOptimum {
  double value = -1.0;
  std::vector<int> actions;  // [h][s]
};

// Best deterministic Markov policy by exhaustive search; only for tiny MDPs.
inline BruteOptimum brute_force_optimum(const TabularMdp& m) {
  const int S = m.n_states(), A = m.n_actions(), H = m.horizon();
  const int n = S * H;
  std::vector<int> actions(n, 0);
  BruteOptimum best;
  while (true) {
    const auto pi = SoftmaxPolicy::deterministic(S, A, H, actions);
    const double v = path_value(m, pi);
    if (v > best.value + 1e-12) best = {v, actions};
    int i = 0;
    while (i < n && ++actions[i] == A) actions[i++] = 0;
    if (i == n) break;
  }
  return best;
}

// Exact occupancy by path enumeration, flattened [h][s][a].
inline std::vector<double> path_occupancy(const TabularMdp& m, const SoftmaxPolicy& pi) {
  const int S = m.n_states(), A = m.n_actions(), H = m.horizon();
  std::vector<double> d(static_cast<std::size_t>(H) * S * A, 0.0);
  std::function<void(int, int, double)> walk = [&](int h, int s, double mass) {
    if (h == H) return;
    const auto probs = pi.action_probs(h, s);
    for (int a = 0; a < A; ++a) {
      if (probs[a] == 0.0) continue;
      d[(static_cast<std::size_t>(h) * S + s) * A + a] += mass * probs[a];
      for (int s2 = 0; s2 < S; ++s2) {
        const double p = m.prob(h, s, a, s2);
        if (p > 0.0) walk(h + 1, s2, mass * probs[a] * p);
      }
    }
  };
  walk(0, m.initial_state(), 1.0);
  return d;
}

}  // namespace oracle

namespace oracle {

// Q* by memoised forward recursion, flattened [h][s][a]; for MDPs too large
// for brute_force_optimum.
inline std::vector<double> recursive_optimal_q(const TabularMdp& m) {
  const int S = m.n_states(), A = m.n_actions(), H = m.horizon();
  std::vector<double> memo(static_cast<std::size_t>(H) * S, -1.0);
  std::function<double(int, int)> v = [&](int h, int s) -> double {
    if (h == H) return 0.0;
    double& slot = memo[static_cast<std::size_t>(h) * S + s];
    if (slot >= 0.0) return slot;
    double best = 0.0;
    for (int a = 0; a < A; ++a) {
      double q = m.reward(h, s, a);
      for (int s2 = 0; s2 < S; ++s2)
        if (m.prob(h, s, a, s2) > 0.0) q += m.prob(h, s, a, s2) * v(h + 1, s2);
      best = std::max(best, q);
    }
    return slot = best;
  };
  std::vector<double> q(static_cast<std::size_t>(H) * S * A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double x = m.reward(h, s, a);
        for (int s2 = 0; s2 < S; ++s2)
          if (m.prob(h, s, a, s2) > 0.0) x += m.prob(h, s, a, s2) * v(h + 1, s2);
        q[(static_cast<std::size_t>(h) * S + s) * A + a] = x;
      }
  return q;
}

}  // namespace oracle
