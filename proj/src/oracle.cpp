#include "acbench/oracle.hpp"

#include <algorithm>
#include <limits>

namespace acbench {

ValueTables dp_solve_optimal(const TabularMdp& mdp) {
  const int S = mdp.n_states(), A = mdp.n_actions(), H = mdp.horizon();
  ValueTables out;
  out.n_states = S;
  out.n_actions = A;
  out.horizon = H;
  out.kind = ValueKind::Optimal;
  out.q.assign(mdp.n_cells(), 0.0);
  out.v.assign(static_cast<std::size_t>(H) * S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        double q = mdp.reward(h, s, a);
        if (h + 1 < H) {
          for (const Outcome& o : mdp.next(h, s, a)) q += o.prob * out.v_at(h + 1, o.next_state);
        }
        out.q[mdp.index(h, s, a)] = q;
        best = std::max(best, q);
      }
      out.v[static_cast<std::size_t>(h) * S + s] = best;
    }
  }
  return out;
}

ValueTables dp_policy_eval(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  const int S = mdp.n_states(), A = mdp.n_actions(), H = mdp.horizon();
  ValueTables out;
  out.n_states = S;
  out.n_actions = A;
  out.horizon = H;
  out.kind = ValueKind::PolicyEval;
  out.q.assign(mdp.n_cells(), 0.0);
  out.v.assign(static_cast<std::size_t>(H) * S, 0.0);
  std::vector<double> probs(A);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      policy.action_probs(h, s, probs);
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        double q = mdp.reward(h, s, a);
        if (h + 1 < H) {
          for (const Outcome& o : mdp.next(h, s, a)) q += o.prob * out.v_at(h + 1, o.next_state);
        }
        out.q[mdp.index(h, s, a)] = q;
        v += probs[a] * q;
      }
      out.v[static_cast<std::size_t>(h) * S + s] = v;
    }
  }
  return out;
}

double policy_value(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  const int S = mdp.n_states(), A = mdp.n_actions(), H = mdp.horizon();
  std::vector<double> next(S, 0.0), cur(S, 0.0), probs(A);
  for (int h = H - 1; h >= 0; --h) {
    for (int s = 0; s < S; ++s) {
      policy.action_probs(h, s, probs);
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        if (probs[a] == 0.0) continue;
        double q = mdp.reward(h, s, a);
        if (h + 1 < H) {
          for (const Outcome& o : mdp.next(h, s, a)) q += o.prob * next[o.next_state];
        }
        v += probs[a] * q;
      }
      cur[s] = v;
    }
    std::swap(cur, next);
  }
  return next[mdp.initial_state()];
}

std::vector<double> occupancy_measures(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
  const int S = mdp.n_states(), A = mdp.n_actions(), H = mdp.horizon();
  std::vector<double> d(mdp.n_cells(), 0.0);
  std::vector<double> state_mass(S, 0.0), next_mass(S, 0.0), probs(A);
  state_mass[mdp.initial_state()] = 1.0;
  for (int h = 0; h < H; ++h) {
    std::fill(next_mass.begin(), next_mass.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      if (state_mass[s] == 0.0) continue;
      policy.action_probs(h, s, probs);
      for (int a = 0; a < A; ++a) {
        const double m = state_mass[s] * probs[a];
        if (m == 0.0) continue;
        d[mdp.index(h, s, a)] = m;
        for (const Outcome& o : mdp.next(h, s, a)) next_mass[o.next_state] += m * o.prob;
      }
    }
    std::swap(state_mass, next_mass);
  }
  return d;
}

Trajectory sample_episode(const TabularMdp& mdp, const SoftmaxPolicy& policy, Rng& rng,
                          int episode_index) {
  const int H = mdp.horizon();
  Trajectory traj;
  traj.episode_index = episode_index;
  traj.transitions.reserve(H);
  std::vector<double> probs(mdp.n_actions());
  int s = mdp.initial_state();
  for (int h = 0; h < H; ++h) {
    policy.action_probs(h, s, probs);
    const int a = categorical(probs, rng);
    const int s2 = sample_next_state(mdp.next(h, s, a), rng);
    const int recorded = h + 1 < H ? s2 : kTerminalState;
    traj.transitions.push_back({h, s, a, mdp.reward(h, s, a), recorded});
    s = s2;
  }
  return traj;
}

double bellman_max_backup(const TabularMdp& mdp, const Critic& critic, int h, int s, int a) {
  double q = mdp.reward(h, s, a);
  if (h + 1 >= mdp.horizon()) return q;
  for (const Outcome& o : mdp.next(h, s, a)) {
    q += o.prob * critic.value(h + 1, o.next_state, greedy_action(critic, h + 1, o.next_state));
  }
  return q;
}

double bellman_policy_backup(const TabularMdp& mdp, const Critic& critic,
                             const SoftmaxPolicy& policy, int h, int s, int a) {
  double q = mdp.reward(h, s, a);
  if (h + 1 >= mdp.horizon()) return q;
  for (const Outcome& o : mdp.next(h, s, a)) {
    q += o.prob * policy_average(critic, policy, h + 1, o.next_state);
  }
  return q;
}

ValueDifference value_difference(const TabularMdp& mdp, const Critic& critic,
                                 const SoftmaxPolicy& pi, const SoftmaxPolicy& pi_prime) {
  const int S = mdp.n_states(), A = mdp.n_actions(), H = mdp.horizon();
  ValueDifference out;
  out.lhs = policy_average(critic, pi, 0, mdp.initial_state()) - policy_value(mdp, pi_prime);

  const std::vector<double> occ = occupancy_measures(mdp, pi_prime);
  std::vector<double> p(A), p_prime(A);
  double tracking = 0.0, bellman = 0.0;
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      double state_mass = 0.0;
      for (int a = 0; a < A; ++a) state_mass += occ[mdp.index(h, s, a)];
      if (state_mass == 0.0) continue;
      pi.action_probs(h, s, p);
      pi_prime.action_probs(h, s, p_prime);
      double inner = 0.0;
      for (int a = 0; a < A; ++a) inner += critic.value(h, s, a) * (p[a] - p_prime[a]);
      tracking += state_mass * inner;
      for (int a = 0; a < A; ++a) {
        const double m = occ[mdp.index(h, s, a)];
        if (m == 0.0) continue;
        bellman += m * (critic.value(h, s, a) - bellman_policy_backup(mdp, critic, pi, h, s, a));
      }
    }
  }
  out.rhs = tracking + bellman;
  return out;
}

Critic critic_from_values(const ValueTables& values) {
  Critic c = Critic::tabular(values.n_states, values.n_actions, values.horizon);
  for (int h = 0; h < values.horizon; ++h)
    for (int s = 0; s < values.n_states; ++s)
      for (int a = 0; a < values.n_actions; ++a) c.set_table(h, s, a, values.q_at(h, s, a));
  return c;
}

}  // namespace acbench
