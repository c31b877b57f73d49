#pragma once

#include <vector>

#include "acbench/critic.hpp"
#include "acbench/mdp.hpp"
#include "acbench/policy.hpp"
#include "acbench/rng.hpp"

namespace acbench {

/// Exact Q*, V* by backward induction. Ties are irrelevant for values.
ValueTables dp_solve_optimal(const TabularMdp& mdp);

/// Exact Q^pi, V^pi by backward induction.
ValueTables dp_policy_eval(const TabularMdp& mdp, const SoftmaxPolicy& policy);

/// V^pi_1(s1) only; same recursion as dp_policy_eval without storing Q.
double policy_value(const TabularMdp& mdp, const SoftmaxPolicy& policy);

/// Per-step state-action occupancy d_h(s,a), flattened [h][s][a], from delta_{s1}.
std::vector<double> occupancy_measures(const TabularMdp& mdp, const SoftmaxPolicy& policy);

Trajectory sample_episode(const TabularMdp& mdp, const SoftmaxPolicy& policy, Rng& rng,
                          int episode_index = 0);

/// Right-hand side of the generalized policy-difference identity:
///   f_1(s1, pi_1) - V^{pi'}_1(s1)
///     = sum_h E_{pi'}[<f_h(s_h,.), pi_h - pi'_h>] + sum_h E_{pi'}[(f_h - T^{pi}_h f_{h+1})(s_h,a_h)]
/// with f_{H+1} = 0. Returns {lhs, rhs}.
struct ValueDifference {
  double lhs = 0.0;
  double rhs = 0.0;
};
ValueDifference value_difference(const TabularMdp& mdp, const Critic& critic,
                                 const SoftmaxPolicy& pi, const SoftmaxPolicy& pi_prime);

/// (T f_{h+1})(s,a) = r + E_{s'} max_a' f_{h+1}(s',a'); zero continuation at the last step.
double bellman_max_backup(const TabularMdp& mdp, const Critic& critic, int h, int s, int a);
/// (T^pi f_{h+1})(s,a) = r + E_{s'} sum_a' pi(a'|s') f_{h+1}(s',a').
double bellman_policy_backup(const TabularMdp& mdp, const Critic& critic,
                             const SoftmaxPolicy& policy, int h, int s, int a);

/// Critic holding the given Q table exactly (tabular kind).
Critic critic_from_values(const ValueTables& values);

}  // namespace acbench
