#pragma once

#include <span>
#include <vector>

#include "acbench/algorithms.hpp"
#include "acbench/critic.hpp"
#include "acbench/mdp.hpp"
#include "acbench/policy.hpp"

namespace acbench {

struct RegretLedger {
  double v_star = 0.0;
  std::vector<double> regret;
  std::vector<double> cum_regret;
  std::vector<int> cum_switches;

  static RegretLedger from_run(const RunResult& run);
};

/// Four-term split of V*_1(s1) - V^pi_1(s1) for a critic f targeting Q*:
///   tracking         sum_h E_{pi*} <f_h, pi*_h - pi_h>
///   optimal_bellman  -sum_h E_{pi*} [f_h - T^{pi}_h f_{h+1}]
///   played_bellman   sum_h E_{pi} [f_h - T_h f_{h+1}]
///   greedy_tracking  sum_h E_{pi} <f_{h+1}, greedy(f)_{h+1} - pi_{h+1}>
/// Every expectation is exact (occupancy measures), so the terms sum to the
/// regret up to round-off.
struct DecompositionReport {
  double tracking = 0.0;
  double optimal_bellman = 0.0;
  double played_bellman = 0.0;
  double greedy_tracking = 0.0;
  double sum = 0.0;
  double regret = 0.0;
};
DecompositionReport decomposition_terms(const TabularMdp& mdp, const Critic& critic,
                                        const SoftmaxPolicy& policy,
                                        const SoftmaxPolicy& optimal);

/// Three-term split for a critic targeting Q^pi: tracking, optimal_bellman as
/// above, and played_bellman = sum_h E_pi [f_h - T^{pi}_h f_{h+1}].
struct PolicyDecompositionReport {
  double tracking = 0.0;
  double optimal_bellman = 0.0;
  double played_bellman = 0.0;
  double sum = 0.0;
  double regret = 0.0;
};
PolicyDecompositionReport policy_decomposition_terms(const TabularMdp& mdp, const Critic& critic,
                                                     const SoftmaxPolicy& policy,
                                                     const SoftmaxPolicy& optimal);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
  bool flagged = false;  // nonpositive values in the window; slope/intercept are NaN
};
/// OLS of log y(t) on log t over t in [t_lo, t_hi] (1-based, inclusive).
ExponentFit exponent_fit(std::span<const double> series, int t_lo, int t_hi);
/// Default window: drops the first 10% of episodes.
ExponentFit exponent_fit(std::span<const double> series);

struct SwitchCurve {
  std::vector<int> cumulative;
  double log_growth = 0.0;  // switches(T) / log(T)
};
SwitchCurve switch_curve(const std::vector<EpisodeRecord>& records);

enum class OptimismCells { OptimalSupport, All };
/// Fraction of (snapshot, h, s, a) with f_h(s,a) < Q*_h(s,a) - 1e-9. With
/// OptimalSupport only cells where the greedy optimal policy has positive
/// occupancy count.
double optimism_violation_rate(const std::vector<CriticSnapshot>& snapshots,
                               const TabularMdp& mdp,
                               OptimismCells cells = OptimismCells::OptimalSupport);

/// Per-index mean and 10th / 90th percentiles (linear interpolation) across runs.
struct Band {
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};
Band aggregate_series(const std::vector<std::vector<double>>& runs);

}  // namespace acbench
