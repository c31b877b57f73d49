#include "acbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "acbench/approx.hpp"
#include "acbench/offline.hpp"
#include "acbench/oracle.hpp"

namespace acbench {

RegretLedger RegretLedger::from_run(const RunResult& run) {
  RegretLedger l;
  l.v_star = run.v_star;
  for (const auto& r : run.records) {
    l.regret.push_back(r.regret);
    l.cum_regret.push_back(r.cum_regret);
    l.cum_switches.push_back(r.cum_switches);
  }
  return l;
}

namespace {

void check_shapes(const TabularMdp& mdp, const Critic& f, const SoftmaxPolicy& pi) {
  if (f.n_states() != mdp.n_states() || f.n_actions() != mdp.n_actions() ||
      f.horizon() != mdp.horizon() || pi.n_states() != mdp.n_states() ||
      pi.n_actions() != mdp.n_actions() || pi.horizon() != mdp.horizon())
    throw std::invalid_argument("decomposition: shapes do not match the MDP");
}

std::vector<double> state_mass(const TabularMdp& mdp, const std::vector<double>& occ, int h) {
  std::vector<double> m(mdp.n_states(), 0.0);
  for (int s = 0; s < mdp.n_states(); ++s)
    for (int a = 0; a < mdp.n_actions(); ++a) m[s] += occ[mdp.index(h, s, a)];
  return m;
}

// sum_h E_{occ}[<f_h(s,.), p_h(.|s) - q_h(.|s)>] over steps [h_from, H).
double inner_term(const TabularMdp& mdp, const std::vector<double>& occ, const Critic& f,
                  const SoftmaxPolicy& p, const SoftmaxPolicy& q, int h_from) {
  const int A = mdp.n_actions();
  std::vector<double> pp(A), qq(A);
  double total = 0.0;
  for (int h = h_from; h < mdp.horizon(); ++h) {
    const auto mass = state_mass(mdp, occ, h);
    for (int s = 0; s < mdp.n_states(); ++s) {
      if (mass[s] == 0.0) continue;
      p.action_probs(h, s, pp);
      q.action_probs(h, s, qq);
      double inner = 0.0;
      for (int a = 0; a < A; ++a) inner += f.value(h, s, a) * (pp[a] - qq[a]);
      total += mass[s] * inner;
    }
  }
  return total;
}

// sum_h E_{occ}[f_h(s,a) - backup(h,s,a)].
template <typename Backup>
double bellman_term(const TabularMdp& mdp, const std::vector<double>& occ, const Critic& f,
                    Backup backup) {
  double total = 0.0;
  for (int h = 0; h < mdp.horizon(); ++h)
    for (int s = 0; s < mdp.n_states(); ++s)
      for (int a = 0; a < mdp.n_actions(); ++a) {
        const double m = occ[mdp.index(h, s, a)];
        if (m != 0.0) total += m * (f.value(h, s, a) - backup(h, s, a));
      }
  return total;
}

}  // namespace

DecompositionReport decomposition_terms(const TabularMdp& mdp, const Critic& critic,
                                        const SoftmaxPolicy& policy,
                                        const SoftmaxPolicy& optimal) {
  check_shapes(mdp, critic, policy);
  const std::vector<double> occ_star = occupancy_measures(mdp, optimal);
  const std::vector<double> occ_pi = occupancy_measures(mdp, policy);
  const SoftmaxPolicy greedy = greedy_policy(critic);

  DecompositionReport r;
  r.tracking = inner_term(mdp, occ_star, critic, optimal, policy, 0);
  r.optimal_bellman = -bellman_term(mdp, occ_star, critic, [&](int h, int s, int a) {
    return bellman_policy_backup(mdp, critic, policy, h, s, a);
  });
  r.played_bellman = bellman_term(mdp, occ_pi, critic, [&](int h, int s, int a) {
    return bellman_max_backup(mdp, critic, h, s, a);
  });
  r.greedy_tracking = inner_term(mdp, occ_pi, critic, greedy, policy, 1);
  r.sum = r.tracking + r.optimal_bellman + r.played_bellman + r.greedy_tracking;
  r.regret = dp_solve_optimal(mdp).v_at(0, mdp.initial_state()) - policy_value(mdp, policy);
  return r;
}

PolicyDecompositionReport policy_decomposition_terms(const TabularMdp& mdp, const Critic& critic,
                                                     const SoftmaxPolicy& policy,
                                                     const SoftmaxPolicy& optimal) {
  check_shapes(mdp, critic, policy);
  const std::vector<double> occ_star = occupancy_measures(mdp, optimal);
  const std::vector<double> occ_pi = occupancy_measures(mdp, policy);
  auto backup = [&](int h, int s, int a) {
    return bellman_policy_backup(mdp, critic, policy, h, s, a);
  };
  PolicyDecompositionReport r;
  r.tracking = inner_term(mdp, occ_star, critic, optimal, policy, 0);
  r.optimal_bellman = -bellman_term(mdp, occ_star, critic, backup);
  r.played_bellman = bellman_term(mdp, occ_pi, critic, backup);
  r.sum = r.tracking + r.optimal_bellman + r.played_bellman;
  r.regret = dp_solve_optimal(mdp).v_at(0, mdp.initial_state()) - policy_value(mdp, policy);
  return r;
}

ExponentFit exponent_fit(std::span<const double> series, int t_lo, int t_hi) {
  if (t_lo < 1 || t_hi > static_cast<int>(series.size()) || t_lo > t_hi)
    throw std::invalid_argument("exponent fit: empty or out-of-range window");
  ExponentFit out;
  out.points = t_hi - t_lo + 1;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int t = t_lo; t <= t_hi; ++t) {
    const double y = series[t - 1];
    if (!(y > 0.0)) {
      out.flagged = true;
      out.slope = out.intercept = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    const double lx = std::log(static_cast<double>(t)), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = out.points;
  const double var = sxx - sx * sx / n;
  if (!(var > 0.0)) {
    out.flagged = true;
    out.slope = out.intercept = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.slope = (sxy - sx * sy / n) / var;
  out.intercept = (sy - out.slope * sx) / n;
  return out;
}

ExponentFit exponent_fit(std::span<const double> series) {
  const int T = static_cast<int>(series.size());
  if (T == 0) throw std::invalid_argument("exponent fit: empty series");
  return exponent_fit(series, T / 10 + 1, T);
}

SwitchCurve switch_curve(const std::vector<EpisodeRecord>& records) {
  SwitchCurve c;
  c.cumulative.reserve(records.size());
  for (const auto& r : records) c.cumulative.push_back(r.cum_switches);
  if (!records.empty()) {
    const double T = static_cast<double>(records.size());
    c.log_growth = c.cumulative.back() / std::log(std::max(T, 2.0));
  }
  return c;
}

double optimism_violation_rate(const std::vector<CriticSnapshot>& snapshots,
                               const TabularMdp& mdp, OptimismCells cells) {
  const ValueTables q_star = dp_solve_optimal(mdp);
  std::vector<double> support;
  if (cells == OptimismCells::OptimalSupport)
    support = occupancy_measures(mdp, optimal_policy(mdp));
  std::size_t checked = 0, violated = 0;
  for (const auto& snap : snapshots) {
    for (int h = 0; h < mdp.horizon(); ++h)
      for (int s = 0; s < mdp.n_states(); ++s)
        for (int a = 0; a < mdp.n_actions(); ++a) {
          if (!support.empty() && support[mdp.index(h, s, a)] <= 0.0) continue;
          ++checked;
          if (snap.critic.value(h, s, a) < q_star.q_at(h, s, a) - 1e-9) ++violated;
        }
  }
  return checked == 0 ? 0.0 : static_cast<double>(violated) / checked;
}

Band aggregate_series(const std::vector<std::vector<double>>& runs) {
  Band b;
  if (runs.empty()) return b;
  const std::size_t n = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != n) throw std::invalid_argument("aggregate: runs differ in length");
  b.mean.resize(n);
  b.lo.resize(n);
  b.hi.resize(n);
  std::vector<double> col(runs.size());
  auto quantile = [&](double q) {
    const double pos = q * (col.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - i;
    return i + 1 < col.size() ? col[i] + frac * (col[i + 1] - col[i]) : col[i];
  };
  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      col[k] = runs[k][t];
      sum += col[k];
    }
    b.mean[t] = sum / runs.size();
    std::sort(col.begin(), col.end());
    b.lo[t] = quantile(0.1);
    b.hi[t] = quantile(0.9);
  }
  return b;
}

}  // namespace acbench
