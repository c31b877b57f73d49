#pragma once

#include <Eigen/Dense>

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "acbench/critic.hpp"
#include "acbench/mdp.hpp"
#include "acbench/policy.hpp"

namespace acbench {

/// Append-only transitions for one step h, plus a per-(s,a) summary that every
/// fit reads. The summary is keyed and iterated in index order, so fits depend
/// only on the sample multiset.
class StepDataset {
 public:
  struct Cell {
    int count = 0;
    double reward_sum = 0.0;
    std::map<int, int> next_counts;  // may contain kTerminalState
  };

  explicit StepDataset(int step = 0) : step_(step) {}

  int step() const { return step_; }
  std::size_t size() const { return transitions_.size(); }
  bool empty() const { return transitions_.empty(); }

  void append(const Transition& t);
  void append_all(const StepDataset& other);

  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::map<std::pair<int, int>, Cell>& cells() const { return cells_; }

 private:
  int step_;
  std::vector<Transition> transitions_;
  std::map<std::pair<int, int>, Cell> cells_;
};

/// One StepDataset per step.
using Buffers = std::vector<StepDataset>;
Buffers make_buffers(int horizon);
void append_trajectory(Buffers& buffers, const Trajectory& traj);
/// Online buffers followed by offline ones, step by step. Horizon mismatch throws.
Buffers merge(const Buffers& online, const Buffers& offline);

/// Greedy backup (max over next actions) or the expectation under a policy.
struct TdTarget {
  enum class Mode { Max, Policy };
  Mode mode = Mode::Max;
  const SoftmaxPolicy* policy = nullptr;

  static TdTarget max() { return {}; }
  static TdTarget under(const SoftmaxPolicy& p) { return {Mode::Policy, &p}; }
};

/// max_a f_h(s,a) or sum_a pi_h(a|s) f_h(s,a); zero past the horizon or at the
/// terminal sentinel. Max ties are irrelevant for the value.
double next_value(const Critic& f, const TdTarget& target, int h, int s);

/// sum over data of (f_h(s,a) - r - target(s'))^2 with h = data.step() and the
/// target read from f_next at step h+1.
double td_loss(const Critic& f, const Critic& f_next, const TdTarget& target,
               const StepDataset& data);

/// (lambda I + sum phi phi^T)^{-1} sum phi y.
Eigen::VectorXd ridge_fit(std::span<const Eigen::VectorXd> phis, std::span<const double> targets,
                          double lambda);
/// Same, reading phi(h, s, a) for each transition of data in order.
Eigen::VectorXd ridge_fit(const StepDataset& data, const FeatureMap& features,
                          std::span<const double> targets, double lambda);
/// Max-abs residual of the normal equations (lambda I + sum phi phi^T) w - sum phi y.
double ridge_residual(std::span<const Eigen::VectorXd> phis, std::span<const double> targets,
                      double lambda, const Eigen::VectorXd& w);

/// Shape of the critic a fit produces.
struct CriticSpec {
  CriticKind kind = CriticKind::Tabular;
  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  const FeatureMap* features = nullptr;

  static CriticSpec tabular(int n_states, int n_actions, int horizon);
  static CriticSpec linear(const FeatureMap& features);
  Critic make() const;
};

struct FitOptions {
  double lambda = 1.0;
  bool clip = false;
  /// When set, the fitted critic carries this snapshot and every regression
  /// target is read from the optimistic (bonus-added, clipped) next step.
  const BonusState* bonus = nullptr;
};

struct FitReport {
  double max_ridge_residual = 0.0;
};

/// Backward pass h = H-1 ... 0, regressing r + target(f_{h+1})(s') onto the
/// class. Tabular cells take the sample mean (unvisited cells stay 0); linear
/// steps solve ridge normal equations over all samples.
Critic fit_backward(const CriticSpec& spec, const Buffers& data, const TdTarget& target,
                    const FitOptions& options = {}, FitReport* report = nullptr);

Critic fqe(const CriticSpec& spec, const Buffers& data, const SoftmaxPolicy& policy,
           double lambda = 1.0);
Critic fqi(const CriticSpec& spec, const Buffers& data, double lambda = 1.0);

/// f_h(s,a) plus the bonus width from `bonus`, clipped to [0, H - h] when the
/// critic clips. Ignores any bonus already attached to the critic.
double optimistic_eval(const Critic& critic, const BonusState& bonus, int h, int s, int a);

enum class SwitchRule { TdGap, DetDoubling, Never };

/// True iff log det(now) - log det(last) >= log 2 at some step.
bool det_doubling_fires(const BonusState& now, std::span<const double> last_log_dets);
bool det_doubling_fires(const Eigen::MatrixXd& gram_now, const Eigen::MatrixXd& gram_last);
std::vector<double> log_dets(const BonusState& state);

/// L_h(f_h, f_{h+1}) - L_h(g, f_{h+1}) where g is the class fit (tabular means or
/// ridge with `lambda`) of the same targets. Nonnegative for the tabular class.
double td_gap(const Critic& f, const TdTarget& target, const StepDataset& data,
              const CriticSpec& spec, double lambda);
std::vector<double> td_gaps(const Critic& f, const TdTarget& target, const Buffers& data,
                            const CriticSpec& spec, double lambda);
/// Fires iff some gap reaches 5 H^2 beta.
bool td_gap_fires(std::span<const double> gaps, int horizon, double beta);

/// beta = scale * log(S A H T / delta).
double default_beta(int n_states, int n_actions, int horizon, int episodes, double delta,
                    double scale = 1.0);
/// Tabular: H. Linear: 0.5 H sqrt(d log(T / delta)).
double default_bonus(CriticKind kind, int horizon, int dim, int episodes, double delta);

/// Optimistic critic from an enumerated confidence set (tabular, S*A <= 12).
///
/// Candidate tables take values on the grid {0, H/4, H/2, 3H/4, H}. Working
/// backward from f_H = 0, the set at step h holds the grid tables whose TD loss
/// against the chosen f_{h+1} is within beta of the best grid table, and the
/// critic takes at each cell the largest value any member assigns it. The loss
/// is a sum of per-cell terms, so that maximum is the largest grid value whose
/// own excess loss is at most beta.
Critic confidence_set_critic(const Buffers& data, int n_states, int n_actions, int horizon,
                             double beta);

}  // namespace acbench
