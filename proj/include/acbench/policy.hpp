#pragma once

#include <Eigen/Dense>

#include <span>
#include <utility>
#include <vector>

#include "acbench/critic.hpp"
#include "acbench/mdp.hpp"

namespace acbench {

enum class LogitRepresentation { Tabular, Linear };

/// Softmax actor pi_h(a|s) proportional to exp(logit_h(s,a)).
///
/// Tabular logits are stored per (h,s,a) and may be -inf (degenerate policies
/// from greedy extraction or explicit probability tables). Linear logits are
/// phi(h,s,a)^T u_h where u_h accumulates eta * w_h over mirror-ascent steps.
class SoftmaxPolicy {
 public:
  static SoftmaxPolicy uniform(int n_states, int n_actions, int horizon, double learning_rate);
  static SoftmaxPolicy uniform_linear(const FeatureMap& features, double learning_rate);
  /// Logits log p; zero entries become -inf.
  static SoftmaxPolicy from_probabilities(int n_states, int n_actions, int horizon,
                                          const std::vector<double>& probs);
  static SoftmaxPolicy deterministic(int n_states, int n_actions, int horizon,
                                     const std::vector<int>& actions);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int horizon() const { return horizon_; }
  LogitRepresentation representation() const { return representation_; }

  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double eta);
  int reset_count() const { return reset_count_; }

  double logit(int h, int s, int a) const;
  void action_probs(int h, int s, std::span<double> out) const;
  std::vector<double> action_probs(int h, int s) const;

  /// logits += eta * f_h(s,a) at every (h,s,a). eta must be finite and >= 0.
  void mirror_ascent_step(const Critic& critic, double eta);
  void mirror_ascent_step(const Critic& critic) { mirror_ascent_step(critic, learning_rate_); }
  /// Tabular logits only: adds eta * values, values flattened [h][s][a] as
  /// produced by Critic::evaluate_all.
  void mirror_ascent_step(std::span<const double> values, double eta);

  /// All logits to exactly 0; increments reset_count.
  void reset_uniform();

  const std::vector<double>& logits() const { return logits_; }
  const Eigen::VectorXd& linear_weights(int h) const { return linear_weights_[h]; }

 private:
  SoftmaxPolicy() = default;

  LogitRepresentation representation_ = LogitRepresentation::Tabular;
  int n_states_ = 0;
  int n_actions_ = 0;
  int horizon_ = 0;
  double learning_rate_ = 0.0;
  int reset_count_ = 0;
  std::vector<double> logits_;                   // tabular, [h][s][a]
  std::vector<Eigen::VectorXd> linear_weights_;  // linear, accumulated eta * w_h
  const FeatureMap* features_ = nullptr;
};

/// Numerically stable softmax (max-logit subtraction); -inf entries get mass 0.
void softmax(std::span<const double> logits, std::span<double> out);

/// Deterministic policy playing argmax_a critic.value(h,s,a), ties to the lowest index.
SoftmaxPolicy greedy_policy(const Critic& critic);
int greedy_action(const Critic& critic, int h, int s);

/// sum_a pi_h(a|s) f_h(s,a).
double policy_average(const Critic& critic, const SoftmaxPolicy& policy, int h, int s);

/// Tracking error of mirror ascent against a comparator policy.
/// lhs = sum_t sum_h E_{comparator}[<f_h^(t), comparator_h - pi_h^(t)>] where
/// pi^(1) is uniform and pi^(t+1) = mirror step of pi^(t) with f^(t);
/// rhs = eta H^3 T / 2 + H log|A| / eta.
struct TrackingCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};
TrackingCheck mirror_tracking_check(const std::vector<Critic>& critics,
                                    const SoftmaxPolicy& comparator, const TabularMdp& mdp,
                                    double eta);

/// KL(p || q) over a finite support; +inf when q has zero mass where p does not.
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace acbench
