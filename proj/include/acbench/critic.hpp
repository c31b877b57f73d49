#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "acbench/mdp.hpp"

namespace acbench {

enum class CriticKind { Tabular, Linear };

/// Exploration-bonus statistics per step.
///
/// Tabular: visit counts n_h(s,a), bonus = multiplier / sqrt(1 + n), and the
/// Gram matrix is the diagonal one-hot Gram lambda*I + diag(n_h).
/// Linear: Lambda_h = lambda*I + sum phi phi^T, bonus = multiplier *
/// sqrt(phi^T Lambda_h^{-1} phi).
class BonusState {
 public:
  static BonusState tabular(int n_states, int n_actions, int horizon, double lambda,
                            double multiplier);
  static BonusState linear(const FeatureMap& features, double lambda, double multiplier);

  CriticKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double multiplier() const { return multiplier_; }
  void set_multiplier(double m) { multiplier_ = m; }
  int horizon() const { return horizon_; }

  void observe(int h, int s, int a);

  double width(int h, int s, int a) const;
  /// multiplier * width without the multiplier, i.e. sqrt(phi^T Lambda^{-1} phi)
  /// (linear) or 1/sqrt(1+n) (tabular).
  double raw_width(int h, int s, int a) const;

  double log_det(int h) const;
  int count(int h) const { return step_counts_[h]; }
  int cell_count(int h, int s, int a) const;
  /// Full Gram matrix for step h (one-hot diagonal for tabular).
  Eigen::MatrixXd gram(int h) const;

 private:
  BonusState() = default;
  void refresh(int h) const;

  CriticKind kind_ = CriticKind::Tabular;
  int n_states_ = 0;
  int n_actions_ = 0;
  int horizon_ = 0;
  double lambda_ = 1.0;
  double multiplier_ = 0.0;
  std::vector<int> step_counts_;
  std::vector<int> cell_counts_;  // tabular only, [h][s][a]
  const FeatureMap* features_ = nullptr;
  std::vector<Eigen::MatrixXd> grams_;  // linear only

  // Lazily refreshed factorisations; mutation is single-owner.
  mutable std::vector<Eigen::MatrixXd> inverses_;
  mutable std::vector<double> log_dets_;
  mutable std::vector<char> dirty_;
};

/// Step-indexed Q-function estimate f_h(s,a).
///
/// value() = clip(base + bonus) where the bonus term comes from an optional
/// frozen BonusState snapshot and clipping to [0, H - h] is optional. The
/// linear kind evaluates phi(h,s,a)^T w_h using a feature map that must
/// outlive the critic.
class Critic {
 public:
  static Critic tabular(int n_states, int n_actions, int horizon);
  static Critic linear(const FeatureMap& features);

  CriticKind kind() const { return kind_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int horizon() const { return horizon_; }
  int dim() const { return dim_; }
  const FeatureMap* features() const { return features_; }

  double value(int h, int s, int a) const;
  double base_value(int h, int s, int a) const;
  /// value() at every cell, flattened [h][s][a].
  std::vector<double> evaluate_all() const;

  void set_table(int h, int s, int a, double v);
  const std::vector<double>& table() const { return table_; }
  void set_weights(int h, Eigen::VectorXd w);
  const Eigen::VectorXd& weights(int h) const { return weights_[h]; }

  bool clip_enabled() const { return clip_; }
  void set_clip(bool clip) { clip_ = clip; }

  void attach_bonus(BonusState snapshot);
  void detach_bonus() { bonus_.reset(); }
  const BonusState* bonus() const { return bonus_ ? bonus_.get() : nullptr; }

  /// True when value() is exactly phi^T w (no bonus, no clipping).
  bool linear_in_features() const { return kind_ == CriticKind::Linear && !bonus_ && !clip_; }

  /// Parameter equality (table / weights and the clip flag); bonus snapshots compare by identity.
  bool same_parameters(const Critic& other) const;

 private:
  Critic() = default;

  CriticKind kind_ = CriticKind::Tabular;
  int n_states_ = 0;
  int n_actions_ = 0;
  int horizon_ = 0;
  int dim_ = 0;
  std::vector<double> table_;
  std::vector<Eigen::VectorXd> weights_;
  const FeatureMap* features_ = nullptr;
  bool clip_ = false;
  std::shared_ptr<const BonusState> bonus_;
};

}  // namespace acbench
