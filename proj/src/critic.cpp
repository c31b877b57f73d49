#include "acbench/critic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acbench {

BonusState BonusState::tabular(int n_states, int n_actions, int horizon, double lambda,
                               double multiplier) {
  if (!(lambda > 0.0)) throw std::invalid_argument("bonus: ridge lambda must be positive");
  if (!(multiplier >= 0.0)) throw std::invalid_argument("bonus: multiplier must be nonnegative");
  BonusState b;
  b.kind_ = CriticKind::Tabular;
  b.n_states_ = n_states;
  b.n_actions_ = n_actions;
  b.horizon_ = horizon;
  b.lambda_ = lambda;
  b.multiplier_ = multiplier;
  b.step_counts_.assign(horizon, 0);
  b.cell_counts_.assign(static_cast<std::size_t>(horizon) * n_states * n_actions, 0);
  b.log_dets_.assign(horizon, n_states * n_actions * std::log(lambda));
  return b;
}

BonusState BonusState::linear(const FeatureMap& features, double lambda, double multiplier) {
  if (!(lambda > 0.0)) throw std::invalid_argument("bonus: ridge lambda must be positive");
  if (!(multiplier >= 0.0)) throw std::invalid_argument("bonus: multiplier must be nonnegative");
  BonusState b;
  b.kind_ = CriticKind::Linear;
  b.n_states_ = features.n_states();
  b.n_actions_ = features.n_actions();
  b.horizon_ = features.horizon();
  b.lambda_ = lambda;
  b.multiplier_ = multiplier;
  b.features_ = &features;
  b.step_counts_.assign(b.horizon_, 0);
  const int d = features.dim();
  b.grams_.assign(b.horizon_, lambda * Eigen::MatrixXd::Identity(d, d));
  b.inverses_.assign(b.horizon_, Eigen::MatrixXd::Identity(d, d) / lambda);
  b.log_dets_.assign(b.horizon_, d * std::log(lambda));
  b.dirty_.assign(b.horizon_, 0);
  return b;
}

void BonusState::observe(int h, int s, int a) {
  ++step_counts_[h];
  if (kind_ == CriticKind::Tabular) {
    int& n = cell_counts_[(static_cast<std::size_t>(h) * n_states_ + s) * n_actions_ + a];
    log_dets_[h] += std::log(lambda_ + n + 1) - std::log(lambda_ + n);
    ++n;
    return;
  }
  const Eigen::VectorXd& phi = (*features_)(h, s, a);
  grams_[h].noalias() += phi * phi.transpose();
  dirty_[h] = 1;
}

void BonusState::refresh(int h) const {
  if (kind_ != CriticKind::Linear || !dirty_[h]) return;
  Eigen::LLT<Eigen::MatrixXd> llt(grams_[h]);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(grams_[h].rows(), grams_[h].cols());
  inverses_[h] = llt.solve(id);
  const auto& l = llt.matrixL();
  double ld = 0.0;
  for (Eigen::Index i = 0; i < grams_[h].rows(); ++i) ld += std::log(l(i, i));
  log_dets_[h] = 2.0 * ld;
  dirty_[h] = 0;
}

double BonusState::raw_width(int h, int s, int a) const {
  if (kind_ == CriticKind::Tabular) return 1.0 / std::sqrt(1.0 + cell_count(h, s, a));
  refresh(h);
  const Eigen::VectorXd& phi = (*features_)(h, s, a);
  const double q = phi.dot(inverses_[h] * phi);
  return std::sqrt(std::max(q, 0.0));
}

double BonusState::width(int h, int s, int a) const {
  if (multiplier_ == 0.0) return 0.0;
  return multiplier_ * raw_width(h, s, a);
}

double BonusState::log_det(int h) const {
  refresh(h);
  return log_dets_[h];
}

int BonusState::cell_count(int h, int s, int a) const {
  if (kind_ == CriticKind::Tabular)
    return cell_counts_[(static_cast<std::size_t>(h) * n_states_ + s) * n_actions_ + a];
  throw std::logic_error("bonus: per-cell counts are only tracked for tabular state");
}

Eigen::MatrixXd BonusState::gram(int h) const {
  if (kind_ == CriticKind::Linear) return grams_[h];
  const int d = n_states_ * n_actions_;
  Eigen::MatrixXd g = lambda_ * Eigen::MatrixXd::Identity(d, d);
  for (int k = 0; k < d; ++k) g(k, k) += cell_counts_[static_cast<std::size_t>(h) * d + k];
  return g;
}

Critic Critic::tabular(int n_states, int n_actions, int horizon) {
  Critic c;
  c.kind_ = CriticKind::Tabular;
  c.n_states_ = n_states;
  c.n_actions_ = n_actions;
  c.horizon_ = horizon;
  c.dim_ = n_states * n_actions;
  c.table_.assign(static_cast<std::size_t>(horizon) * n_states * n_actions, 0.0);
  return c;
}

Critic Critic::linear(const FeatureMap& features) {
  Critic c;
  c.kind_ = CriticKind::Linear;
  c.n_states_ = features.n_states();
  c.n_actions_ = features.n_actions();
  c.horizon_ = features.horizon();
  c.dim_ = features.dim();
  c.features_ = &features;
  c.weights_.assign(c.horizon_, Eigen::VectorXd::Zero(c.dim_));
  return c;
}

double Critic::base_value(int h, int s, int a) const {
  if (kind_ == CriticKind::Tabular)
    return table_[(static_cast<std::size_t>(h) * n_states_ + s) * n_actions_ + a];
  return (*features_)(h, s, a).dot(weights_[h]);
}

double Critic::value(int h, int s, int a) const {
  double v = base_value(h, s, a);
  if (bonus_) v += bonus_->width(h, s, a);
  if (clip_) v = std::clamp(v, 0.0, static_cast<double>(horizon_ - h));
  return v;
}

std::vector<double> Critic::evaluate_all() const {
  std::vector<double> out(static_cast<std::size_t>(horizon_) * n_states_ * n_actions_);
  std::size_t i = 0;
  for (int h = 0; h < horizon_; ++h)
    for (int s = 0; s < n_states_; ++s)
      for (int a = 0; a < n_actions_; ++a, ++i) out[i] = value(h, s, a);
  return out;
}

void Critic::set_table(int h, int s, int a, double v) {
  if (kind_ != CriticKind::Tabular) throw std::logic_error("critic: set_table on a linear critic");
  table_[(static_cast<std::size_t>(h) * n_states_ + s) * n_actions_ + a] = v;
}

void Critic::set_weights(int h, Eigen::VectorXd w) {
  if (kind_ != CriticKind::Linear) throw std::logic_error("critic: set_weights on a tabular critic");
  if (w.size() != dim_) throw std::invalid_argument("critic: weight dimension mismatch");
  weights_[h] = std::move(w);
}

void Critic::attach_bonus(BonusState snapshot) {
  if (snapshot.kind() != kind_) throw std::invalid_argument("critic: bonus kind does not match critic");
  if (snapshot.horizon() != horizon_) throw std::invalid_argument("critic: bonus horizon mismatch");
  for (int h = 0; h < horizon_; ++h) snapshot.log_det(h);  // settle cached factorisations
  bonus_ = std::make_shared<const BonusState>(std::move(snapshot));
}

bool Critic::same_parameters(const Critic& other) const {
  if (kind_ != other.kind_ || clip_ != other.clip_ || bonus_ != other.bonus_) return false;
  if (kind_ == CriticKind::Tabular) return table_ == other.table_;
  for (int h = 0; h < horizon_; ++h) {
    if (weights_[h] != other.weights_[h]) return false;
  }
  return true;
}

}  // namespace acbench
