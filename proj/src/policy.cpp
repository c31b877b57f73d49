#include "acbench/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "acbench/oracle.hpp"

namespace acbench {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_eta(double eta) {
  if (!std::isfinite(eta) || eta < 0.0)
    throw std::invalid_argument("policy: learning rate must be finite and nonnegative");
}

}  // namespace

void softmax(std::span<const double> logits, std::span<double> out) {
  double top = kNegInf;
  for (double l : logits) top = std::max(top, l);
  if (top == kNegInf) throw std::invalid_argument("softmax: all logits are -inf");
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = logits[i] == kNegInf ? 0.0 : std::exp(logits[i] - top);
    z += out[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] /= z;
}

SoftmaxPolicy SoftmaxPolicy::uniform(int n_states, int n_actions, int horizon,
                                     double learning_rate) {
  check_eta(learning_rate);
  SoftmaxPolicy p;
  p.n_states_ = n_states;
  p.n_actions_ = n_actions;
  p.horizon_ = horizon;
  p.learning_rate_ = learning_rate;
  p.logits_.assign(static_cast<std::size_t>(horizon) * n_states * n_actions, 0.0);
  return p;
}

SoftmaxPolicy SoftmaxPolicy::uniform_linear(const FeatureMap& features, double learning_rate) {
  check_eta(learning_rate);
  SoftmaxPolicy p;
  p.representation_ = LogitRepresentation::Linear;
  p.n_states_ = features.n_states();
  p.n_actions_ = features.n_actions();
  p.horizon_ = features.horizon();
  p.learning_rate_ = learning_rate;
  p.features_ = &features;
  p.linear_weights_.assign(p.horizon_, Eigen::VectorXd::Zero(features.dim()));
  return p;
}

SoftmaxPolicy SoftmaxPolicy::from_probabilities(int n_states, int n_actions, int horizon,
                                                const std::vector<double>& probs) {
  SoftmaxPolicy p = uniform(n_states, n_actions, horizon, 0.0);
  if (probs.size() != p.logits_.size())
    throw std::invalid_argument("policy: probability table has wrong size");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) throw std::invalid_argument("policy: negative probability");
    p.logits_[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
  }
  for (std::size_t row = 0; row < probs.size(); row += n_actions) {
    double total = 0.0;
    for (int a = 0; a < n_actions; ++a) total += probs[row + a];
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("policy: row does not sum to 1");
  }
  return p;
}

SoftmaxPolicy SoftmaxPolicy::deterministic(int n_states, int n_actions, int horizon,
                                           const std::vector<int>& actions) {
  if (actions.size() != static_cast<std::size_t>(horizon) * n_states)
    throw std::invalid_argument("policy: one action per (h,s) required");
  SoftmaxPolicy p = uniform(n_states, n_actions, horizon, 0.0);
  std::fill(p.logits_.begin(), p.logits_.end(), kNegInf);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 0 || actions[i] >= n_actions)
      throw std::invalid_argument("policy: action out of range");
    p.logits_[i * n_actions + actions[i]] = 0.0;
  }
  return p;
}

void SoftmaxPolicy::set_learning_rate(double eta) {
  check_eta(eta);
  learning_rate_ = eta;
}

double SoftmaxPolicy::logit(int h, int s, int a) const {
  if (representation_ == LogitRepresentation::Tabular)
    return logits_[(static_cast<std::size_t>(h) * n_states_ + s) * n_actions_ + a];
  return (*features_)(h, s, a).dot(linear_weights_[h]);
}

void SoftmaxPolicy::action_probs(int h, int s, std::span<double> out) const {
  if (representation_ == LogitRepresentation::Tabular) {
    const std::size_t row = (static_cast<std::size_t>(h) * n_states_ + s) * n_actions_;
    softmax(std::span<const double>(logits_.data() + row, n_actions_), out);
    return;
  }
  std::vector<double> l(n_actions_);
  for (int a = 0; a < n_actions_; ++a) l[a] = logit(h, s, a);
  softmax(l, out);
}

std::vector<double> SoftmaxPolicy::action_probs(int h, int s) const {
  std::vector<double> out(n_actions_);
  action_probs(h, s, out);
  return out;
}

void SoftmaxPolicy::mirror_ascent_step(const Critic& critic, double eta) {
  check_eta(eta);
  if (critic.n_states() != n_states_ || critic.n_actions() != n_actions_ ||
      critic.horizon() != horizon_)
    throw std::invalid_argument("policy: critic shape does not match policy");
  if (eta == 0.0) return;
  if (representation_ == LogitRepresentation::Linear) {
    if (!critic.linear_in_features() || critic.features() != features_)
      throw std::invalid_argument(
          "policy: linear logits need a bonus-free, unclipped linear critic on the same features");
    for (int h = 0; h < horizon_; ++h) linear_weights_[h] += eta * critic.weights(h);
    return;
  }
  std::size_t i = 0;
  for (int h = 0; h < horizon_; ++h)
    for (int s = 0; s < n_states_; ++s)
      for (int a = 0; a < n_actions_; ++a, ++i) logits_[i] += eta * critic.value(h, s, a);
}

void SoftmaxPolicy::mirror_ascent_step(std::span<const double> values, double eta) {
  check_eta(eta);
  if (representation_ != LogitRepresentation::Tabular)
    throw std::invalid_argument("policy: value-table updates need tabular logits");
  if (values.size() != logits_.size())
    throw std::invalid_argument("policy: value table has wrong size");
  if (eta == 0.0) return;
  for (std::size_t i = 0; i < logits_.size(); ++i) logits_[i] += eta * values[i];
}

void SoftmaxPolicy::reset_uniform() {
  std::fill(logits_.begin(), logits_.end(), 0.0);
  for (auto& w : linear_weights_) w.setZero();
  ++reset_count_;
}

int greedy_action(const Critic& critic, int h, int s) {
  int best = 0;
  double best_value = critic.value(h, s, 0);
  for (int a = 1; a < critic.n_actions(); ++a) {
    const double v = critic.value(h, s, a);
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

SoftmaxPolicy greedy_policy(const Critic& critic) {
  std::vector<int> actions(static_cast<std::size_t>(critic.horizon()) * critic.n_states());
  for (int h = 0; h < critic.horizon(); ++h)
    for (int s = 0; s < critic.n_states(); ++s)
      actions[static_cast<std::size_t>(h) * critic.n_states() + s] = greedy_action(critic, h, s);
  return SoftmaxPolicy::deterministic(critic.n_states(), critic.n_actions(), critic.horizon(),
                                      actions);
}

double policy_average(const Critic& critic, const SoftmaxPolicy& policy, int h, int s) {
  const int A = critic.n_actions();
  double buf[16];
  std::vector<double> heap;
  std::span<double> probs;
  if (A <= 16) {
    probs = std::span<double>(buf, A);
  } else {
    heap.resize(A);
    probs = heap;
  }
  policy.action_probs(h, s, probs);
  double v = 0.0;
  for (int a = 0; a < A; ++a) {
    if (probs[a] != 0.0) v += probs[a] * critic.value(h, s, a);
  }
  return v;
}

TrackingCheck mirror_tracking_check(const std::vector<Critic>& critics,
                                    const SoftmaxPolicy& comparator, const TabularMdp& mdp,
                                    double eta) {
  check_eta(eta);
  if (!(eta > 0.0)) throw std::invalid_argument("tracking check: eta must be positive");
  const int S = mdp.n_states(), A = mdp.n_actions(), H = mdp.horizon();
  const double T = static_cast<double>(critics.size());

  TrackingCheck out;
  out.rhs = eta * H * H * H * T / 2.0 + H * std::log(static_cast<double>(A)) / eta;

  const std::vector<double> occ = occupancy_measures(mdp, comparator);
  std::vector<double> state_mass(static_cast<std::size_t>(H) * S, 0.0);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) state_mass[static_cast<std::size_t>(h) * S + s] += occ[mdp.index(h, s, a)];

  SoftmaxPolicy pi = SoftmaxPolicy::uniform(S, A, H, eta);
  std::vector<double> p(A), p_star(A);
  for (const Critic& f : critics) {
    for (int h = 0; h < H; ++h) {
      for (int s = 0; s < S; ++s) {
        const double m = state_mass[static_cast<std::size_t>(h) * S + s];
        if (m == 0.0) continue;
        pi.action_probs(h, s, p);
        comparator.action_probs(h, s, p_star);
        double inner = 0.0;
        for (int a = 0; a < A; ++a) inner += f.value(h, s, a) * (p_star[a] - p[a]);
        out.lhs += m * inner;
      }
    }
    pi.mirror_ascent_step(f, eta);
  }
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

}  // namespace acbench
