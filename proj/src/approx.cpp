#include "acbench/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace acbench {

void StepDataset::append(const Transition& t) {
  if (t.step != step_) throw std::invalid_argument("dataset: transition step does not match");
  transitions_.push_back(t);
  Cell& c = cells_[{t.state, t.action}];
  ++c.count;
  c.reward_sum += t.reward;
  ++c.next_counts[t.next_state];
}

void StepDataset::append_all(const StepDataset& other) {
  for (const Transition& t : other.transitions()) append(t);
}

Buffers make_buffers(int horizon) {
  Buffers b;
  b.reserve(horizon);
  for (int h = 0; h < horizon; ++h) b.emplace_back(h);
  return b;
}

void append_trajectory(Buffers& buffers, const Trajectory& traj) {
  for (const Transition& t : traj.transitions) buffers.at(t.step).append(t);
}

Buffers merge(const Buffers& online, const Buffers& offline) {
  if (offline.empty()) return online;
  if (online.size() != offline.size()) throw std::invalid_argument("merge: horizon mismatch");
  Buffers out = online;
  for (std::size_t h = 0; h < out.size(); ++h) out[h].append_all(offline[h]);
  return out;
}

double next_value(const Critic& f, const TdTarget& target, int h, int s) {
  if (s == kTerminalState || h >= f.horizon()) return 0.0;
  if (target.mode == TdTarget::Mode::Policy) {
    if (!target.policy) throw std::invalid_argument("td target: policy mode needs a policy");
    return policy_average(f, *target.policy, h, s);
  }
  double best = f.value(h, s, 0);
  for (int a = 1; a < f.n_actions(); ++a) best = std::max(best, f.value(h, s, a));
  return best;
}

double td_loss(const Critic& f, const Critic& f_next, const TdTarget& target,
               const StepDataset& data) {
  if (f.n_states() != f_next.n_states() || f.n_actions() != f_next.n_actions() ||
      f.horizon() != f_next.horizon())
    throw std::invalid_argument("td_loss: critic shapes differ");
  const int h = data.step();
  double loss = 0.0;
  for (const Transition& t : data.transitions()) {
    const double e = f.value(h, t.state, t.action) - t.reward -
                     next_value(f_next, target, h + 1, t.next_state);
    loss += e * e;
  }
  return loss;
}

Eigen::VectorXd ridge_fit(std::span<const Eigen::VectorXd> phis, std::span<const double> targets,
                          double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge: lambda must be positive");
  if (phis.size() != targets.size()) throw std::invalid_argument("ridge: size mismatch");
  if (phis.empty()) throw std::invalid_argument("ridge: dimension unknown without samples");
  const Eigen::Index d = phis.front().size();
  Eigen::MatrixXd gram = lambda * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    gram.noalias() += phis[i] * phis[i].transpose();
    b += targets[i] * phis[i];
  }
  return gram.llt().solve(b);
}

Eigen::VectorXd ridge_fit(const StepDataset& data, const FeatureMap& features,
                          std::span<const double> targets, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge: lambda must be positive");
  if (data.size() != targets.size()) throw std::invalid_argument("ridge: size mismatch");
  const int d = features.dim();
  Eigen::MatrixXd gram = lambda * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Transition& t = data.transitions()[i];
    const Eigen::VectorXd& phi = features(t.step, t.state, t.action);
    gram.noalias() += phi * phi.transpose();
    b += targets[i] * phi;
  }
  return gram.llt().solve(b);
}

double ridge_residual(std::span<const Eigen::VectorXd> phis, std::span<const double> targets,
                      double lambda, const Eigen::VectorXd& w) {
  Eigen::VectorXd r = lambda * w;
  for (std::size_t i = 0; i < phis.size(); ++i) r += phis[i] * (phis[i].dot(w) - targets[i]);
  return r.cwiseAbs().maxCoeff();
}

CriticSpec CriticSpec::tabular(int n_states, int n_actions, int horizon) {
  return {CriticKind::Tabular, n_states, n_actions, horizon, nullptr};
}

CriticSpec CriticSpec::linear(const FeatureMap& features) {
  return {CriticKind::Linear, features.n_states(), features.n_actions(), features.horizon(),
          &features};
}

Critic CriticSpec::make() const {
  if (kind == CriticKind::Linear) {
    if (!features) throw std::invalid_argument("critic spec: linear class needs features");
    return Critic::linear(*features);
  }
  return Critic::tabular(n_states, n_actions, horizon);
}

namespace {

// Per-next-state target cache for one backward step.
class TargetCache {
 public:
  TargetCache(const Critic& f, const TdTarget& target, int h)
      : f_(f), target_(target), h_(h), values_(f.n_states(), kUnset) {}

  double operator()(int s) {
    if (s == kTerminalState || h_ >= f_.horizon()) return 0.0;
    double& v = values_[s];
    if (v == kUnset) v = next_value(f_, target_, h_, s);
    return v;
  }

 private:
  static constexpr double kUnset = std::numeric_limits<double>::lowest();
  const Critic& f_;
  const TdTarget& target_;
  int h_;
  std::vector<double> values_;
};

// Sum of regression targets r + target(s') over a cell.
double cell_target_sum(const StepDataset::Cell& c, TargetCache& next) {
  double y = c.reward_sum;
  for (const auto& [s2, n] : c.next_counts) y += n * next(s2);
  return y;
}

struct LinearStep {
  Eigen::MatrixXd gram;  // lambda I + sum n phi phi^T
  Eigen::VectorXd b;
  Eigen::VectorXd w;
};

LinearStep linear_step(const FeatureMap& features, const StepDataset& data, TargetCache& next,
                       double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge: lambda must be positive");
  const int d = features.dim();
  const int h = data.step();
  LinearStep out{lambda * Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d), {}};
  for (const auto& [key, c] : data.cells()) {
    const Eigen::VectorXd& phi = features(h, key.first, key.second);
    out.gram.noalias() += static_cast<double>(c.count) * (phi * phi.transpose());
    out.b += cell_target_sum(c, next) * phi;
  }
  out.w = out.gram.llt().solve(out.b);
  return out;
}

}  // namespace

Critic fit_backward(const CriticSpec& spec, const Buffers& data, const TdTarget& target,
                    const FitOptions& options, FitReport* report) {
  if (static_cast<int>(data.size()) != spec.horizon)
    throw std::invalid_argument("fit: one dataset per step required");
  Critic f = spec.make();
  f.set_clip(options.clip);
  if (options.bonus) f.attach_bonus(*options.bonus);
  for (int h = spec.horizon - 1; h >= 0; --h) {
    if (data[h].step() != h) throw std::invalid_argument("fit: dataset step mismatch");
    TargetCache next(f, target, h + 1);
    if (spec.kind == CriticKind::Tabular) {
      for (const auto& [key, c] : data[h].cells())
        f.set_table(h, key.first, key.second, cell_target_sum(c, next) / c.count);
      continue;
    }
    LinearStep step = linear_step(*spec.features, data[h], next, options.lambda);
    if (report) {
      const double r = (step.gram * step.w - step.b).cwiseAbs().maxCoeff();
      report->max_ridge_residual = std::max(report->max_ridge_residual, r);
    }
    f.set_weights(h, std::move(step.w));
  }
  return f;
}

Critic fqe(const CriticSpec& spec, const Buffers& data, const SoftmaxPolicy& policy,
           double lambda) {
  FitOptions opt;
  opt.lambda = lambda;
  return fit_backward(spec, data, TdTarget::under(policy), opt);
}

Critic fqi(const CriticSpec& spec, const Buffers& data, double lambda) {
  FitOptions opt;
  opt.lambda = lambda;
  return fit_backward(spec, data, TdTarget::max(), opt);
}

double optimistic_eval(const Critic& critic, const BonusState& bonus, int h, int s, int a) {
  const double v = critic.base_value(h, s, a) + bonus.width(h, s, a);
  if (!critic.clip_enabled()) return v;
  return std::clamp(v, 0.0, static_cast<double>(critic.horizon() - h));
}

std::vector<double> log_dets(const BonusState& state) {
  std::vector<double> out(state.horizon());
  for (int h = 0; h < state.horizon(); ++h) out[h] = state.log_det(h);
  return out;
}

bool det_doubling_fires(const BonusState& now, std::span<const double> last_log_dets) {
  for (int h = 0; h < now.horizon(); ++h)
    if (now.log_det(h) - last_log_dets[h] >= std::log(2.0)) return true;
  return false;
}

bool det_doubling_fires(const Eigen::MatrixXd& gram_now, const Eigen::MatrixXd& gram_last) {
  auto logdet = [](const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("det doubling: Gram not SPD");
    double ld = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) ld += std::log(llt.matrixL()(i, i));
    return 2.0 * ld;
  };
  return logdet(gram_now) - logdet(gram_last) >= std::log(2.0);
}

double td_gap(const Critic& f, const TdTarget& target, const StepDataset& data,
              const CriticSpec& spec, double lambda) {
  const int h = data.step();
  TargetCache next(f, target, h + 1);
  // L(g) = sum_cells (n g^2 - 2 g Y) + const, with Y the cell's target sum.
  double loss_f = 0.0, loss_fit = 0.0;
  if (spec.kind == CriticKind::Tabular) {
    for (const auto& [key, c] : data.cells()) {
      const double y = cell_target_sum(c, next);
      const double v = f.value(h, key.first, key.second);
      const double m = y / c.count;
      loss_f += c.count * v * v - 2.0 * v * y;
      loss_fit += c.count * m * m - 2.0 * m * y;
    }
    return loss_f - loss_fit;
  }
  const LinearStep step = linear_step(*spec.features, data, next, lambda);
  for (const auto& [key, c] : data.cells()) {
    const double y = cell_target_sum(c, next);
    const double v = f.value(h, key.first, key.second);
    const double g = (*spec.features)(h, key.first, key.second).dot(step.w);
    loss_f += c.count * v * v - 2.0 * v * y;
    loss_fit += c.count * g * g - 2.0 * g * y;
  }
  return loss_f - loss_fit;
}

std::vector<double> td_gaps(const Critic& f, const TdTarget& target, const Buffers& data,
                            const CriticSpec& spec, double lambda) {
  std::vector<double> out(data.size());
  for (std::size_t h = 0; h < data.size(); ++h) out[h] = td_gap(f, target, data[h], spec, lambda);
  return out;
}

bool td_gap_fires(std::span<const double> gaps, int horizon, double beta) {
  const double threshold = 5.0 * horizon * horizon * beta;
  return std::any_of(gaps.begin(), gaps.end(), [&](double g) { return g >= threshold; });
}

double default_beta(int n_states, int n_actions, int horizon, int episodes, double delta,
                    double scale) {
  const double n = static_cast<double>(n_states) * n_actions * horizon * std::max(episodes, 1);
  return scale * std::log(n / delta);
}

double default_bonus(CriticKind kind, int horizon, int dim, int episodes, double delta) {
  if (kind == CriticKind::Tabular) return horizon;
  return 0.5 * horizon * std::sqrt(dim * std::log(std::max(episodes, 1) / delta));
}

Critic confidence_set_critic(const Buffers& data, int n_states, int n_actions, int horizon,
                             double beta) {
  if (n_states * n_actions > 12)
    throw std::invalid_argument("confidence set: enumeration limited to S*A <= 12");
  if (static_cast<int>(data.size()) != horizon)
    throw std::invalid_argument("confidence set: one dataset per step required");
  const double H = horizon;
  const double grid[] = {0.0, 0.25 * H, 0.5 * H, 0.75 * H, H};
  Critic f = Critic::tabular(n_states, n_actions, horizon);
  const TdTarget target = TdTarget::max();
  for (int h = horizon - 1; h >= 0; --h) {
    for (int s = 0; s < n_states; ++s)
      for (int a = 0; a < n_actions; ++a) f.set_table(h, s, a, H);
    TargetCache next(f, target, h + 1);
    for (const auto& [key, c] : data[h].cells()) {
      // Per-sample squared errors against each grid value.
      double loss[5];
      for (int g = 0; g < 5; ++g) {
        double l = 0.0;
        const double r = c.reward_sum / c.count;
        for (const auto& [s2, n] : c.next_counts) {
          const double e = grid[g] - r - next(s2);
          l += n * e * e;
        }
        loss[g] = l;
      }
      const double best = *std::min_element(loss, loss + 5);
      double top = 0.0;
      for (int g = 0; g < 5; ++g)
        if (loss[g] - best <= beta) top = grid[g];
      f.set_table(h, key.first, key.second, top);
    }
  }
  return f;
}

}  // namespace acbench
