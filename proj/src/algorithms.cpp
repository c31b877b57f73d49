#include "acbench/algorithms.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "acbench/oracle.hpp"
#include "acbench/policy.hpp"
#include "acbench/rng.hpp"

namespace acbench {

namespace {

struct NamedAlgo {
  Algo algo;
  const char* name;
};

constexpr NamedAlgo kAlgoNames[] = {
    {Algo::Douhua, "douhua"},         {Algo::Nora, "nora"},
    {Algo::NoraPi, "nora-pi"},        {Algo::NoahPi, "noah-pi"},
    {Algo::NoahStar, "noah-star"},    {Algo::HybridNora, "hybrid-nora"},
    {Algo::LsviUcbRs, "lsvi-ucb-rs"},
};

enum class Cadence { EveryEpisode, RareSwitch };
enum class Actor { Softmax, Greedy };

// What distinguishes the seven loops.
struct Shape {
  TdTarget::Mode target;
  Cadence cadence;
  bool reset_on_switch;
  Actor actor;
  bool optimistic;
};

Shape shape_of(Algo algo) {
  using M = TdTarget::Mode;
  switch (algo) {
    case Algo::Douhua:
      return {M::Policy, Cadence::EveryEpisode, false, Actor::Softmax, true};
    case Algo::Nora:
    case Algo::HybridNora:
      return {M::Max, Cadence::RareSwitch, true, Actor::Softmax, true};
    case Algo::NoraPi:
      return {M::Policy, Cadence::RareSwitch, false, Actor::Softmax, true};
    case Algo::NoahPi:
      return {M::Policy, Cadence::EveryEpisode, false, Actor::Softmax, false};
    case Algo::NoahStar:
      return {M::Max, Cadence::RareSwitch, true, Actor::Softmax, false};
    case Algo::LsviUcbRs:
      return {M::Max, Cadence::RareSwitch, false, Actor::Greedy, true};
  }
  throw std::invalid_argument("unknown algorithm");
}

SwitchRule default_switch_rule(Algo algo) {
  return algo == Algo::NoahStar ? SwitchRule::TdGap : SwitchRule::DetDoubling;
}

RunResult run_loop(const Environment& env, const AlgoConfig& cfg, const OfflineDataset* offline) {
  if (cfg.episodes < 1) throw std::invalid_argument("algo: need at least one episode");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("algo: lambda must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw std::invalid_argument("algo: delta in (0,1)");
  if (cfg.snapshot_every < 1) throw std::invalid_argument("algo: snapshot interval must be >= 1");

  const TabularMdp& mdp = env.mdp;
  const int S = mdp.n_states(), A = mdp.n_actions(), H = mdp.horizon(), T = cfg.episodes;
  const Shape shape = shape_of(cfg.algo);

  if (needs_offline(cfg.algo)) {
    if (!offline && !cfg.allow_empty_offline)
      throw std::invalid_argument(to_string(cfg.algo) +
                                  " needs an offline dataset (or allow_empty_offline)");
  } else {
    offline = nullptr;
  }
  if (offline) validate_offline(*offline, mdp);

  const CriticKind kind = cfg.critic.value_or(env.features ? CriticKind::Linear : CriticKind::Tabular);
  if (kind == CriticKind::Linear && !env.features)
    throw std::invalid_argument("algo: linear critic requested on an env without features");
  const CriticSpec spec = kind == CriticKind::Linear ? CriticSpec::linear(*env.features)
                                                     : CriticSpec::tabular(S, A, H);
  const int dim = kind == CriticKind::Linear ? env.features->dim() : S * A;
  if (cfg.confidence_set && (cfg.algo != Algo::Nora || kind != CriticKind::Tabular))
    throw std::invalid_argument("algo: the confidence-set critic is only wired into tabular nora");

  RunResult out;
  out.algo = cfg.algo;
  out.env_name = env.name;
  out.config = cfg;
  out.v_star = dp_solve_optimal(mdp).v_at(0, mdp.initial_state());
  out.v_uniform = policy_value(mdp, SoftmaxPolicy::uniform(S, A, H, 0.0));
  out.eta = cfg.eta ? *cfg.eta : default_eta(cfg.algo, A, H, T, dim, cfg.eta_scale);
  out.beta = cfg.beta ? *cfg.beta
                      : default_beta(kind == CriticKind::Linear ? dim : S, kind == CriticKind::Linear ? 1 : A,
                                     H, T, cfg.delta, cfg.beta_scale);
  out.bonus = cfg.bonus ? *cfg.bonus
                        : (shape.optimistic ? default_bonus(kind, H, dim, T, cfg.delta) : 0.0);
  out.switch_rule = shape.cadence == Cadence::RareSwitch
                        ? cfg.switch_rule.value_or(default_switch_rule(cfg.algo))
                        : SwitchRule::Never;
  const bool clip = cfg.clip.value_or(kind == CriticKind::Tabular);

  Buffers data = offline ? offline->steps : make_buffers(H);
  BonusState live = kind == CriticKind::Linear
                        ? BonusState::linear(*env.features, cfg.lambda, out.bonus)
                        : BonusState::tabular(S, A, H, cfg.lambda, out.bonus);
  for (const auto& step : data)
    for (const Transition& tr : step.transitions()) live.observe(tr.step, tr.state, tr.action);

  SoftmaxPolicy pi = SoftmaxPolicy::uniform(S, A, H, out.eta);
  auto target = [&] {
    return shape.target == TdTarget::Mode::Max ? TdTarget::max() : TdTarget::under(pi);
  };
  FitReport report;
  auto fit = [&] {
    if (cfg.confidence_set) return confidence_set_critic(data, S, A, H, out.beta);
    FitOptions opt;
    opt.lambda = cfg.lambda;
    opt.clip = clip;
    opt.bonus = out.bonus > 0.0 ? &live : nullptr;
    return fit_backward(spec, data, target(), opt, &report);
  };

  Critic critic = fit();
  std::vector<double> values = critic.evaluate_all();
  std::vector<double> last_log_dets = log_dets(live);
  SoftmaxPolicy greedy = greedy_policy(critic);
  if (shape.cadence == Cadence::EveryEpisode) out.refits = 1;

  Rng rng(cfg.seed);
  out.records.reserve(T);
  double cum_regret = 0.0;
  int cum_switches = 0;
  for (int t = 1; t <= T; ++t) {
    if (shape.cadence == Cadence::EveryEpisode && t > 1) {
      critic = fit();
      values = critic.evaluate_all();
      ++out.refits;
    }
    if ((t - 1) % cfg.snapshot_every == 0) out.snapshots.push_back({t, critic});

    const SoftmaxPolicy& played = shape.actor == Actor::Greedy ? greedy : pi;
    EpisodeRecord rec;
    rec.t = t;
    rec.regret = out.v_star - policy_value(mdp, played);
    const Trajectory traj = sample_episode(mdp, played, rng, t);
    rec.reward = traj.total_reward();
    append_trajectory(data, traj);
    for (const Transition& tr : traj.transitions) live.observe(tr.step, tr.state, tr.action);

    if (shape.cadence == Cadence::RareSwitch) {
      bool fire = false;
      if (out.switch_rule == SwitchRule::DetDoubling) fire = det_doubling_fires(live, last_log_dets);
      if (out.switch_rule == SwitchRule::TdGap || cfg.track_td_gaps) {
        rec.td_gaps = td_gaps(critic, target(), data, spec, cfg.lambda);
        if (out.switch_rule == SwitchRule::TdGap) fire = td_gap_fires(rec.td_gaps, H, out.beta);
      }
      if (fire && !cfg.freeze_trigger) {
        critic = fit();
        values = critic.evaluate_all();
        last_log_dets = log_dets(live);
        ++out.refits;
        rec.switched = true;
        if (shape.reset_on_switch) {
          pi.reset_uniform();
          rec.reset = true;
          ++out.resets;
        }
        if (shape.actor == Actor::Greedy) greedy = greedy_policy(critic);
      }
    } else if (cfg.track_td_gaps) {
      rec.td_gaps = td_gaps(critic, target(), data, spec, cfg.lambda);
    }
    if (shape.actor == Actor::Softmax) {
      const double eta = cfg.anytime_eta && !cfg.eta
                             ? default_eta(cfg.algo, A, H, t, dim, cfg.eta_scale)
                             : out.eta;
      pi.mirror_ascent_step(values, eta);
    }

    cum_regret += rec.regret;
    cum_switches += rec.switched ? 1 : 0;
    rec.cum_regret = cum_regret;
    rec.cum_switches = cum_switches;
    out.records.push_back(std::move(rec));
  }
  out.max_ridge_residual = report.max_ridge_residual;
  return out;
}

}  // namespace

std::string to_string(Algo algo) {
  for (const auto& n : kAlgoNames)
    if (n.algo == algo) return n.name;
  return "unknown";
}

Algo algo_from_string(const std::string& name) {
  for (const auto& n : kAlgoNames)
    if (name == n.name) return n.algo;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string to_string(SwitchRule rule) {
  switch (rule) {
    case SwitchRule::TdGap:
      return "td-gap";
    case SwitchRule::DetDoubling:
      return "det-doubling";
    case SwitchRule::Never:
      return "never";
  }
  return "unknown";
}

SwitchRule switch_rule_from_string(const std::string& name) {
  if (name == "td-gap") return SwitchRule::TdGap;
  if (name == "det-doubling") return SwitchRule::DetDoubling;
  if (name == "never") return SwitchRule::Never;
  throw std::invalid_argument("unknown switch rule '" + name + "'");
}

bool needs_offline(Algo algo) {
  return algo == Algo::NoahPi || algo == Algo::NoahStar || algo == Algo::HybridNora;
}

double default_eta(Algo algo, int n_actions, int horizon, int episodes, int dim, double scale) {
  const double logA = std::log(static_cast<double>(std::max(n_actions, 2)));
  const double T = std::max(episodes, 2);
  if (algo == Algo::Douhua || algo == Algo::NoahPi)
    return scale * std::sqrt(logA / (static_cast<double>(horizon) * horizon * T));
  return scale * std::sqrt(dim * std::log(T) * logA / (horizon * T));
}

AlgoConfig algo_config_from_json(const nlohmann::json& doc) {
  AlgoConfig cfg;
  try {
    if (doc.contains("algo")) cfg.algo = algo_from_string(doc.at("algo").get<std::string>());
    cfg.episodes = doc.value("episodes", cfg.episodes);
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("eta")) cfg.eta = doc.at("eta").get<double>();
    cfg.eta_scale = doc.value("eta_scale", cfg.eta_scale);
    cfg.anytime_eta = doc.value("anytime_eta", cfg.anytime_eta);
    if (doc.contains("beta")) cfg.beta = doc.at("beta").get<double>();
    cfg.beta_scale = doc.value("beta_scale", cfg.beta_scale);
    if (doc.contains("bonus")) cfg.bonus = doc.at("bonus").get<double>();
    cfg.lambda = doc.value("lambda", cfg.lambda);
    cfg.delta = doc.value("delta", cfg.delta);
    if (doc.contains("switch_rule"))
      cfg.switch_rule = switch_rule_from_string(doc.at("switch_rule").get<std::string>());
    if (doc.contains("clip")) cfg.clip = doc.at("clip").get<bool>();
    if (doc.contains("critic")) {
      const auto c = doc.at("critic").get<std::string>();
      if (c == "tabular") cfg.critic = CriticKind::Tabular;
      else if (c == "linear") cfg.critic = CriticKind::Linear;
      else throw std::invalid_argument("unknown critic class '" + c + "'");
    }
    cfg.confidence_set = doc.value("confidence_set", cfg.confidence_set);
    cfg.freeze_trigger = doc.value("freeze_trigger", cfg.freeze_trigger);
    cfg.allow_empty_offline = doc.value("allow_empty_offline", cfg.allow_empty_offline);
    cfg.snapshot_every = doc.value("snapshot_every", cfg.snapshot_every);
    cfg.track_td_gaps = doc.value("track_td_gaps", cfg.track_td_gaps);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("algo config: ") + e.what());
  }
  if (cfg.episodes < 1) throw std::invalid_argument("algo config: episodes must be >= 1");
  if (cfg.eta && !(std::isfinite(*cfg.eta) && *cfg.eta >= 0.0))
    throw std::invalid_argument("algo config: eta must be finite and >= 0");
  if (cfg.bonus && !(*cfg.bonus >= 0.0)) throw std::invalid_argument("algo config: bonus must be >= 0");
  return cfg;
}

RunResult run_algorithm(const Environment& env, const AlgoConfig& cfg,
                        const OfflineDataset* offline) {
  return run_loop(env, cfg, offline);
}

RunResult run_douhua(const Environment& env, AlgoConfig cfg) {
  cfg.algo = Algo::Douhua;
  return run_loop(env, cfg, nullptr);
}

RunResult run_nora(const Environment& env, AlgoConfig cfg) {
  cfg.algo = Algo::Nora;
  return run_loop(env, cfg, nullptr);
}

RunResult run_nora_pi(const Environment& env, AlgoConfig cfg) {
  cfg.algo = Algo::NoraPi;
  return run_loop(env, cfg, nullptr);
}

RunResult run_noah_pi(const Environment& env, AlgoConfig cfg, const OfflineDataset* offline) {
  cfg.algo = Algo::NoahPi;
  return run_loop(env, cfg, offline);
}

RunResult run_noah_star(const Environment& env, AlgoConfig cfg, const OfflineDataset* offline) {
  cfg.algo = Algo::NoahStar;
  return run_loop(env, cfg, offline);
}

RunResult run_hybrid_nora(const Environment& env, AlgoConfig cfg, const OfflineDataset* offline) {
  cfg.algo = Algo::HybridNora;
  return run_loop(env, cfg, offline);
}

RunResult run_lsvi_ucb_rs(const Environment& env, AlgoConfig cfg) {
  cfg.algo = Algo::LsviUcbRs;
  return run_loop(env, cfg, nullptr);
}

}  // namespace acbench
