#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "acbench/envs.hpp"
#include "acbench/oracle.hpp"
#include "acbench/policy.hpp"
#include "oracles.hpp"

using namespace acbench;

namespace {

double max_prob_gap(const SoftmaxPolicy& a, const SoftmaxPolicy& b) {
  double gap = 0.0;
  for (int h = 0; h < a.horizon(); ++h)
    for (int s = 0; s < a.n_states(); ++s) {
      const auto pa = a.action_probs(h, s), pb = b.action_probs(h, s);
      for (std::size_t i = 0; i < pa.size(); ++i) gap = std::max(gap, std::abs(pa[i] - pb[i]));
    }
  return gap;
}

}  // namespace

TEST_CASE("softmax") {
  std::vector<double> out(2);
  SUBCASE("zero logits are uniform") {
    std::vector<double> q(4);
    softmax(std::vector<double>(4, 0.0), q);
    for (double p : q) CHECK(p == 0.25);
  }
  SUBCASE("large logits do not overflow") {
    softmax(std::vector<double>{1000.0, 0.0}, out);
    CHECK(out[0] == 1.0);
    CHECK(out[1] < 1e-300);
    softmax(std::vector<double>{-1000.0, -1001.0}, out);
    CHECK(out[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
  }
  SUBCASE("(1,2,3) against long double evaluation") {
    const std::vector<double> l = {1.0, 2.0, 3.0};
    std::vector<double> q(3);
    softmax(l, q);
    long double z = std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(q[i] - static_cast<double>(std::exp(static_cast<long double>(l[i])) / z)) < 1e-15);
  }
  SUBCASE("-inf entries get no mass") {
    const double ninf = -std::numeric_limits<double>::infinity();
    softmax(std::vector<double>{ninf, 3.0}, out);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 1.0);
  }
}

TEST_CASE("mirror ascent step") {
  std::mt19937_64 rng(21);
  SUBCASE("ln 2 step on (1, 0) gives (2/3, 1/3)") {
    SoftmaxPolicy pi = SoftmaxPolicy::uniform(1, 2, 1, 0.1);
    Critic f = Critic::tabular(1, 2, 1);
    f.set_table(0, 0, 0, 1.0);
    pi.mirror_ascent_step(f, std::log(2.0));
    const auto p = pi.action_probs(0, 0);
    CHECK(p[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  }
  SUBCASE("critic constant across actions leaves probabilities unchanged") {
    SoftmaxPolicy pi = oracle::random_policy(rng, 3, 3, 2);
    const SoftmaxPolicy before = pi;
    Critic f = Critic::tabular(3, 3, 2);
    for (int h = 0; h < 2; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 3; ++a) f.set_table(h, s, a, 0.3 * s + h);
    pi.mirror_ascent_step(f, 0.7);
    CHECK(max_prob_gap(pi, before) < 1e-14);
  }
  SUBCASE("shift invariance per (h,s)") {
    const Critic f = oracle::random_critic(rng, 3, 2, 3);
    Critic g = f;
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) g.set_table(h, s, a, f.value(h, s, a) + 1.5 * s - h);
    SoftmaxPolicy p1 = SoftmaxPolicy::uniform(3, 2, 3, 0.3), p2 = p1;
    p1.mirror_ascent_step(f);
    p2.mirror_ascent_step(g);
    CHECK(max_prob_gap(p1, p2) < 1e-12);
  }
  SUBCASE("repeated updates push the argmax probability to one monotonically") {
    SoftmaxPolicy pi = SoftmaxPolicy::uniform(1, 3, 1, 0.5);
    Critic f = Critic::tabular(1, 3, 1);
    f.set_table(0, 0, 0, 0.2);
    f.set_table(0, 0, 1, 0.9);
    f.set_table(0, 0, 2, 0.4);
    double last = pi.action_probs(0, 0)[1];
    for (int i = 0; i < 200; ++i) {
      pi.mirror_ascent_step(f);
      const double p = pi.action_probs(0, 0)[1];
      CHECK(p >= last);
      last = p;
    }
    CHECK(last > 1.0 - 1e-9);
  }
  SUBCASE("logits accumulate eta times the critic sum") {
    SoftmaxPolicy pi = SoftmaxPolicy::uniform(2, 2, 2, 0.25);
    std::vector<double> sum(8, 0.0);
    for (int t = 0; t < 5; ++t) {
      const Critic f = oracle::random_critic(rng, 2, 2, 2);
      for (std::size_t i = 0; i < 8; ++i) sum[i] += f.table()[i];
      pi.mirror_ascent_step(f);
    }
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(pi.logits()[i] - 0.25 * sum[i]) < 1e-14);
  }
  SUBCASE("invalid step sizes are rejected; eta = 0 is a no-op") {
    SoftmaxPolicy pi = SoftmaxPolicy::uniform(2, 2, 1, 0.1);
    const Critic f = oracle::random_critic(rng, 2, 2, 1);
    CHECK_THROWS_AS(pi.mirror_ascent_step(f, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(pi.mirror_ascent_step(f, std::nan("")), std::invalid_argument);
    pi.mirror_ascent_step(f, 0.0);
    for (double l : pi.logits()) CHECK(l == 0.0);
  }
  SUBCASE("linear logits follow phi^T (eta w)") {
    const Environment env = make_environment(preset_config("random-lin"), "random-lin");
    const FeatureMap& phi = *env.features;
    SoftmaxPolicy pi = SoftmaxPolicy::uniform_linear(phi, 0.5);
    Critic f = Critic::linear(phi);
    for (int h = 0; h < phi.horizon(); ++h) f.set_weights(h, Eigen::VectorXd::LinSpaced(phi.dim(), -1.0, 1.0));
    pi.mirror_ascent_step(f);
    pi.mirror_ascent_step(f);
    for (int s = 0; s < phi.n_states(); ++s)
      for (int a = 0; a < phi.n_actions(); ++a)
        CHECK(pi.logit(1, s, a) == doctest::Approx(1.0 * f.value(1, s, a)).epsilon(1e-12));
  }
}

TEST_CASE("reset_uniform") {
  std::mt19937_64 rng(22);
  SoftmaxPolicy pi = SoftmaxPolicy::uniform(3, 3, 2, 0.4);
  const Critic f = oracle::random_critic(rng, 3, 3, 2);
  pi.mirror_ascent_step(f);
  pi.reset_uniform();
  CHECK(pi.reset_count() == 1);
  for (double l : pi.logits()) CHECK(l == 0.0);
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 3; ++s)
      for (double p : pi.action_probs(h, s)) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-15));
  pi.mirror_ascent_step(f);
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 3; ++s) {
      const auto p = pi.action_probs(h, s);
      double z = 0.0;
      for (int a = 0; a < 3; ++a) z += std::exp(0.4 * f.value(h, s, a));
      for (int a = 0; a < 3; ++a) CHECK(std::abs(p[a] - std::exp(0.4 * f.value(h, s, a)) / z) < 1e-14);
    }
  pi.reset_uniform();
  CHECK(pi.reset_count() == 2);
}

TEST_CASE("action probabilities sum to one") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    SoftmaxPolicy pi = SoftmaxPolicy::uniform(3, 4, 2, 3.0);
    for (int t = 0; t < 10; ++t) pi.mirror_ascent_step(oracle::random_critic(rng, 3, 4, 2));
    for (int h = 0; h < 2; ++h)
      for (int s = 0; s < 3; ++s) {
        double total = 0.0;
        for (double p : pi.action_probs(h, s)) total += p;
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
  }
}

TEST_CASE("greedy policy") {
  std::mt19937_64 rng(24);
  SUBCASE("zero critic plays action 0") {
    const SoftmaxPolicy g = greedy_policy(Critic::tabular(2, 3, 2));
    for (int h = 0; h < 2; ++h)
      for (int s = 0; s < 2; ++s) CHECK(g.action_probs(h, s)[0] == 1.0);
  }
  SUBCASE("greedy on Q* of the deterministic chain attains V*") {
    const TabularMdp m = make_chain(5, 8, 0.0);
    const ValueTables q = dp_solve_optimal(m);
    CHECK(policy_value(m, greedy_policy(critic_from_values(q))) == doctest::Approx(5.0).epsilon(1e-14));
  }
  SUBCASE("positive scaling keeps the greedy policy") {
    const Critic f = oracle::random_critic(rng, 3, 3, 3);
    Critic g = f;
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 3; ++a) g.set_table(h, s, a, 3.7 * f.value(h, s, a));
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s) CHECK(greedy_action(f, h, s) == greedy_action(g, h, s));
  }
}

TEST_CASE("mirror tracking check") {
  std::mt19937_64 rng(25);
  const TabularMdp m = oracle::random_mdp(rng, 3, 2, 3);
  const auto best = oracle::brute_force_optimum(m);
  const SoftmaxPolicy star = SoftmaxPolicy::deterministic(3, 2, 3, best.actions);
  SUBCASE("T = 0") {
    const TrackingCheck c = mirror_tracking_check({}, star, m, 0.1);
    CHECK(c.lhs == 0.0);
    CHECK(c.rhs == doctest::Approx(3 * std::log(2.0) / 0.1));
  }
  SUBCASE("constant critics give zero lhs") {
    Critic f = Critic::tabular(3, 2, 3);
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) f.set_table(h, s, a, 1.25);
    const TrackingCheck c = mirror_tracking_check(std::vector<Critic>(10, f), star, m, 0.1);
    CHECK(std::abs(c.lhs) < 1e-12);
  }
  SUBCASE("bound holds for random sequences") {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Critic> critics;
      for (int t = 0; t < 100; ++t) critics.push_back(oracle::random_critic(rng, 3, 2, 3));
      const TrackingCheck c = mirror_tracking_check(critics, star, m, 0.1);
      CHECK(c.lhs <= c.rhs);
    }
  }
}

TEST_CASE("KL three-point identity") {
  std::mt19937_64 rng(26);
  auto draw = [&] {
    std::vector<double> p(3);
    double z = 0.0;
    for (double& x : p) z += x = oracle::unif(rng) + 0.01;
    for (double& x : p) x /= z;
    return p;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto pi = draw(), p1 = draw(), p2 = draw();
    double lhs = 0.0;
    for (int i = 0; i < 3; ++i) lhs += (p1[i] - pi[i]) * (std::log(pi[i]) - std::log(p2[i]));
    const double rhs = -kl_divergence(p1, pi) + kl_divergence(p1, p2) - kl_divergence(pi, p2);
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
  CHECK(std::isinf(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0})));
}
