#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alnf/errors.hpp"
#include "alnf/ppo.hpp"
#include "alnf/rng.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace alnf;

namespace {

ppo::PPOConfig tiny_cfg() {
    ppo::PPOConfig cfg;
    cfg.experiences_per_batch = 8;
    cfg.minibatch_size = 8;
    cfg.update_epochs = 1;
    cfg.actor_lr = 0.0;
    cfg.critic_lr = 0.0;
    cfg.warmup_steps = 0;
    cfg.schedule_total_steps = 10;
    cfg.max_response_tokens = 6;
    return cfg;
}

ppo::PpoTrainer make_trainer(const ppo::PPOConfig& cfg, std::uint64_t seed = 7,
                             int hidden_layers = 1) {
    const synthetic::MarkerTask task;
    auto policy = lm::PolicyModel::init(task.arch(hidden_layers), task.vocab, seed);
    auto reference = policy;
    auto rm = reward::RewardModel::init(task.arch(hidden_layers), task.vocab,
                                        derive_seed(seed, "rm"));
    return ppo::PpoTrainer(std::move(policy), std::move(reference), std::move(rm), cfg);
}

}  // namespace

TEST_CASE("shape_rewards: zero KL leaves only the clipped final score") {
    ppo::PPOConfig cfg;
    const std::vector<double> lp{-1.0, -2.0, -0.5};
    SUBCASE("equal logprob lists") {
        const auto r = ppo::shape_rewards(2.0, lp, lp, cfg);
        CHECK(r == std::vector<double>{0.0, 0.0, 2.0});
    }
    SUBCASE("score clipped to the [-5, 5] range") {
        const auto r = ppo::shape_rewards(9.0, lp, lp, cfg);
        CHECK(r.back() == 5.0);
        const auto r2 = ppo::shape_rewards(-11.0, lp, lp, cfg);
        CHECK(r2.back() == -5.0);
    }
    SUBCASE("per-token KL penalty arithmetic") {
        const std::vector<double> logp{-1.0, -1.0, -1.0};
        const std::vector<double> ref{-1.5, -1.5, -1.5};
        const auto r = ppo::shape_rewards(0.0, logp, ref, cfg);
        for (double v : r) CHECK(v == doctest::Approx(-0.005).epsilon(1e-12));
    }
    SUBCASE("errors") {
        const std::vector<double> shorter{-1.0};
        CHECK_THROWS_AS(ppo::shape_rewards(0.0, lp, shorter, cfg), ShapeMismatch);
        CHECK_THROWS_AS(ppo::shape_rewards(0.0, {}, {}, cfg), EmptyBatch);
    }
    SUBCASE("kl_strategy none disables the penalty") {
        cfg.kl_strategy = ppo::KlStrategy::none;
        const std::vector<double> ref{-9.0, -9.0, -9.0};
        const auto r = ppo::shape_rewards(1.0, lp, ref, cfg);
        CHECK(r == std::vector<double>{0.0, 0.0, 1.0});
    }
}

TEST_CASE("gae: worked examples and reductions") {
    SUBCASE("single step") {
        const auto g = ppo::gae(std::vector<double>{1.0}, std::vector<double>{0.0}, 1.0, 0.95);
        CHECK(g.advantages == std::vector<double>{1.0});
        CHECK(g.returns == std::vector<double>{1.0});
    }
    SUBCASE("terminal reward propagates with gamma*lambda") {
        const auto g = ppo::gae(std::vector<double>{0.0, 0.0, 1.0},
                                std::vector<double>{0.0, 0.0, 0.0}, 1.0, 0.95);
        CHECK(g.advantages[0] == doctest::Approx(0.9025).epsilon(1e-12));
        CHECK(g.advantages[1] == doctest::Approx(0.95).epsilon(1e-12));
        CHECK(g.advantages[2] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("lambda 0 collapses to one-step TD residuals") {
        Rng rng(3);
        std::vector<double> r(6), v(6);
        for (auto& x : r) x = rng.next_double(-1, 1);
        for (auto& x : v) x = rng.next_double(-1, 1);
        const auto g = ppo::gae(r, v, 0.9, 0.0);
        for (std::size_t t = 0; t < r.size(); ++t) {
            const double next_v = t + 1 < v.size() ? v[t + 1] : 0.0;
            CHECK(g.advantages[t] == doctest::Approx(r[t] + 0.9 * next_v - v[t]).epsilon(1e-12));
        }
    }
    SUBCASE("gamma=lambda=1 gives reward-to-go minus value") {
        Rng rng(4);
        std::vector<double> r(5), v(5);
        for (auto& x : r) x = rng.next_double(-1, 1);
        for (auto& x : v) x = rng.next_double(-1, 1);
        const auto g = ppo::gae(r, v, 1.0, 1.0);
        for (std::size_t t = 0; t < r.size(); ++t) {
            double tail = 0.0;
            for (std::size_t l = t; l < r.size(); ++l) tail += r[l];
            CHECK(g.advantages[t] == doctest::Approx(tail - v[t]).epsilon(1e-12));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(ppo::gae({}, {}, 1.0, 0.95), EmptyBatch);
        const std::vector<double> a{1.0}, b{1.0, 2.0};
        CHECK_THROWS_AS(ppo::gae(a, b, 1.0, 0.95), ShapeMismatch);
    }
}

TEST_CASE("gae backward recursion equals the direct double sum") {
    Rng rng(11);
    const std::vector<std::pair<double, double>> settings = {
        {1.0, 0.95}, {1.0, 1.0}, {1.0, 0.0}, {0.99, 0.95}, {0.9, 0.5},  {0.5, 0.9},
        {0.8, 0.0},  {0.7, 1.0}, {1.0, 0.3}, {0.95, 0.97}, {0.6, 0.25},
    };
    for (const auto& [gamma, lambda] : settings) {
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 1 + rng.next_index(12);
            std::vector<double> r(n), v(n);
            for (auto& x : r) x = rng.next_double(-2, 2);
            for (auto& x : v) x = rng.next_double(-2, 2);
            const auto fast = ppo::gae(r, v, gamma, lambda);
            const auto slow = oracle::gae_double_sum(r, v, gamma, lambda);
            for (std::size_t t = 0; t < n; ++t)
                CHECK(fast.advantages[t] == doctest::Approx(slow[t]).epsilon(1e-10));
        }
    }
}

TEST_CASE("clipped_surrogate: worked examples and pessimism bound") {
    CHECK(ppo::clipped_surrogate(1.0, 3.25, 0.2) == 3.25);
    CHECK(ppo::clipped_surrogate(1.0, -0.5, 0.2) == -0.5);
    CHECK(ppo::clipped_surrogate(1.5, 2.0, 0.2) == doctest::Approx(2.4).epsilon(1e-12));
    CHECK(ppo::clipped_surrogate(0.5, -1.0, 0.2) == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK_THROWS_AS(ppo::clipped_surrogate(0.0, 1.0, 0.2), InvalidRatio);
    CHECK_THROWS_AS(ppo::clipped_surrogate(-0.3, 1.0, 0.2), InvalidRatio);

    Rng rng(13);
    for (int trial = 0; trial < 10000; ++trial) {
        const double rho = std::exp(rng.next_double(-2.0, 2.0));
        const double advantage = rng.next_double(-3.0, 3.0);
        const double eps = rng.next_double(0.05, 0.5);
        const double got = ppo::clipped_surrogate(rho, advantage, eps);
        // two-branch oracle
        const double clipped = std::min(std::max(rho, 1.0 - eps), 1.0 + eps);
        CHECK(got == std::min(rho * advantage, clipped * advantage));
        CHECK(got <= rho * advantage);  // pessimism
    }
}

TEST_CASE("value_loss: worked examples") {
    const std::vector<double> v_old{1.0, 1.0};
    SUBCASE("exact fit is zero") {
        CHECK(ppo::value_loss(v_old, v_old, v_old, 0.3) == 0.0);
    }
    SUBCASE("large move keeps the unclipped square") {
        const std::vector<double> v_new{11.0, 11.0};
        CHECK(ppo::value_loss(v_new, v_old, v_old, 0.3) == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("inactive clip is plain squared error") {
        const std::vector<double> v_new{1.2, 0.9};
        const std::vector<double> ret{1.0, 1.0};
        const double expected = (0.2 * 0.2 + 0.1 * 0.1) / 2.0;
        CHECK(ppo::value_loss(v_new, v_old, ret, 0.3) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("errors") {
        const std::vector<double> shorter{1.0};
        CHECK_THROWS_AS(ppo::value_loss(shorter, v_old, v_old, 0.3), ShapeMismatch);
    }
}

TEST_CASE("ppo config invariants") {
    ppo::PPOConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.clip_epsilon = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ppo::PPOConfig{};
    cfg.minibatch_size = cfg.experiences_per_batch + 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ppo::PPOConfig{};
    cfg.reward_clip_low = 5.0;
    cfg.reward_clip_high = -5.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ppo::PPOConfig{};
    cfg.lambda = 1.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("ppo_step: zero learning rates leave the policy unchanged") {
    ppo::PpoTrainer trainer = make_trainer(tiny_cfg(), 17);
    const std::vector<double> before = trainer.policy().params;
    const synthetic::MarkerTask task;
    const auto prompts = task.ppo_prompts(4, 3);
    const ppo::StepMetrics m = trainer.step(prompts, 5);
    CHECK(trainer.policy().params == before);
    CHECK(m.experiences == 8);
    CHECK(m.response_tokens > 0);
    CHECK(std::isfinite(m.mean_raw_reward));
    CHECK(std::isfinite(m.mean_shaped_reward));
    CHECK(std::isfinite(m.mean_kl));
}

TEST_CASE("ppo_step: first update pass sees rho = 1 and zero clip fraction") {
    ppo::PPOConfig cfg = tiny_cfg();
    cfg.actor_lr = 1e-3;
    cfg.critic_lr = 1e-3;
    // one minibatch per step, so the reported fraction is exactly the first pass
    ppo::PpoTrainer trainer = make_trainer(cfg, 29);
    const synthetic::MarkerTask task;
    const ppo::StepMetrics m = trainer.step(task.ppo_prompts(4, 9), 77);
    CHECK(m.surrogate_clip_fraction == 0.0);
}

TEST_CASE("ppo step determinism") {
    const synthetic::MarkerTask task;
    ppo::PPOConfig cfg = tiny_cfg();
    cfg.actor_lr = 1e-3;
    cfg.critic_lr = 1e-2;
    cfg.minibatch_size = 4;
    cfg.update_epochs = 2;
    ppo::PpoTrainer a = make_trainer(cfg, 31);
    ppo::PpoTrainer b = make_trainer(cfg, 31);
    const auto prompts = task.ppo_prompts(4, 3);
    for (int i = 0; i < 3; ++i) {
        a.step(prompts, 100 + i);
        b.step(prompts, 100 + i);
    }
    CHECK(a.policy().params == b.policy().params);
}

TEST_CASE("full ppo loss gradient passes grad_check on a toy trajectory") {
    const synthetic::MarkerTask task;
    for (int layers : {1, 2}) {
        auto policy = lm::PolicyModel::init(task.arch(layers), task.vocab, 57 + layers);
        ppo::PPOConfig cfg;
        cfg.experiences_per_batch = 2;
        cfg.minibatch_size = 2;

        // Hand-built 2-token trajectory with off-policy old logprobs so the
        // ratio path is exercised away from rho = 1.
        ppo::Trajectory traj;
        traj.prompt = {0, 5};
        traj.response = {7, 1};
        const TokenSeq full = concat(traj.prompt, traj.response);
        const auto lp = policy.log_probs(full);
        const auto vals = policy.values(full);
        traj.logprobs_old = {lp[1] + 0.05, lp[2] - 0.03};
        traj.logprobs_ref = {lp[1], lp[2]};
        traj.values = {vals[1], vals[2]};
        traj.rm_score_raw = 1.3;
        traj.rewards = ppo::shape_rewards(traj.rm_score_raw, traj.logprobs_old,
                                          traj.logprobs_ref, cfg);
        auto g = ppo::gae(traj.rewards, traj.values, cfg.gamma, cfg.lambda);
        traj.advantages = g.advantages;
        traj.returns = g.returns;

        ppo::Trajectory second = traj;
        second.prompt = {0, 9};
        second.response = {4, 12};
        const TokenSeq full2 = concat(second.prompt, second.response);
        const auto lp2 = policy.log_probs(full2);
        const auto vals2 = policy.values(full2);
        second.logprobs_old = {lp2[1] - 0.02, lp2[2] + 0.04};
        second.logprobs_ref = {lp2[1], lp2[2]};
        second.values = {vals2[1], vals2[2]};
        second.rm_score_raw = -0.7;
        second.rewards = ppo::shape_rewards(second.rm_score_raw, second.logprobs_old,
                                            second.logprobs_ref, cfg);
        g = ppo::gae(second.rewards, second.values, cfg.gamma, cfg.lambda);
        second.advantages = g.advantages;
        second.returns = g.returns;

        const std::vector<ppo::Trajectory> batch{traj, second};
        auto loss = [&](std::span<const double> p) {
            lm::PolicyModel probe = policy;
            probe.params.assign(p.begin(), p.end());
            return ppo::ppo_loss_eval(probe, batch, cfg);
        };
        CHECK(lm::grad_check(policy.params, loss, 1e-5) < 1e-4);
    }
}

TEST_CASE("whitened advantages are centered with unit scale") {
    ppo::PPOConfig cfg = tiny_cfg();
    cfg.whiten_advantages = true;
    cfg.experiences_per_batch = 16;
    cfg.minibatch_size = 16;
    ppo::PpoTrainer trainer = make_trainer(cfg, 19);
    const synthetic::MarkerTask task;
    const auto batch = trainer.sample_batch(task.ppo_prompts(4, 3), 11);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& traj : batch) {
        for (double a : traj.advantages) {
            sum += a;
            ++count;
        }
    }
    const double mean = sum / static_cast<double>(count);
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    double var = 0.0;
    for (const auto& traj : batch)
        for (double a : traj.advantages) var += (a - mean) * (a - mean);
    // scale is sd/(sd + 1e-8), just shy of exactly 1
    CHECK(std::sqrt(var / static_cast<double>(count)) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("ppo: non-finite parameters surface as NumericalFailure with a step") {
    const synthetic::MarkerTask task;
    auto policy = lm::PolicyModel::init(task.arch(), task.vocab, 3);
    // Corrupt a layer-1 bias so every forward pass goes non-finite.
    policy.params[policy.layout().b1] = std::numeric_limits<double>::quiet_NaN();
    auto reference = lm::PolicyModel::init(task.arch(), task.vocab, 3);
    auto rm = reward::RewardModel::init(task.arch(), task.vocab, 4);
    ppo::PpoTrainer trainer(std::move(policy), std::move(reference), std::move(rm), tiny_cfg());
    const auto prompts = task.ppo_prompts(2, 1);
    try {
        trainer.step(prompts, 9);
        FAIL("expected NumericalFailure");
    } catch (const NumericalFailure& e) {
        CHECK(e.step() == 0);
    }
}

TEST_CASE("ppo: prompt plus response budget must fit the context window") {
    const synthetic::MarkerTask task;
    ppo::PPOConfig cfg = tiny_cfg();
    cfg.max_response_tokens = 60;  // 3 + 60 > 48
    ppo::PpoTrainer trainer = make_trainer(cfg, 5);
    const auto prompts = task.ppo_prompts(2, 2);
    CHECK_THROWS_AS(trainer.step(prompts, 1), ContextOverflow);
}

TEST_CASE("synthetic marker task improves mean raw reward over 30 steps") {
    const synthetic::MarkerTask task;

    // Reward model trained to prefer marker-bearing responses.
    const auto pairs = task.preference_pairs(400, 101);
    reward::RewardTrainConfig rm_cfg;
    rm_cfg.max_learning_rate = 0.02;
    rm_cfg.epochs = 8;
    rm_cfg.batch_size = 32;
    rm_cfg.holdout_fraction = 0.1;
    const auto trained =
        reward::train_reward(reward::RewardModel::init(task.arch(), task.vocab, 7), pairs,
                             rm_cfg, 13);
    REQUIRE(trained.final_holdout_accuracy >= 0.95);

    ppo::PPOConfig cfg;
    cfg.experiences_per_batch = 64;
    cfg.minibatch_size = 32;
    cfg.update_epochs = 1;
    cfg.actor_lr = 5e-3;
    cfg.critic_lr = 5e-2;
    cfg.warmup_steps = 5;
    cfg.schedule_total_steps = 60;
    cfg.max_response_tokens = 12;

    auto policy = lm::PolicyModel::init(task.arch(), task.vocab, 51);
    auto reference = policy;
    ppo::PpoTrainer trainer(std::move(policy), std::move(reference), trained.model, cfg);
    const auto prompts = task.ppo_prompts(16, 71);

    double first = 0.0, last = 0.0;
    for (int i = 0; i < 30; ++i) {
        const ppo::StepMetrics m = trainer.step(prompts, derive_seed(2024, "step", i));
        if (i == 0) first = m.mean_raw_reward;
        last = m.mean_raw_reward;
        CHECK(std::isfinite(m.mean_kl));
        CHECK(m.mean_kl < 20.0);
    }
    CHECK(last > first);
}
