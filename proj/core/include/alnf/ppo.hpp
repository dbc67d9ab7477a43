#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alnf/optim.hpp"
#include "alnf/reward.hpp"
#include "alnf/tinylm.hpp"

namespace alnf::ppo {

enum class KlStrategy {
    reward_shaping,  // per-token penalty folded into the shaped rewards
    none,
};

struct PPOConfig {
    double clip_epsilon = 0.2;
    double value_clip = 0.3;
    double kl_coef = 0.01;
    double reward_clip_low = -5.0;
    double reward_clip_high = 5.0;
    double gamma = 1.0;
    double lambda = 0.95;
    int experiences_per_batch = 448;
    int minibatch_size = 224;
    int update_epochs = 1;
    double actor_lr = 5e-7;
    double critic_lr = 5e-6;
    int warmup_steps = 100;           // optimizer steps
    int schedule_total_steps = 1000;  // cosine horizon, optimizer steps
    int max_response_tokens = 16;
    double sample_temperature = 1.0;
    bool whiten_advantages = false;
    double kl_ceiling = 20.0;  // monitoring only, nats per sequence
    KlStrategy kl_strategy = KlStrategy::reward_shaping;

    void validate() const;
};

/// One sampled episode with everything the update pass needs. All per-token
/// lists share length = |response|.
struct Trajectory {
    TokenSeq prompt;
    TokenSeq response;
    std::vector<double> logprobs_old;  // under the sampling policy
    std::vector<double> logprobs_ref;  // under the frozen reference
    std::vector<double> values;        // V(s_t) before generating token t
    std::vector<double> rewards;       // shaped
    std::vector<double> advantages;
    std::vector<double> returns;
    double rm_score_raw = 0.0;
};

/// r_t = -kl_coef * (logprob_t - ref_logprob_t), with the clipped reward-model
/// score added at the final token.
std::vector<double> shape_rewards(double rm_score, std::span<const double> logprobs,
                                  std::span<const double> ref_logprobs, const PPOConfig& cfg);

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// Backward recursion with terminal bootstrap V_T = 0.
GaeResult gae(std::span<const double> rewards, std::span<const double> values, double gamma,
              double lambda);

/// min(rho * A, clip(rho, 1-eps, 1+eps) * A). rho must be positive.
double clipped_surrogate(double rho, double advantage, double epsilon);

/// Mean over tokens of max((v - ret)^2, (clip(v, v_old +- c) - ret)^2).
double value_loss(std::span<const double> new_values, std::span<const double> old_values,
                  std::span<const double> returns, double value_clip);

struct StepMetrics {
    long step = 0;
    double mean_raw_reward = 0.0;     // reward-model score, unclipped
    double mean_shaped_reward = 0.0;  // per-trajectory sum of shaped rewards
    double mean_kl = 0.0;             // nats per sequence vs the reference
    double surrogate_clip_fraction = 0.0;
    double value_clip_fraction = 0.0;
    double policy_loss = 0.0;  // -surrogate, averaged over update passes
    double value_loss = 0.0;
    double actor_lr = 0.0;
    double critic_lr = 0.0;
    std::size_t experiences = 0;
    std::size_t response_tokens = 0;
};

struct PpoLossStats {
    double policy_term = 0.0;  // -mean clipped surrogate
    double value_term = 0.0;
    double surrogate_clip_fraction = 0.0;
    double value_clip_fraction = 0.0;
};

/// Combined loss (-surrogate + value loss, token mean) with gradient w.r.t.
/// the policy parameters. Trajectories are treated as fixed data.
lm::LossEval ppo_loss_eval(const lm::PolicyModel& policy, std::span<const Trajectory> batch,
                           const PPOConfig& cfg, PpoLossStats* stats = nullptr);

/// Owns the policy being tuned plus the frozen reference, the reward model,
/// and the optimizer state shared across steps.
class PpoTrainer {
public:
    PpoTrainer(lm::PolicyModel policy, lm::PolicyModel reference, reward::RewardModel rm,
               PPOConfig cfg);

    /// One PPO iteration: sample experiences with theta_old = current theta,
    /// shape rewards, run GAE, then update over mini-batches.
    StepMetrics step(std::span<const TokenSeq> prompts, std::uint64_t seed);

    const lm::PolicyModel& policy() const { return policy_; }
    const PPOConfig& config() const { return cfg_; }
    long steps_taken() const { return step_; }

    /// Sampling half of step(), exposed for tests.
    std::vector<Trajectory> sample_batch(std::span<const TokenSeq> prompts, std::uint64_t seed);

private:
    lm::PolicyModel policy_;
    lm::PolicyModel reference_;
    reward::RewardModel rm_;
    PPOConfig cfg_;
    Adam adam_;
    long step_ = 0;
    long opt_step_ = 0;
};

}  // namespace alnf::ppo
