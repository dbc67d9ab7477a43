#include "alnf/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alnf/errors.hpp"
#include "alnf/rng.hpp"

namespace alnf::ppo {

void PPOConfig::validate() const {
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0))
        throw ConfigError("clip_epsilon must be in (0, 1)");
    if (value_clip <= 0.0) throw ConfigError("value_clip must be positive");
    if (!(reward_clip_low < reward_clip_high))
        throw ConfigError("reward clip range must have low < high");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in [0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
    if (experiences_per_batch < 1) throw ConfigError("experiences_per_batch must be >= 1");
    if (minibatch_size < 1 || minibatch_size > experiences_per_batch)
        throw ConfigError("minibatch_size must be in [1, experiences_per_batch]");
    if (update_epochs < 0) throw ConfigError("update_epochs must be >= 0");
    if (actor_lr < 0.0 || critic_lr < 0.0) throw ConfigError("learning rates must be >= 0");
    if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
    if (schedule_total_steps < 1) throw ConfigError("schedule_total_steps must be >= 1");
    if (max_response_tokens < 1) throw ConfigError("max_response_tokens must be >= 1");
    if (sample_temperature <= 0.0) throw ConfigError("sample_temperature must be positive");
    if (kl_ceiling <= 0.0) throw ConfigError("kl_ceiling must be positive");
}

std::vector<double> shape_rewards(double rm_score, std::span<const double> logprobs,
                                  std::span<const double> ref_logprobs, const PPOConfig& cfg) {
    if (logprobs.empty()) throw EmptyBatch("shape_rewards over empty token list");
    if (logprobs.size() != ref_logprobs.size())
        throw ShapeMismatch("logprob lists differ in length: " + std::to_string(logprobs.size()) +
                            " vs " + std::to_string(ref_logprobs.size()));
    const double coef = cfg.kl_strategy == KlStrategy::reward_shaping ? cfg.kl_coef : 0.0;
    std::vector<double> rewards(logprobs.size());
    for (std::size_t t = 0; t < logprobs.size(); ++t) {
        rewards[t] = -coef * (logprobs[t] - ref_logprobs[t]);
    }
    rewards.back() += std::clamp(rm_score, cfg.reward_clip_low, cfg.reward_clip_high);
    return rewards;
}

GaeResult gae(std::span<const double> rewards, std::span<const double> values, double gamma,
              double lambda) {
    if (rewards.empty()) throw EmptyBatch("gae over empty trajectory");
    if (rewards.size() != values.size())
        throw ShapeMismatch("rewards/values differ in length");
    const std::size_t n = rewards.size();
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double running = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        const double next_value = t + 1 < n ? values[t + 1] : 0.0;
        const double delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * running;
        out.advantages[t] = running;
        out.returns[t] = running + values[t];
    }
    return out;
}

double clipped_surrogate(double rho, double advantage, double epsilon) {
    if (!(rho > 0.0)) throw InvalidRatio(rho);
    const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(rho * advantage, clipped * advantage);
}

double value_loss(std::span<const double> new_values, std::span<const double> old_values,
                  std::span<const double> returns, double value_clip) {
    if (new_values.size() != old_values.size() || new_values.size() != returns.size())
        throw ShapeMismatch("value_loss inputs differ in length");
    if (new_values.empty()) throw EmptyBatch("value_loss over empty token list");
    double total = 0.0;
    for (std::size_t t = 0; t < new_values.size(); ++t) {
        const double unclipped = new_values[t] - returns[t];
        const double clipped = std::clamp(new_values[t], old_values[t] - value_clip,
                                          old_values[t] + value_clip) -
                               returns[t];
        total += std::max(unclipped * unclipped, clipped * clipped);
    }
    return total / static_cast<double>(new_values.size());
}

lm::LossEval ppo_loss_eval(const lm::PolicyModel& policy, std::span<const Trajectory> batch,
                           const PPOConfig& cfg, PpoLossStats* stats) {
    if (batch.empty()) throw EmptyBatch("ppo loss over empty batch");
    std::size_t total_tokens = 0;
    for (const auto& traj : batch) total_tokens += traj.response.size();
    if (total_tokens == 0) throw EmptyBatch("ppo loss over empty responses");

    const lm::ParamLayout l = policy.layout();
    const std::size_t h_dim = policy.arch.hidden_dim;
    const std::size_t v_dim = policy.arch.vocab_size;
    const double inv_n = 1.0 / static_cast<double>(total_tokens);

    lm::LossEval out;
    out.grad.assign(policy.params.size(), 0.0);
    double surr_sum = 0.0, vloss_sum = 0.0;
    std::size_t surr_clipped = 0, value_clipped = 0;

    std::vector<double> logits(v_dim), probs(v_dim);
    for (const auto& traj : batch) {
        const TokenSeq full = concat(traj.prompt, traj.response);
        const lm::EncoderCache cache = lm::encoder_forward(policy.arch, policy.params, full);
        const std::size_t p0 = traj.prompt.size();
        const std::size_t r_len = traj.response.size();
        if (traj.logprobs_old.size() != r_len || traj.advantages.size() != r_len ||
            traj.values.size() != r_len || traj.returns.size() != r_len)
            throw ShapeMismatch("trajectory per-token lists do not match response length");

        std::vector<double> g_hidden(cache.n * h_dim, 0.0);
        for (std::size_t i = 0; i < r_len; ++i) {
            const std::size_t q = p0 + i - 1;  // source position of the transition
            auto h = cache.hidden(policy.arch, q);

            for (std::size_t v = 0; v < v_dim; ++v) {
                const double* w_row = policy.params.data() + l.w_out + v * h_dim;
                double acc = policy.params[l.b_out + v];
                for (std::size_t k = 0; k < h_dim; ++k) acc += w_row[k] * h[k];
                logits[v] = acc;
            }
            lm::log_softmax_inplace(logits);
            const std::size_t target = static_cast<std::size_t>(full[q + 1]);
            const double new_logprob = logits[target];

            const double rho = std::exp(new_logprob - traj.logprobs_old[i]);
            if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidRatio(rho);
            const double advantage = traj.advantages[i];
            const double clipped_rho =
                std::clamp(rho, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
            const double unclipped = rho * advantage;
            const double clipped = clipped_rho * advantage;
            surr_sum += std::min(unclipped, clipped);
            const bool unclipped_active = unclipped <= clipped;
            if (clipped < unclipped) ++surr_clipped;
            // d(min)/d(new_logprob); the clipped branch is flat in rho there.
            const double d_logprob =
                unclipped_active ? -inv_n * rho * advantage : 0.0;

            double v_new = policy.params[l.b_val];
            for (std::size_t k = 0; k < h_dim; ++k) v_new += policy.params[l.w_val + k] * h[k];
            const double v_old = traj.values[i];
            const double ret = traj.returns[i];
            const double a_err = v_new - ret;
            const double b_err =
                std::clamp(v_new, v_old - cfg.value_clip, v_old + cfg.value_clip) - ret;
            const double a2 = a_err * a_err, b2 = b_err * b_err;
            vloss_sum += std::max(a2, b2);
            if (b2 > a2) ++value_clipped;
            const double d_value = a2 >= b2 ? inv_n * 2.0 * a_err : 0.0;

            double* gh = g_hidden.data() + q * h_dim;
            if (d_logprob != 0.0) {
                for (std::size_t v = 0; v < v_dim; ++v) probs[v] = std::exp(logits[v]);
                for (std::size_t v = 0; v < v_dim; ++v) {
                    const double g_logit =
                        d_logprob * ((v == target ? 1.0 : 0.0) - probs[v]);
                    double* gw_row = out.grad.data() + l.w_out + v * h_dim;
                    const double* w_row = policy.params.data() + l.w_out + v * h_dim;
                    for (std::size_t k = 0; k < h_dim; ++k) {
                        gw_row[k] += g_logit * h[k];
                        gh[k] += g_logit * w_row[k];
                    }
                    out.grad[l.b_out + v] += g_logit;
                }
            }
            if (d_value != 0.0) {
                for (std::size_t k = 0; k < h_dim; ++k) {
                    out.grad[l.w_val + k] += d_value * h[k];
                    gh[k] += d_value * policy.params[l.w_val + k];
                }
                out.grad[l.b_val] += d_value;
            }
        }
        lm::encoder_backward(policy.arch, policy.params, full, cache, g_hidden, out.grad);
    }

    out.value = -surr_sum * inv_n + vloss_sum * inv_n;
    if (stats) {
        stats->policy_term = -surr_sum * inv_n;
        stats->value_term = vloss_sum * inv_n;
        stats->surrogate_clip_fraction = static_cast<double>(surr_clipped) * inv_n;
        stats->value_clip_fraction = static_cast<double>(value_clipped) * inv_n;
    }
    return out;
}

PpoTrainer::PpoTrainer(lm::PolicyModel policy, lm::PolicyModel reference,
                       reward::RewardModel rm, PPOConfig cfg)
    : policy_(std::move(policy)),
      reference_(std::move(reference)),
      rm_(std::move(rm)),
      cfg_(cfg),
      adam_(policy_.params.size()) {
    cfg_.validate();
    if (policy_.vocab.size != reference_.vocab.size)
        throw ValidationError("policy and reference must share a vocabulary");
    if (policy_.vocab.size != rm_.vocab.size)
        throw ValidationError("policy and reward model must share a vocabulary");
}

std::vector<Trajectory> PpoTrainer::sample_batch(std::span<const TokenSeq> prompts,
                                                 std::uint64_t seed) {
    if (prompts.empty()) throw EmptyBatch("ppo step needs at least one prompt");
    std::vector<Trajectory> batch;
    batch.reserve(cfg_.experiences_per_batch);
    for (int i = 0; i < cfg_.experiences_per_batch; ++i) {
        const TokenSeq& prompt = prompts[static_cast<std::size_t>(i) % prompts.size()];
        if (prompt.empty()) throw ValidationError("empty prompt in ppo batch");
        const std::size_t want = prompt.size() + static_cast<std::size_t>(cfg_.max_response_tokens);
        if (want > static_cast<std::size_t>(policy_.arch.context_window))
            throw ContextOverflow(want, policy_.arch.context_window);

        lm::SamplingConfig scfg;
        scfg.temperature = cfg_.sample_temperature;
        scfg.max_length = static_cast<int>(want);
        scfg.seed = derive_seed(seed, "ppo/sample", static_cast<std::uint64_t>(i));
        TokenSeq full;
        try {
            full = policy_.sample(prompt, scfg);
        } catch (const NumericalFailure& e) {
            throw NumericalFailure(e.what(), step_);
        }

        Trajectory traj;
        traj.prompt = prompt;
        traj.response.assign(full.begin() + static_cast<std::ptrdiff_t>(prompt.size()),
                             full.end());
        const std::size_t p0 = prompt.size();
        const std::size_t r_len = traj.response.size();

        const std::vector<double> lp_all = policy_.log_probs(full);
        const std::vector<double> ref_all = reference_.log_probs(full);
        const std::vector<double> val_all = policy_.values(full);
        traj.logprobs_old.assign(lp_all.begin() + static_cast<std::ptrdiff_t>(p0 - 1),
                                 lp_all.end());
        traj.logprobs_ref.assign(ref_all.begin() + static_cast<std::ptrdiff_t>(p0 - 1),
                                 ref_all.end());
        traj.values.assign(val_all.begin() + static_cast<std::ptrdiff_t>(p0 - 1),
                           val_all.begin() + static_cast<std::ptrdiff_t>(p0 - 1 + r_len));
        traj.rm_score_raw = rm_.score(prompt, traj.response);

        traj.rewards = shape_rewards(traj.rm_score_raw, traj.logprobs_old, traj.logprobs_ref,
                                     cfg_);
        GaeResult g = gae(traj.rewards, traj.values, cfg_.gamma, cfg_.lambda);
        traj.advantages = std::move(g.advantages);
        traj.returns = std::move(g.returns);

        for (double a : traj.advantages) {
            if (!std::isfinite(a)) throw NumericalFailure("non-finite advantage", step_);
        }
        if (!std::isfinite(traj.rm_score_raw))
            throw NumericalFailure("non-finite reward-model score", step_);
        batch.push_back(std::move(traj));
    }

    if (cfg_.whiten_advantages) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& t : batch) {
            for (double a : t.advantages) sum += a;
            count += t.advantages.size();
        }
        const double mean = sum / static_cast<double>(count);
        double var = 0.0;
        for (const auto& t : batch)
            for (double a : t.advantages) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / static_cast<double>(count));
        for (auto& t : batch)
            for (double& a : t.advantages) a = (a - mean) / (sd + 1e-8);
    }
    return batch;
}

StepMetrics PpoTrainer::step(std::span<const TokenSeq> prompts, std::uint64_t seed) {
    std::vector<Trajectory> batch = sample_batch(prompts, seed);

    StepMetrics metrics;
    metrics.step = step_;
    metrics.experiences = batch.size();
    for (const auto& traj : batch) {
        metrics.mean_raw_reward += traj.rm_score_raw;
        double shaped = 0.0, kl = 0.0;
        for (std::size_t i = 0; i < traj.response.size(); ++i) {
            shaped += traj.rewards[i];
            kl += traj.logprobs_old[i] - traj.logprobs_ref[i];
        }
        metrics.mean_shaped_reward += shaped;
        metrics.mean_kl += kl;
        metrics.response_tokens += traj.response.size();
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    metrics.mean_raw_reward *= inv_b;
    metrics.mean_shaped_reward *= inv_b;
    metrics.mean_kl *= inv_b;

    const lm::ParamLayout l = policy_.layout();
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), 0);

    double surr_clip_weighted = 0.0, value_clip_weighted = 0.0;
    double policy_loss_weighted = 0.0, value_loss_weighted = 0.0;
    std::size_t updated_tokens = 0;
    bool first_update = true;

    for (int epoch = 0; epoch < cfg_.update_epochs; ++epoch) {
        Rng rng(derive_seed(seed, "ppo/shuffle", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg_.minibatch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg_.minibatch_size));
            std::vector<Trajectory> minibatch;
            minibatch.reserve(stop - start);
            std::size_t mb_tokens = 0;
            for (std::size_t j = start; j < stop; ++j) {
                minibatch.push_back(batch[order[j]]);
                mb_tokens += minibatch.back().response.size();
            }

            PpoLossStats stats;
            lm::LossEval eval = ppo_loss_eval(policy_, minibatch, cfg_, &stats);
            if (!std::isfinite(eval.value))
                throw NumericalFailure("non-finite ppo loss", step_);

            const double actor_lr =
                warmup_cosine_lr(cfg_.actor_lr, opt_step_, cfg_.warmup_steps,
                                 cfg_.schedule_total_steps);
            const double critic_lr =
                warmup_cosine_lr(cfg_.critic_lr, opt_step_, cfg_.warmup_steps,
                                 cfg_.schedule_total_steps);
            if (first_update) {
                metrics.actor_lr = actor_lr;
                metrics.critic_lr = critic_lr;
                first_update = false;
            }
            const ParamGroup groups[2] = {{0, l.w_val, actor_lr},
                                          {l.w_val, policy_.params.size(), critic_lr}};
            adam_.step(policy_.params, eval.grad, groups);
            ++opt_step_;

            const double w = static_cast<double>(mb_tokens);
            surr_clip_weighted += stats.surrogate_clip_fraction * w;
            value_clip_weighted += stats.value_clip_fraction * w;
            policy_loss_weighted += stats.policy_term * w;
            value_loss_weighted += stats.value_term * w;
            updated_tokens += mb_tokens;
        }
    }

    if (updated_tokens > 0) {
        const double inv_t = 1.0 / static_cast<double>(updated_tokens);
        metrics.surrogate_clip_fraction = surr_clip_weighted * inv_t;
        metrics.value_clip_fraction = value_clip_weighted * inv_t;
        metrics.policy_loss = policy_loss_weighted * inv_t;
        metrics.value_loss = value_loss_weighted * inv_t;
    }

    ++step_;
    return metrics;
}

}  // namespace alnf::ppo
