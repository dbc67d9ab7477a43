#include "alnf/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alnf/errors.hpp"
#include "alnf/optim.hpp"
#include "alnf/rng.hpp"

namespace alnf::reward {

RewardModel RewardModel::init(const lm::ModelArch& arch, const Vocabulary& vocab,
                              std::uint64_t seed) {
    arch.validate();
    vocab.validate();
    if (vocab.size != arch.vocab_size)
        throw ValidationError("vocabulary size does not match architecture");
    RewardModel rm{arch, vocab, {}};
    rm.params.resize(arch.reward_param_count());
    Rng rng(seed);
    for (double& p : rm.params) p = rng.next_double(-0.08, 0.08);
    return rm;
}

namespace {

double score_from_hidden(const RewardModel& rm, const lm::ParamLayout& l,
                         std::span<const double> h) {
    double acc = rm.params[l.b_score];
    for (std::size_t k = 0; k < h.size(); ++k) acc += rm.params[l.w_score + k] * h[k];
    return acc;
}

struct ScoredSeq {
    TokenSeq seq;
    lm::EncoderCache cache;
    double score = 0.0;
};

ScoredSeq score_with_cache(const RewardModel& rm, std::span<const Token> x,
                           std::span<const Token> y) {
    ScoredSeq s;
    s.seq = concat(x, y);
    s.cache = lm::encoder_forward(rm.arch, rm.params, s.seq);
    s.score = score_from_hidden(rm, rm.layout(), s.cache.hidden(rm.arch, s.cache.n - 1));
    return s;
}

/// Accumulates g * d(score)/d(params) into grad.
void score_backward(const RewardModel& rm, const ScoredSeq& s, double g,
                    std::span<double> grad) {
    const lm::ParamLayout l = rm.layout();
    const std::size_t h_dim = rm.arch.hidden_dim;
    auto h_last = s.cache.hidden(rm.arch, s.cache.n - 1);
    for (std::size_t k = 0; k < h_dim; ++k) grad[l.w_score + k] += g * h_last[k];
    grad[l.b_score] += g;

    std::vector<double> g_hidden(s.cache.n * h_dim, 0.0);
    double* last_row = g_hidden.data() + (s.cache.n - 1) * h_dim;
    for (std::size_t k = 0; k < h_dim; ++k) last_row[k] = g * rm.params[l.w_score + k];
    lm::encoder_backward(rm.arch, rm.params, s.seq, s.cache, g_hidden, grad);
}

}  // namespace

double RewardModel::score(std::span<const Token> x, std::span<const Token> y) const {
    return score_with_cache(*this, x, y).score;
}

void PreferenceExample::validate() const {
    if (input.empty() || chosen.empty() || rejected.empty())
        throw ValidationError("preference example sequences must be non-empty");
    if (chosen == rejected)
        throw ValidationError("chosen and rejected responses must differ");
}

void RewardTrainConfig::validate() const {
    if (max_learning_rate < 0.0) throw ConfigError("max_learning_rate must be >= 0");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
        throw ConfigError("warmup_fraction must be in [0, 1)");
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
        throw ConfigError("holdout_fraction must be in [0, 1)");
}

double pairwise_loss_from_margin(double margin) {
    // softplus(-margin), stable for both signs
    const double z = -margin;
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double pairwise_loss(const RewardModel& rm, std::span<const PreferenceExample> batch) {
    if (batch.empty()) throw EmptyBatch("pairwise_loss over empty batch");
    double total = 0.0;
    for (const auto& ex : batch) {
        const double margin = rm.score(ex.input, ex.chosen) - rm.score(ex.input, ex.rejected);
        total += pairwise_loss_from_margin(margin);
    }
    return total / static_cast<double>(batch.size());
}

lm::LossEval pairwise_loss_eval(const RewardModel& rm,
                                std::span<const PreferenceExample> batch) {
    if (batch.empty()) throw EmptyBatch("pairwise_loss over empty batch");
    lm::LossEval out;
    out.grad.assign(rm.params.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto& ex : batch) {
        ScoredSeq chosen = score_with_cache(rm, ex.input, ex.chosen);
        ScoredSeq rejected = score_with_cache(rm, ex.input, ex.rejected);
        const double margin = chosen.score - rejected.score;
        out.value += pairwise_loss_from_margin(margin) * inv_n;
        // d/d(margin) of -log sigma(margin) = sigma(margin) - 1
        const double sigma = 1.0 / (1.0 + std::exp(-margin));
        const double g = (sigma - 1.0) * inv_n;
        score_backward(rm, chosen, g, out.grad);
        score_backward(rm, rejected, -g, out.grad);
    }
    return out;
}

double reward_accuracy(const RewardModel& rm, std::span<const PreferenceExample> dataset) {
    if (dataset.empty()) throw EmptyBatch("reward_accuracy over empty dataset");
    std::size_t correct = 0;
    for (const auto& ex : dataset) {
        if (rm.score(ex.input, ex.chosen) > rm.score(ex.input, ex.rejected)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

TrainResult train_reward(const RewardModel& rm, std::span<const PreferenceExample> dataset,
                         const RewardTrainConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (dataset.empty()) throw EmptyBatch("train_reward over empty dataset");
    for (const auto& ex : dataset) ex.validate();

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(seed, "reward/split"));
    split_rng.shuffle(order);

    const std::size_t holdout_n = static_cast<std::size_t>(
        std::floor(cfg.holdout_fraction * static_cast<double>(dataset.size())));
    std::vector<PreferenceExample> holdout, train;
    holdout.reserve(holdout_n);
    train.reserve(dataset.size() - holdout_n);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < holdout_n ? holdout : train).push_back(dataset[order[i]]);
    }
    if (train.empty()) throw EmptyBatch("holdout split left no training examples");

    TrainResult result;
    result.model = rm;
    result.train_examples = train.size();
    result.holdout_examples = holdout.size();
    result.initial_holdout_loss =
        holdout.empty() ? 0.0 : pairwise_loss(result.model, holdout);

    const std::size_t batch = std::min<std::size_t>(cfg.batch_size, train.size());
    const long steps_per_epoch = static_cast<long>((train.size() + batch - 1) / batch);
    const long total_steps = cfg.epochs * steps_per_epoch;
    const long warmup_steps =
        static_cast<long>(std::floor(cfg.warmup_fraction * static_cast<double>(total_steps)));

    Adam adam(result.model.params.size(), cfg.beta1, cfg.beta2, cfg.adam_eps);
    Rng shuffle_rng(derive_seed(seed, "reward/shuffle"));
    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), 0);

    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(idx);
        for (std::size_t start = 0; start < train.size(); start += batch, ++step) {
            const std::size_t stop = std::min(train.size(), start + batch);
            std::vector<PreferenceExample> minibatch;
            minibatch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) minibatch.push_back(train[idx[i]]);

            lm::LossEval eval = pairwise_loss_eval(result.model, minibatch);
            if (!std::isfinite(eval.value))
                throw NumericalFailure("non-finite reward training loss", step);
            result.loss_curve.push_back(eval.value);

            const double lr =
                warmup_cosine_lr(cfg.max_learning_rate, step, warmup_steps, total_steps);
            const ParamGroup group{0, result.model.params.size(), lr};
            adam.step(result.model.params, eval.grad, std::span<const ParamGroup>(&group, 1));
        }
    }

    result.final_holdout_loss =
        holdout.empty() ? result.loss_curve.empty() ? 0.0 : result.loss_curve.back()
                        : pairwise_loss(result.model, holdout);
    if (!holdout.empty()) result.final_holdout_accuracy = reward_accuracy(result.model, holdout);
    if (holdout.empty() && !result.loss_curve.empty())
        result.initial_holdout_loss = result.loss_curve.front();
    return result;
}

}  // namespace alnf::reward
