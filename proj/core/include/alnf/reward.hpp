#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alnf/tinylm.hpp"
#include "alnf/tokens.hpp"

namespace alnf::reward {

/// Scalar reward model: the tinylm encoder plus a linear scoring head on the
/// final position's hidden state.
struct RewardModel {
    lm::ModelArch arch;
    Vocabulary vocab;
    std::vector<double> params;

    static RewardModel init(const lm::ModelArch& arch, const Vocabulary& vocab,
                            std::uint64_t seed);

    lm::ParamLayout layout() const {
        return lm::ParamLayout::make(arch, lm::ParamLayout::Kind::reward);
    }

    /// r(x, y) over the concatenated sequence; pure and deterministic.
    double score(std::span<const Token> x, std::span<const Token> y) const;
};

struct PreferenceExample {
    TokenSeq input;     // x
    TokenSeq chosen;    // y_c
    TokenSeq rejected;  // y_r

    void validate() const;  // non-empty sequences, chosen != rejected
};

struct RewardTrainConfig {
    double max_learning_rate = 8e-6;
    int epochs = 2;
    int batch_size = 128;
    double warmup_fraction = 0.03;
    double holdout_fraction = 0.1;  // 0 disables the held-out split
    // Adam, weight decay 0 (equivalent to AdamW at decay 0).
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

/// Mean over the batch of -log sigma(r(x,y_c) - r(x,y_r)).
double pairwise_loss(const RewardModel& rm, std::span<const PreferenceExample> batch);

/// Same loss with its gradient w.r.t. the model parameters.
lm::LossEval pairwise_loss_eval(const RewardModel& rm, std::span<const PreferenceExample> batch);

/// Numerically stable -log sigma(margin) = softplus(-margin).
double pairwise_loss_from_margin(double margin);

/// Fraction of pairs with score(x,y_c) > score(x,y_r); ties count as incorrect.
double reward_accuracy(const RewardModel& rm, std::span<const PreferenceExample> dataset);

struct TrainResult {
    RewardModel model;
    std::vector<double> loss_curve;  // one entry per optimizer step
    double initial_holdout_loss = 0.0;
    double final_holdout_loss = 0.0;
    double final_holdout_accuracy = 0.0;  // 0 when there is no holdout split
    std::size_t train_examples = 0;
    std::size_t holdout_examples = 0;
};

/// Adam + warmup/cosine schedule over shuffled mini-batches. Deterministic
/// given the seed. Throws NumericalFailure with the step index if the loss
/// goes non-finite.
TrainResult train_reward(const RewardModel& rm, std::span<const PreferenceExample> dataset,
                         const RewardTrainConfig& cfg, std::uint64_t seed);

}  // namespace alnf::reward
