#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "alnf/tokens.hpp"

namespace alnf::lm {

/// Architecture descriptor. Parameter counts are pure functions of this.
///
/// The network maps each position t to a hidden state through 1-2 tanh
/// layers over summed embeddings:
///
///   e_t = tok_emb[x_t] + pos_emb[t] + mean_{s<=t} ctx_emb[x_s]
///
/// The causal prefix mean lets the final position summarize the whole
/// sequence, which the reward scoring head relies on.
struct ModelArch {
    int vocab_size = 32;
    int embed_dim = 8;
    int hidden_dim = 16;
    int context_window = 32;
    int hidden_layers = 1;  // 1 or 2

    void validate() const;

    std::size_t encoder_param_count() const;
    std::size_t policy_param_count() const;   // encoder + logits head + value head
    std::size_t reward_param_count() const;   // encoder + scalar scoring head

    bool operator==(const ModelArch&) const = default;
};

/// Offsets of the named views into the flat parameter vector.
struct ParamLayout {
    std::size_t tok_emb = 0;
    std::size_t ctx_emb = 0;
    std::size_t pos_emb = 0;
    std::size_t w1 = 0, b1 = 0;
    std::size_t w2 = 0, b2 = 0;  // present only with 2 hidden layers
    std::size_t head = 0;        // first index past the encoder
    std::size_t total = 0;

    enum class Kind { policy, reward };
    static ParamLayout make(const ModelArch& arch, Kind kind);

    // Policy head views (valid for Kind::policy).
    std::size_t w_out = 0, b_out = 0, w_val = 0, b_val = 0;
    // Reward head views (valid for Kind::reward).
    std::size_t w_score = 0, b_score = 0;
};

/// Per-position activations cached by the forward pass.
struct EncoderCache {
    std::size_t n = 0;
    std::vector<double> e;   // n x E summed embeddings
    std::vector<double> h1;  // n x H
    std::vector<double> h2;  // n x H, only filled with 2 hidden layers

    std::span<const double> hidden(const ModelArch& arch, std::size_t t) const {
        const auto& h = arch.hidden_layers == 2 ? h2 : h1;
        return {h.data() + t * static_cast<std::size_t>(arch.hidden_dim),
                static_cast<std::size_t>(arch.hidden_dim)};
    }
};

/// Runs the encoder over seq. Validates token ids and the context window.
EncoderCache encoder_forward(const ModelArch& arch, std::span<const double> params,
                             std::span<const Token> seq);

/// Accumulates d(loss)/d(params) into grad given d(loss)/d(h_t) rows
/// (g_hidden is n x H). params/grad cover the full flat vector; only
/// encoder views are touched.
void encoder_backward(const ModelArch& arch, std::span<const double> params,
                      std::span<const Token> seq, const EncoderCache& cache,
                      std::span<const double> g_hidden, std::span<double> grad);

/// log softmax(row) with max subtraction, in place.
void log_softmax_inplace(std::span<double> row);

struct SamplingConfig {
    double temperature = 1.0;
    int max_length = 0;  // cap on total sequence length, prompt included
    std::uint64_t seed = 0;
};

struct PolicyModel {
    ModelArch arch;
    Vocabulary vocab;
    std::vector<double> params;

    /// Seeded uniform init in [-0.08, 0.08].
    static PolicyModel init(const ModelArch& arch, const Vocabulary& vocab, std::uint64_t seed);

    ParamLayout layout() const { return ParamLayout::make(arch, ParamLayout::Kind::policy); }

    /// One value per transition: result[t-1] = log p(seq[t] | seq[..t)).
    /// Requires |seq| >= 2.
    std::vector<double> log_probs(std::span<const Token> seq) const;

    /// Full next-token log-distribution given a non-empty prefix.
    std::vector<double> next_token_log_probs(std::span<const Token> prefix) const;

    /// One scalar per position.
    std::vector<double> values(std::span<const Token> seq) const;

    /// Ancestral sampling; stops at eos or cfg.max_length total tokens.
    TokenSeq sample(std::span<const Token> prompt, const SamplingConfig& cfg) const;
};

/// A differentiable loss: value plus gradient w.r.t. the flat parameters.
struct LossEval {
    double value = 0.0;
    std::vector<double> grad;
};

using DiffLoss = std::function<LossEval(std::span<const double> params)>;

/// Max over parameters of |analytic - central difference| / max(1, |central|).
/// epsilon must be in (0, 1e-2].
double grad_check(std::vector<double> params, const DiffLoss& loss, double epsilon);

}  // namespace alnf::lm
