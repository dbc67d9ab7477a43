#include "alnf/tinylm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alnf/errors.hpp"
#include "alnf/rng.hpp"

namespace alnf::lm {

void ModelArch::validate() const {
    if (vocab_size < 4) throw ValidationError("vocab_size must be >= 4");
    if (embed_dim < 1 || hidden_dim < 1) throw ValidationError("embed/hidden dims must be positive");
    if (context_window < 2) throw ValidationError("context_window must be >= 2");
    if (hidden_layers != 1 && hidden_layers != 2)
        throw ValidationError("hidden_layers must be 1 or 2");
}

std::size_t ModelArch::encoder_param_count() const {
    const std::size_t v = vocab_size, e = embed_dim, h = hidden_dim, p = context_window;
    std::size_t n = 2 * v * e + p * e + h * e + h;
    if (hidden_layers == 2) n += h * h + h;
    return n;
}

std::size_t ModelArch::policy_param_count() const {
    const std::size_t v = vocab_size, h = hidden_dim;
    return encoder_param_count() + v * h + v + h + 1;
}

std::size_t ModelArch::reward_param_count() const {
    return encoder_param_count() + static_cast<std::size_t>(hidden_dim) + 1;
}

ParamLayout ParamLayout::make(const ModelArch& arch, Kind kind) {
    arch.validate();
    const std::size_t v = arch.vocab_size, e = arch.embed_dim, h = arch.hidden_dim,
                      p = arch.context_window;
    ParamLayout l;
    std::size_t off = 0;
    l.tok_emb = off; off += v * e;
    l.ctx_emb = off; off += v * e;
    l.pos_emb = off; off += p * e;
    l.w1 = off; off += h * e;
    l.b1 = off; off += h;
    if (arch.hidden_layers == 2) {
        l.w2 = off; off += h * h;
        l.b2 = off; off += h;
    }
    l.head = off;
    if (kind == Kind::policy) {
        l.w_out = off; off += v * h;
        l.b_out = off; off += v;
        l.w_val = off; off += h;
        l.b_val = off; off += 1;
    } else {
        l.w_score = off; off += h;
        l.b_score = off; off += 1;
    }
    l.total = off;
    return l;
}

EncoderCache encoder_forward(const ModelArch& arch, std::span<const double> params,
                             std::span<const Token> seq) {
    const std::size_t n = seq.size();
    if (n == 0) throw ValidationError("empty token sequence");
    if (n > static_cast<std::size_t>(arch.context_window))
        throw ContextOverflow(n, arch.context_window);
    for (Token t : seq) {
        if (t < 0 || t >= arch.vocab_size) throw InvalidToken(t, arch.vocab_size);
    }

    const std::size_t e_dim = arch.embed_dim, h_dim = arch.hidden_dim;
    const ParamLayout l = ParamLayout::make(arch, ParamLayout::Kind::policy);

    EncoderCache c;
    c.n = n;
    c.e.assign(n * e_dim, 0.0);
    c.h1.assign(n * h_dim, 0.0);
    if (arch.hidden_layers == 2) c.h2.assign(n * h_dim, 0.0);

    std::vector<double> ctx_sum(e_dim, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t tok = static_cast<std::size_t>(seq[t]);
        const double* tok_row = params.data() + l.tok_emb + tok * e_dim;
        const double* ctx_row = params.data() + l.ctx_emb + tok * e_dim;
        const double* pos_row = params.data() + l.pos_emb + t * e_dim;
        double* e_row = c.e.data() + t * e_dim;
        const double inv = 1.0 / static_cast<double>(t + 1);
        for (std::size_t k = 0; k < e_dim; ++k) {
            ctx_sum[k] += ctx_row[k];
            e_row[k] = tok_row[k] + pos_row[k] + ctx_sum[k] * inv;
        }

        double* h1_row = c.h1.data() + t * h_dim;
        for (std::size_t i = 0; i < h_dim; ++i) {
            const double* w_row = params.data() + l.w1 + i * e_dim;
            double acc = params[l.b1 + i];
            for (std::size_t k = 0; k < e_dim; ++k) acc += w_row[k] * e_row[k];
            h1_row[i] = std::tanh(acc);
        }
        if (arch.hidden_layers == 2) {
            double* h2_row = c.h2.data() + t * h_dim;
            for (std::size_t i = 0; i < h_dim; ++i) {
                const double* w_row = params.data() + l.w2 + i * h_dim;
                double acc = params[l.b2 + i];
                for (std::size_t k = 0; k < h_dim; ++k) acc += w_row[k] * h1_row[k];
                h2_row[i] = std::tanh(acc);
            }
        }
    }
    return c;
}

void encoder_backward(const ModelArch& arch, std::span<const double> params,
                      std::span<const Token> seq, const EncoderCache& cache,
                      std::span<const double> g_hidden, std::span<double> grad) {
    const std::size_t n = cache.n;
    const std::size_t e_dim = arch.embed_dim, h_dim = arch.hidden_dim;
    const ParamLayout l = ParamLayout::make(arch, ParamLayout::Kind::policy);

    std::vector<double> g_e(n * e_dim, 0.0);
    std::vector<double> da(h_dim), g_h1(h_dim);

    for (std::size_t t = 0; t < n; ++t) {
        const double* gh = g_hidden.data() + t * h_dim;
        const double* h1_row = cache.h1.data() + t * h_dim;

        const double* g_into_h1 = gh;
        if (arch.hidden_layers == 2) {
            const double* h2_row = cache.h2.data() + t * h_dim;
            for (std::size_t i = 0; i < h_dim; ++i) da[i] = gh[i] * (1.0 - h2_row[i] * h2_row[i]);
            for (std::size_t i = 0; i < h_dim; ++i) {
                double* gw_row = grad.data() + l.w2 + i * h_dim;
                for (std::size_t k = 0; k < h_dim; ++k) gw_row[k] += da[i] * h1_row[k];
                grad[l.b2 + i] += da[i];
            }
            std::fill(g_h1.begin(), g_h1.end(), 0.0);
            for (std::size_t i = 0; i < h_dim; ++i) {
                const double* w_row = params.data() + l.w2 + i * h_dim;
                for (std::size_t k = 0; k < h_dim; ++k) g_h1[k] += w_row[k] * da[i];
            }
            g_into_h1 = g_h1.data();
        }

        const double* e_row = cache.e.data() + t * e_dim;
        double* ge_row = g_e.data() + t * e_dim;
        for (std::size_t i = 0; i < h_dim; ++i) {
            const double d = g_into_h1[i] * (1.0 - h1_row[i] * h1_row[i]);
            double* gw_row = grad.data() + l.w1 + i * e_dim;
            const double* w_row = params.data() + l.w1 + i * e_dim;
            for (std::size_t k = 0; k < e_dim; ++k) {
                gw_row[k] += d * e_row[k];
                ge_row[k] += d * w_row[k];
            }
            grad[l.b1 + i] += d;
        }
    }

    // Embedding gradients. The context term c_t = mean_{s<=t} ctx_emb[x_s]
    // spreads each g_e[t]/(t+1) over all earlier tokens; a reverse suffix
    // accumulation handles that in O(n*E).
    std::vector<double> suffix(e_dim, 0.0);
    for (std::size_t t = n; t-- > 0;) {
        const std::size_t tok = static_cast<std::size_t>(seq[t]);
        const double* ge_row = g_e.data() + t * e_dim;
        const double inv = 1.0 / static_cast<double>(t + 1);
        double* g_tok = grad.data() + l.tok_emb + tok * e_dim;
        double* g_pos = grad.data() + l.pos_emb + t * e_dim;
        double* g_ctx = grad.data() + l.ctx_emb + tok * e_dim;
        for (std::size_t k = 0; k < e_dim; ++k) {
            g_tok[k] += ge_row[k];
            g_pos[k] += ge_row[k];
            suffix[k] += ge_row[k] * inv;
            g_ctx[k] += suffix[k];
        }
    }
}

void log_softmax_inplace(std::span<double> row) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : row) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    for (double& v : row) v -= log_z;
}

PolicyModel PolicyModel::init(const ModelArch& arch, const Vocabulary& vocab,
                              std::uint64_t seed) {
    arch.validate();
    vocab.validate();
    if (vocab.size != arch.vocab_size)
        throw ValidationError("vocabulary size does not match architecture");
    PolicyModel m{arch, vocab, {}};
    m.params.resize(arch.policy_param_count());
    Rng rng(seed);
    for (double& p : m.params) p = rng.next_double(-0.08, 0.08);
    return m;
}

namespace {

std::vector<double> logits_at(const ModelArch& arch, std::span<const double> params,
                              const ParamLayout& l, std::span<const double> h) {
    const std::size_t v_dim = arch.vocab_size, h_dim = arch.hidden_dim;
    std::vector<double> logits(v_dim);
    for (std::size_t v = 0; v < v_dim; ++v) {
        const double* w_row = params.data() + l.w_out + v * h_dim;
        double acc = params[l.b_out + v];
        for (std::size_t k = 0; k < h_dim; ++k) acc += w_row[k] * h[k];
        logits[v] = acc;
    }
    return logits;
}

}  // namespace

std::vector<double> PolicyModel::log_probs(std::span<const Token> seq) const {
    if (seq.size() < 2) throw ValidationError("log_probs needs at least 2 tokens");
    const EncoderCache cache = encoder_forward(arch, params, seq);
    const ParamLayout l = layout();
    std::vector<double> out(seq.size() - 1);
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        std::vector<double> logits = logits_at(arch, params, l, cache.hidden(arch, t));
        log_softmax_inplace(logits);
        out[t] = logits[static_cast<std::size_t>(seq[t + 1])];
    }
    return out;
}

std::vector<double> PolicyModel::next_token_log_probs(std::span<const Token> prefix) const {
    const EncoderCache cache = encoder_forward(arch, params, prefix);
    std::vector<double> logits =
        logits_at(arch, params, layout(), cache.hidden(arch, cache.n - 1));
    log_softmax_inplace(logits);
    return logits;
}

std::vector<double> PolicyModel::values(std::span<const Token> seq) const {
    const EncoderCache cache = encoder_forward(arch, params, seq);
    const ParamLayout l = layout();
    const std::size_t h_dim = arch.hidden_dim;
    std::vector<double> out(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        auto h = cache.hidden(arch, t);
        double acc = params[l.b_val];
        for (std::size_t k = 0; k < h_dim; ++k) acc += params[l.w_val + k] * h[k];
        out[t] = acc;
    }
    return out;
}

TokenSeq PolicyModel::sample(std::span<const Token> prompt, const SamplingConfig& cfg) const {
    if (prompt.empty()) throw ValidationError("prompt must be non-empty");
    if (cfg.temperature <= 0.0) throw ValidationError("temperature must be positive");
    if (cfg.max_length <= 0) throw ValidationError("max_length must be positive");
    if (cfg.max_length > arch.context_window)
        throw ContextOverflow(cfg.max_length, arch.context_window);
    if (prompt.size() > static_cast<std::size_t>(cfg.max_length))
        throw ContextOverflow(prompt.size(), cfg.max_length);
    vocab.check(prompt);

    TokenSeq seq(prompt.begin(), prompt.end());
    Rng rng(cfg.seed);
    const ParamLayout l = layout();
    while (seq.size() < static_cast<std::size_t>(cfg.max_length)) {
        const EncoderCache cache = encoder_forward(arch, params, seq);
        std::vector<double> logits = logits_at(arch, params, l, cache.hidden(arch, cache.n - 1));
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : logits) {
            if (!std::isfinite(v)) throw NumericalFailure("non-finite logits during sampling");
            mx = std::max(mx, v);
        }
        double z = 0.0;
        for (double& v : logits) {
            v = std::exp((v - mx) / cfg.temperature);
            z += v;
        }
        const double u = rng.next_double() * z;
        double acc = 0.0;
        Token pick = static_cast<Token>(logits.size() - 1);
        for (std::size_t v = 0; v < logits.size(); ++v) {
            acc += logits[v];
            if (u < acc) {
                pick = static_cast<Token>(v);
                break;
            }
        }
        seq.push_back(pick);
        if (pick == vocab.eos) break;
    }
    return seq;
}

double grad_check(std::vector<double> params, const DiffLoss& loss, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1e-2)
        throw ValidationError("epsilon must be in (0, 1e-2]");
    const LossEval analytic = loss(params);
    if (!std::isfinite(analytic.value)) throw NumericalFailure("non-finite loss value");
    if (analytic.grad.size() != params.size())
        throw ShapeMismatch("gradient size does not match parameter count");

    double max_err = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        params[i] = orig + epsilon;
        const double f_plus = loss(params).value;
        params[i] = orig - epsilon;
        const double f_minus = loss(params).value;
        params[i] = orig;
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
            throw NumericalFailure("non-finite loss during finite differencing");
        const double central = (f_plus - f_minus) / (2.0 * epsilon);
        const double err = std::abs(analytic.grad[i] - central) / std::max(1.0, std::abs(central));
        max_err = std::max(max_err, err);
    }
    return max_err;
}

}  // namespace alnf::lm
