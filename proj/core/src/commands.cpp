#include "alnf/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "alnf/bench.hpp"
#include "alnf/checkpoint.hpp"
#include "alnf/errors.hpp"
#include "alnf/jsonl.hpp"
#include "alnf/judge.hpp"
#include "alnf/locmetrics.hpp"
#include "alnf/ppo.hpp"
#include "alnf/prefpipe.hpp"
#include "alnf/reward.hpp"
#include "alnf/rng.hpp"
#include "alnf/tinylm.hpp"

namespace alnf::cli {

namespace {

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

Json header_line(const CommandContext& ctx, const std::string& format) {
    Json h = artifact_meta(ctx.config, ctx.seed);
    h["format"] = format;
    return h;
}

void write_report(const CommandContext& ctx, const std::string& name, const Json& body) {
    write_text_file(ctx.out_dir / name, body.dump(2) + "\n");
}

/// Runs fn(i) for i in [0, n) over `workers` threads. Results must be written
/// to pre-sized slots so completion order cannot leak into the output.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error) return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int count = std::min<int>(workers, static_cast<int>(n));
    threads.reserve(count);
    for (int t = 0; t < count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

int parallelism(const KvConfig& cfg) {
    return static_cast<int>(cfg.get_int("pipeline.parallelism", 4));
}

std::string require_string_field(const Json& row, const char* key, const std::string& context) {
    const Json& v = require_field(row, key, context);
    if (!v.is_string() || v.get<std::string>().empty())
        throw MissingField(context + "." + key);
    return v.get<std::string>();
}

bool is_header_row(const Json& row) { return row.is_object() && row.contains("format"); }

lm::ModelArch arch_from_config(const KvConfig& cfg, const std::string& ns) {
    lm::ModelArch arch;
    arch.vocab_size = static_cast<int>(cfg.get_int(ns + ".vocab_size", 32));
    arch.embed_dim = static_cast<int>(cfg.get_int(ns + ".embed_dim", 8));
    arch.hidden_dim = static_cast<int>(cfg.get_int(ns + ".hidden_dim", 16));
    arch.context_window = static_cast<int>(cfg.get_int(ns + ".context_window", 48));
    arch.hidden_layers = static_cast<int>(cfg.get_int(ns + ".hidden_layers", 1));
    return arch;
}

Vocabulary vocab_from_config(const KvConfig& cfg, const std::string& ns, int size) {
    Vocabulary v;
    v.size = size;
    v.bos = static_cast<Token>(cfg.get_int(ns + ".bos", 0));
    v.eos = static_cast<Token>(cfg.get_int(ns + ".eos", 1));
    v.pad = static_cast<Token>(cfg.get_int(ns + ".pad", 2));
    v.validate();
    return v;
}

TokenSeq tokens_from_json(const Json& value, const std::string& context) {
    TokenSeq out;
    if (value.is_array()) {
        for (const auto& t : value) {
            if (!t.is_number_integer())
                throw ValidationError(context + ": token ids must be integers");
            out.push_back(t.get<Token>());
        }
        return out;
    }
    if (value.is_string()) {
        // Text fields hold whitespace-separated integer token ids.
        const std::string s = value.get<std::string>();
        std::size_t pos = 0;
        while (pos < s.size()) {
            const std::size_t begin = s.find_first_not_of(" \t", pos);
            if (begin == std::string::npos) break;
            std::size_t end = s.find_first_of(" \t", begin);
            if (end == std::string::npos) end = s.size();
            const std::string word = s.substr(begin, end - begin);
            try {
                std::size_t used = 0;
                const int id = std::stoi(word, &used);
                if (used != word.size()) throw std::invalid_argument("trailing");
                out.push_back(static_cast<Token>(id));
            } catch (const std::exception&) {
                throw ValidationError(context + ": text token \"" + word +
                                      "\" is not an integer id; provide token-format pairs");
            }
            pos = end;
        }
        return out;
    }
    throw ValidationError(context + ": expected a token-id array or an id string");
}

}  // namespace

// ---------------------------------------------------------------------------
// judge client factory
// ---------------------------------------------------------------------------

client::ClientFactory make_client_factory(const KvConfig& cfg) {
    const std::string kind = cfg.get_string("judge.client", "mock");
    if (kind == "mock") {
        client::MockJudgeConfig base;
        base.mode = client::mock_mode_from_string(
            cfg.get_string("judge.mock.mode", "fixed_scores"));
        base.needle = cfg.get_string("judge.mock.needle", "");
        base.first_slot_prob = cfg.get_double("judge.mock.first_slot_prob", 0.8);
        base.score_high = cfg.get_double("judge.mock.score_high", 8.0);
        base.score_low = cfg.get_double("judge.mock.score_low", 8.0);
        base.score_noise = cfg.get_double("judge.mock.noise", 0.0);
        base.unparseable_needle = cfg.get_string("judge.mock.unparseable_needle", "");
        const std::string table = cfg.get_string("judge.mock.scores_by_run", "");
        if (!table.empty()) {
            std::size_t pos = 0;
            while (pos <= table.size()) {
                std::size_t comma = table.find(',', pos);
                if (comma == std::string::npos) comma = table.size();
                const std::string pair = table.substr(pos, comma - pos);
                const std::size_t colon = pair.find(':');
                if (colon == std::string::npos)
                    throw ConfigError("judge.mock.scores_by_run expects high:low pairs");
                base.scores_by_run.emplace_back(std::stod(pair.substr(0, colon)),
                                                std::stod(pair.substr(colon + 1)));
                pos = comma + 1;
            }
        }
        return [base](int run_index, std::uint64_t run_seed) {
            client::MockJudgeConfig cfg_run = base;
            cfg_run.run_index = run_index;
            cfg_run.seed = run_seed;
            return std::make_unique<client::MockJudge>(cfg_run);
        };
    }
    if (kind == "http") {
        client::HttpJudgeConfig http;
        http.base_url = cfg.require_string("judge.http.base_url");
        http.path = cfg.get_string("judge.http.path", http.path);
        http.model = cfg.get_string("judge.http.model", http.model);
        http.auth_env = cfg.get_string("judge.http.auth_env", http.auth_env);
        http.max_attempts = static_cast<int>(cfg.get_int("judge.http.max_attempts", 3));
        http.backoff_initial_ms =
            static_cast<int>(cfg.get_int("judge.http.backoff_ms", http.backoff_initial_ms));
        http.timeout_seconds =
            static_cast<int>(cfg.get_int("judge.http.timeout_s", http.timeout_seconds));
        return [http](int, std::uint64_t) { return std::make_unique<client::HttpJudgeClient>(http); };
    }
    throw ConfigError("judge.client must be mock or http, got " + kind);
}

// ---------------------------------------------------------------------------
// label
// ---------------------------------------------------------------------------

Json cmd_label(const CommandContext& ctx, const std::filesystem::path& instructions,
               const std::filesystem::path& responses) {
    const std::vector<Json> instr_rows = read_jsonl(instructions);
    const std::vector<Json> resp_rows = read_jsonl(responses);

    std::map<std::string, std::pair<std::string, std::string>> responses_by_id;
    for (const auto& row : resp_rows) {
        if (is_header_row(row)) continue;
        const std::string id = require_string_field(row, "id", "responses");
        const std::string a = require_string_field(row, "response_a", "responses");
        const std::string b = require_string_field(row, "response_b", "responses");
        if (!responses_by_id.emplace(id, std::make_pair(a, b)).second) throw DuplicateItem(id);
    }

    std::vector<prefpipe::PairItem> items;
    std::vector<std::string> missing;
    for (const auto& row : instr_rows) {
        if (is_header_row(row)) continue;
        prefpipe::PairItem item;
        item.id = require_string_field(row, "id", "instructions");
        item.instruction = require_string_field(row, "instruction", "instructions");
        auto it = responses_by_id.find(item.id);
        if (it == responses_by_id.end()) {
            missing.push_back(item.id);
            continue;
        }
        item.response_a = it->second.first;
        item.response_b = it->second.second;
        items.push_back(std::move(item));
    }
    if (!missing.empty()) throw MissingCounterpart(std::move(missing));
    if (items.empty()) throw EmptyBatch("no labeling items");

    const double temperature = ctx.config.get_double("label.temperature", 0.0);
    auto factory = make_client_factory(ctx.config);
    auto judge_client = factory(0, derive_seed(ctx.seed, "label/client"));

    struct RawPair {
        std::string original, swapped;
    };
    std::vector<RawPair> raw(items.size());
    parallel_for(items.size(), parallelism(ctx.config), [&](std::size_t i) {
        const auto& item = items[i];
        raw[i].original = judge_client->send(
            prefpipe::build_labeling_prompt(item.instruction, item.response_a, item.response_b),
            temperature);
        raw[i].swapped = judge_client->send(
            prefpipe::build_labeling_prompt(item.instruction, item.response_b, item.response_a),
            temperature);
    });

    std::vector<prefpipe::LabelingRun> run_original, run_swapped;
    std::vector<Json> run_rows{header_line(ctx, "labeling-runs")};
    for (std::size_t i = 0; i < items.size(); ++i) {
        prefpipe::LabelingRun o{items[i].id, prefpipe::PresentationOrder::original,
                                prefpipe::parse_verdict(raw[i].original)};
        prefpipe::LabelingRun s{items[i].id, prefpipe::PresentationOrder::swapped,
                                prefpipe::parse_verdict(raw[i].swapped)};
        run_original.push_back(o);
        run_swapped.push_back(s);
        run_rows.push_back(Json{{"id", o.id},
                                {"order", prefpipe::to_string(o.order)},
                                {"raw_output", raw[i].original},
                                {"verdict", prefpipe::to_string(o.verdict)}});
        run_rows.push_back(Json{{"id", s.id},
                                {"order", prefpipe::to_string(s.order)},
                                {"raw_output", raw[i].swapped},
                                {"verdict", prefpipe::to_string(s.verdict)}});
    }
    write_jsonl(ctx.out_dir / "labeling_runs.jsonl", run_rows);

    const prefpipe::FilterResult filtered =
        prefpipe::order_switch_filter(items, run_original, run_swapped);

    std::vector<Json> pair_rows{header_line(ctx, "text")};
    for (const auto& pair : filtered.kept) {
        const bool a_won = pair.chosen == prefpipe::Chosen::a;
        pair_rows.push_back(Json{{"id", pair.id},
                                 {"instruction", pair.instruction},
                                 {"chosen", a_won ? pair.response_a : pair.response_b},
                                 {"rejected", a_won ? pair.response_b : pair.response_a},
                                 {"source", "localized"},
                                 {"provenance", "judge-consistent"}});
    }
    write_jsonl(ctx.out_dir / "labeled_pairs.jsonl", pair_rows);

    std::vector<prefpipe::LabelingRun> all_runs = run_original;
    all_runs.insert(all_runs.end(), run_swapped.begin(), run_swapped.end());
    Json stats{{"_meta", artifact_meta(ctx.config, ctx.seed)},
               {"total", filtered.stats.total},
               {"kept", filtered.stats.kept},
               {"position_biased", filtered.stats.position_biased},
               {"unparseable_dropped", filtered.stats.unparseable_dropped}};
    try {
        stats["position_bias_rate"] = prefpipe::position_bias_rate(all_runs);
    } catch (const EmptyBatch&) {
        stats["position_bias_rate"] = nullptr;
    }
    write_report(ctx, "label_stats.json", stats);
    return stats;
}

// ---------------------------------------------------------------------------
// train-rm
// ---------------------------------------------------------------------------

namespace {

std::vector<reward::PreferenceExample> load_preference_pairs(
    const std::filesystem::path& path) {
    const std::vector<Json> rows = read_jsonl(path);
    std::vector<reward::PreferenceExample> pairs;
    for (const auto& row : rows) {
        if (is_header_row(row)) continue;
        reward::PreferenceExample ex;
        ex.input = tokens_from_json(require_field(row, "instruction", "pairs"), "instruction");
        ex.chosen = tokens_from_json(require_field(row, "chosen", "pairs"), "chosen");
        ex.rejected = tokens_from_json(require_field(row, "rejected", "pairs"), "rejected");
        ex.validate();
        pairs.push_back(std::move(ex));
    }
    if (pairs.empty()) throw EmptyBatch("no preference pairs in " + path.string());
    return pairs;
}

}  // namespace

Json cmd_train_rm(const CommandContext& ctx, const std::filesystem::path& pairs_path) {
    const auto pairs = load_preference_pairs(pairs_path);

    const lm::ModelArch arch = arch_from_config(ctx.config, "rm");
    const Vocabulary vocab = vocab_from_config(ctx.config, "rm", arch.vocab_size);
    for (const auto& ex : pairs) {
        vocab.check(ex.input);
        vocab.check(ex.chosen);
        vocab.check(ex.rejected);
    }

    reward::RewardTrainConfig train_cfg;
    train_cfg.max_learning_rate = ctx.config.get_double("reward.max_learning_rate", 8e-6);
    train_cfg.epochs = static_cast<int>(ctx.config.get_int("reward.epochs", 2));
    train_cfg.batch_size = static_cast<int>(ctx.config.get_int("reward.batch_size", 128));
    train_cfg.warmup_fraction = ctx.config.get_double("reward.warmup_fraction", 0.03);
    train_cfg.holdout_fraction = ctx.config.get_double("reward.holdout_fraction", 0.1);

    const reward::RewardModel init =
        reward::RewardModel::init(arch, vocab, derive_seed(ctx.seed, "rm/init"));
    const reward::TrainResult trained =
        reward::train_reward(init, pairs, train_cfg, derive_seed(ctx.seed, "rm/train"));

    save_reward(ctx.out_dir / "reward_model.ckpt", trained.model, ctx.config.hash());

    std::vector<Json> curve{header_line(ctx, "rm-loss-curve")};
    for (std::size_t i = 0; i < trained.loss_curve.size(); ++i) {
        curve.push_back(Json{{"step", i}, {"loss", trained.loss_curve[i]}});
    }
    write_jsonl(ctx.out_dir / "rm_loss_curve.jsonl", curve);

    Json report{{"_meta", artifact_meta(ctx.config, ctx.seed)},
                {"pairs", pairs.size()},
                {"train_examples", trained.train_examples},
                {"holdout_examples", trained.holdout_examples},
                {"steps", trained.loss_curve.size()},
                {"initial_holdout_loss", trained.initial_holdout_loss},
                {"final_holdout_loss", trained.final_holdout_loss},
                {"final_holdout_accuracy", trained.final_holdout_accuracy}};
    write_report(ctx, "rm_report.json", report);
    return report;
}

// ---------------------------------------------------------------------------
// ppo
// ---------------------------------------------------------------------------

namespace {

ppo::PPOConfig ppo_config(const KvConfig& cfg, int steps) {
    ppo::PPOConfig c;
    c.clip_epsilon = cfg.get_double("ppo.clip_epsilon", c.clip_epsilon);
    c.value_clip = cfg.get_double("ppo.value_clip", c.value_clip);
    c.kl_coef = cfg.get_double("ppo.kl_coef", c.kl_coef);
    c.reward_clip_low = cfg.get_double("ppo.reward_clip_low", c.reward_clip_low);
    c.reward_clip_high = cfg.get_double("ppo.reward_clip_high", c.reward_clip_high);
    c.gamma = cfg.get_double("ppo.gamma", c.gamma);
    c.lambda = cfg.get_double("ppo.lambda", c.lambda);
    c.experiences_per_batch =
        static_cast<int>(cfg.get_int("ppo.experiences", c.experiences_per_batch));
    c.minibatch_size = static_cast<int>(cfg.get_int("ppo.minibatch", c.minibatch_size));
    c.update_epochs = static_cast<int>(cfg.get_int("ppo.update_epochs", c.update_epochs));
    c.actor_lr = cfg.get_double("ppo.actor_lr", c.actor_lr);
    c.critic_lr = cfg.get_double("ppo.critic_lr", c.critic_lr);
    c.warmup_steps = static_cast<int>(cfg.get_int("ppo.warmup_steps", c.warmup_steps));
    c.max_response_tokens =
        static_cast<int>(cfg.get_int("ppo.max_response_tokens", c.max_response_tokens));
    c.sample_temperature = cfg.get_double("ppo.sample_temperature", c.sample_temperature);
    c.whiten_advantages = cfg.get_bool("ppo.whiten_advantages", c.whiten_advantages);
    c.kl_ceiling = cfg.get_double("ppo.kl_ceiling", c.kl_ceiling);
    const std::string strategy = cfg.get_string("ppo.kl_strategy", "reward_shaping");
    if (strategy == "reward_shaping") c.kl_strategy = ppo::KlStrategy::reward_shaping;
    else if (strategy == "none") c.kl_strategy = ppo::KlStrategy::none;
    else throw ConfigError("ppo.kl_strategy must be reward_shaping or none");

    const long batches_per_step =
        (c.experiences_per_batch + c.minibatch_size - 1) / c.minibatch_size;
    const long natural_horizon =
        c.warmup_steps + static_cast<long>(steps) * batches_per_step * c.update_epochs;
    c.schedule_total_steps = static_cast<int>(
        cfg.get_int("ppo.schedule_total_steps", std::max(natural_horizon, 1L)));
    return c;
}

Json metrics_to_json(const ppo::StepMetrics& m, double kl_ceiling) {
    return Json{{"step", m.step},
                {"mean_raw_reward", m.mean_raw_reward},
                {"mean_shaped_reward", m.mean_shaped_reward},
                {"mean_kl", m.mean_kl},
                {"surrogate_clip_fraction", m.surrogate_clip_fraction},
                {"value_clip_fraction", m.value_clip_fraction},
                {"policy_loss", m.policy_loss},
                {"value_loss", m.value_loss},
                {"actor_lr", m.actor_lr},
                {"critic_lr", m.critic_lr},
                {"experiences", m.experiences},
                {"response_tokens", m.response_tokens},
                {"kl_ceiling_exceeded", m.mean_kl > kl_ceiling}};
}

}  // namespace

Json cmd_ppo(const CommandContext& ctx, const std::filesystem::path& policy_ckpt,
             const std::filesystem::path& rm_ckpt, const std::filesystem::path& prompts_path) {
    lm::PolicyModel policy = load_policy(policy_ckpt);
    lm::PolicyModel reference = policy;  // frozen pre-tuning snapshot
    reward::RewardModel rm = load_reward(rm_ckpt);

    std::vector<TokenSeq> prompts;
    for (const auto& row : read_jsonl(prompts_path)) {
        if (is_header_row(row)) continue;
        TokenSeq p = tokens_from_json(require_field(row, "tokens", "prompts"), "prompts.tokens");
        if (p.empty()) throw ValidationError("empty prompt in " + prompts_path.string());
        policy.vocab.check(p);
        prompts.push_back(std::move(p));
    }
    if (prompts.empty()) throw EmptyBatch("no prompts in " + prompts_path.string());

    const int steps = static_cast<int>(ctx.config.get_int("ppo.steps", 30));
    const ppo::PPOConfig cfg = ppo_config(ctx.config, steps);

    ppo::PpoTrainer trainer(std::move(policy), std::move(reference), std::move(rm), cfg);
    std::vector<Json> log{header_line(ctx, "ppo-run-log")};
    Json first, last;
    for (int i = 0; i < steps; ++i) {
        const ppo::StepMetrics m = trainer.step(prompts, derive_seed(ctx.seed, "ppo/step",
                                                                     static_cast<std::uint64_t>(i)));
        Json row = metrics_to_json(m, cfg.kl_ceiling);
        row["config_hash"] = ctx.config.hash_hex();
        if (i == 0) first = row;
        last = row;
        log.push_back(std::move(row));
    }
    write_jsonl(ctx.out_dir / "ppo_run_log.jsonl", log);
    save_policy(ctx.out_dir / "policy_tuned.ckpt", trainer.policy(), ctx.config.hash());

    Json report{{"_meta", artifact_meta(ctx.config, ctx.seed)},
                {"steps", steps},
                {"first_step", first},
                {"last_step", last}};
    if (steps > 0) {
        report["raw_reward_delta"] = last["mean_raw_reward"].get<double>() -
                                     first["mean_raw_reward"].get<double>();
    }
    write_report(ctx, "ppo_report.json", report);
    return report;
}

// ---------------------------------------------------------------------------
// judge-eval
// ---------------------------------------------------------------------------

Json cmd_judge_eval(const CommandContext& ctx, const std::filesystem::path& questions_path,
                    const std::filesystem::path& model_path,
                    const std::filesystem::path& baseline_path) {
    struct Question {
        std::string id, question, model_output, baseline_output;
    };

    auto load_outputs = [](const std::filesystem::path& path) {
        std::map<std::string, std::string> outputs;
        for (const auto& row : read_jsonl(path)) {
            if (is_header_row(row)) continue;
            const std::string id = require_string_field(row, "id", "outputs");
            const std::string output = require_string_field(row, "output", "outputs");
            if (!outputs.emplace(id, output).second) throw DuplicateItem(id);
        }
        return outputs;
    };
    const auto model_outputs = load_outputs(model_path);
    const auto baseline_outputs = load_outputs(baseline_path);

    std::vector<Question> questions;
    std::vector<std::string> missing;
    for (const auto& row : read_jsonl(questions_path)) {
        if (is_header_row(row)) continue;
        Question q;
        q.id = require_string_field(row, "id", "questions");
        q.question = require_string_field(row, "question", "questions");
        const auto m = model_outputs.find(q.id);
        const auto b = baseline_outputs.find(q.id);
        if (m == model_outputs.end() || b == baseline_outputs.end()) {
            missing.push_back(q.id);
            continue;
        }
        q.model_output = m->second;
        q.baseline_output = b->second;
        questions.push_back(std::move(q));
    }
    if (!missing.empty()) throw MissingCounterpart(std::move(missing));
    if (questions.empty()) throw EmptyBatch("no questions to judge");

    const int runs = static_cast<int>(ctx.config.get_int("judge.runs", 3));
    if (runs < 1) throw ConfigError("judge.runs must be >= 1");
    const double temperature = ctx.config.get_double("judge.temperature", 0.2);
    auto factory = make_client_factory(ctx.config);

    std::vector<std::unique_ptr<client::JudgeClient>> clients;
    clients.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        clients.push_back(factory(r, derive_seed(ctx.seed, "judge/run",
                                                 static_cast<std::uint64_t>(r))));
    }

    const std::size_t n = questions.size();
    std::vector<std::string> raw(static_cast<std::size_t>(runs) * n);
    parallel_for(raw.size(), parallelism(ctx.config), [&](std::size_t task) {
        const int r = static_cast<int>(task / n);
        const std::size_t qi = task % n;
        const Question& q = questions[qi];
        const judge::JudgeOrder order = judge::alternate_order(qi);
        const bool model_first = order == judge::JudgeOrder::model_first;
        const std::string prompt = judge::build_judge_prompt(
            q.question, model_first ? q.model_output : q.baseline_output,
            model_first ? q.baseline_output : q.model_output);
        raw[task] = clients[static_cast<std::size_t>(r)]->send(prompt, temperature);
    });

    std::vector<std::vector<judge::ScorePair>> run_pairs(runs);
    std::vector<Json> verdict_rows{header_line(ctx, "judge-verdicts")};
    Json excluded = Json::array();
    std::size_t clamped_count = 0;
    for (int r = 0; r < runs; ++r) {
        for (std::size_t qi = 0; qi < n; ++qi) {
            const Question& q = questions[qi];
            const judge::JudgeOrder order = judge::alternate_order(qi);
            const std::string& output = raw[static_cast<std::size_t>(r) * n + qi];
            Json row{{"question_id", q.id},
                     {"run", r},
                     {"order", judge::to_string(order)},
                     {"raw_output", output}};
            try {
                const judge::ParsedScores parsed = judge::parse_scores(output);
                const bool model_first = order == judge::JudgeOrder::model_first;
                judge::ScorePair pair;
                pair.question_id = q.id;
                pair.model_score = model_first ? parsed.score1 : parsed.score2;
                pair.baseline_score = model_first ? parsed.score2 : parsed.score1;
                pair.order = order;
                pair.run = r;
                run_pairs[static_cast<std::size_t>(r)].push_back(pair);
                row["score_model"] = pair.model_score;
                row["score_baseline"] = pair.baseline_score;
                row["clamped"] = parsed.clamped;
                if (parsed.clamped) ++clamped_count;
            } catch (const UnparseableScores&) {
                row["score_model"] = nullptr;
                row["score_baseline"] = nullptr;
                row["clamped"] = false;
                row["unparseable"] = true;
                excluded.push_back(Json{{"question_id", q.id}, {"run", r}});
            }
            verdict_rows.push_back(std::move(row));
        }
    }
    write_jsonl(ctx.out_dir / "judge_verdicts.jsonl", verdict_rows);

    const judge::RatioReport ratio = judge::multi_run_ratio(run_pairs);
    Json report{{"_meta", artifact_meta(ctx.config, ctx.seed)},
                {"questions", n},
                {"runs", runs},
                {"per_run_ratio", ratio.per_run},
                {"mean_ratio", ratio.mean},
                {"spread", ratio.spread},
                {"rendered", judge::format_ratio_report(ratio)},
                {"clamped_scores", clamped_count},
                {"excluded", excluded}};
    write_report(ctx, "judge_report.json", report);
    return report;
}

// ---------------------------------------------------------------------------
// acva / mc scoring
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::string> load_generations(const std::filesystem::path& path) {
    std::map<std::string, std::string> generations;
    for (const auto& row : read_jsonl(path)) {
        if (is_header_row(row)) continue;
        const std::string id = require_string_field(row, "id", "generations");
        const Json& out = require_field(row, "output", "generations");
        if (!out.is_string()) throw MissingField("generations.output");
        if (!generations.emplace(id, out.get<std::string>()).second) throw DuplicateItem(id);
    }
    return generations;
}

}  // namespace

Json cmd_acva(const CommandContext& ctx, const std::filesystem::path& items_path,
              const std::filesystem::path& generations_path) {
    const auto generations = load_generations(generations_path);
    const bench::YesNoMarkers markers;

    std::vector<bench::YesNoPrediction> predictions;
    std::vector<bench::YesNoLabel> gold;
    std::vector<std::string> topics;
    std::vector<std::string> warnings;
    std::size_t yes_n = 0, no_n = 0, abstain_n = 0;
    for (const auto& row : read_jsonl(items_path)) {
        if (is_header_row(row)) continue;
        const std::string id = require_string_field(row, "id", "items");
        topics.push_back(require_string_field(row, "topic", "items"));
        gold.push_back(
            bench::yes_no_label_from_string(require_string_field(row, "gold", "items")));
        require_string_field(row, "text", "items");
        auto it = generations.find(id);
        bench::YesNoPrediction pred = bench::YesNoPrediction::abstain;
        if (it == generations.end()) {
            warnings.push_back("no generation for item " + id + "; counted as abstain");
        } else {
            pred = bench::parse_yes_no(it->second, markers);
        }
        predictions.push_back(pred);
        switch (pred) {
            case bench::YesNoPrediction::yes: ++yes_n; break;
            case bench::YesNoPrediction::no: ++no_n; break;
            default: ++abstain_n; break;
        }
    }
    if (predictions.empty()) throw EmptyBatch("no benchmark items in " + items_path.string());

    const bench::AcvaReport scored = bench::acva_f1(predictions, gold, topics);
    warnings.insert(warnings.end(), scored.warnings.begin(), scored.warnings.end());

    Json per_topic = Json::object();
    for (const auto& [topic, f1] : scored.per_topic) per_topic[topic] = f1;
    Json report{{"_meta", artifact_meta(ctx.config, ctx.seed)},
                {"items", predictions.size()},
                {"overall_f1", scored.overall_f1},
                {"micro_f1", scored.micro_f1},
                {"per_topic_f1", per_topic},
                {"predictions", Json{{"yes", yes_n}, {"no", no_n}, {"abstain", abstain_n}}},
                {"warnings", warnings}};
    write_report(ctx, "acva_report.json", report);
    return report;
}

Json cmd_mc(const CommandContext& ctx, const std::filesystem::path& items_path,
            const std::filesystem::path& generations_path) {
    const auto generations = load_generations(generations_path);

    std::vector<bench::ChoicePrediction> predictions;
    std::vector<bench::ChoiceKey> gold;
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_category;  // correct/total
    std::vector<std::string> warnings;
    std::size_t abstain_n = 0;
    for (const auto& row : read_jsonl(items_path)) {
        if (is_header_row(row)) continue;
        const std::string id = require_string_field(row, "id", "items");
        const std::string category = require_string_field(row, "category", "items");
        require_string_field(row, "question", "items");
        const Json& options = require_field(row, "options", "items");
        for (const char* key : {"A", "B", "C", "D"}) require_field(options, key, "items.options");
        const bench::ChoiceKey g =
            bench::choice_key_from_string(require_string_field(row, "gold", "items"));

        bench::ChoicePrediction pred = bench::ChoicePrediction::abstain;
        auto it = generations.find(id);
        if (it == generations.end()) {
            warnings.push_back("no generation for item " + id + "; counted as abstain");
        } else {
            pred = bench::parse_choice(it->second);
        }
        if (pred == bench::ChoicePrediction::abstain) ++abstain_n;
        predictions.push_back(pred);
        gold.push_back(g);

        auto& bucket = per_category[category];
        ++bucket.second;
        const bool correct = bench::mc_accuracy({&pred, 1}, {&g, 1}) == 1.0;
        if (correct) ++bucket.first;
    }
    if (predictions.empty()) throw EmptyBatch("no benchmark items in " + items_path.string());

    const double accuracy = bench::mc_accuracy(predictions, gold);
    Json per_cat = Json::object();
    for (const auto& [cat, counts] : per_category) {
        per_cat[cat] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
    Json report{{"_meta", artifact_meta(ctx.config, ctx.seed)},
                {"items", predictions.size()},
                {"accuracy", accuracy},
                {"per_category_accuracy", per_cat},
                {"abstentions", abstain_n},
                {"warnings", warnings}};
    write_report(ctx, "mc_report.json", report);
    return report;
}

// ---------------------------------------------------------------------------
// human-agg
// ---------------------------------------------------------------------------

Json cmd_human_agg(const CommandContext& ctx,
                   const std::vector<std::filesystem::path>& ballot_files) {
    std::vector<bench::AnnotatorBallot> ballots;
    for (const auto& path : ballot_files) {
        for (const auto& row : read_jsonl(path)) {
            if (is_header_row(row)) continue;
            bench::AnnotatorBallot ballot;
            ballot.annotator = require_string_field(row, "annotator", "ballots");
            const Json& verdicts = require_field(row, "verdicts", "ballots");
            if (!verdicts.is_array()) throw MissingField("ballots.verdicts");
            for (const auto& v : verdicts) {
                ballot.verdicts.push_back(
                    bench::ballot_verdict_from_string(v.get<std::string>()));
            }
            ballots.push_back(std::move(ballot));
        }
    }
    const bench::HumanAggregate agg = bench::human_aggregate(ballots);

    auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };
    Json annotators = Json::array();
    for (const auto& b : ballots) {
        std::size_t w = 0, t = 0, l = 0;
        for (auto v : b.verdicts) {
            if (v == bench::BallotVerdict::win) ++w;
            else if (v == bench::BallotVerdict::tie) ++t;
            else ++l;
        }
        annotators.push_back(Json{{"annotator", b.annotator},
                                  {"win", w},
                                  {"tie", t},
                                  {"lose", l},
                                  {"items", b.verdicts.size()}});
    }
    Json report{{"_meta", artifact_meta(ctx.config, ctx.seed)},
                {"annotators", annotators},
                {"pooled_verdicts", agg.pooled_verdicts},
                {"win_pct", agg.win_pct},
                {"tie_pct", agg.tie_pct},
                {"lose_pct", agg.lose_pct},
                {"win_or_tie_pct", agg.win_or_tie_pct},
                {"rounded", Json{{"win_pct", round1(agg.win_pct)},
                                 {"tie_pct", round1(agg.tie_pct)},
                                 {"lose_pct", round1(agg.lose_pct)},
                                 {"win_or_tie_pct", round1(agg.win_or_tie_pct)}}}};
    write_report(ctx, "human_agg_report.json", report);
    return report;
}

// ---------------------------------------------------------------------------
// entity
// ---------------------------------------------------------------------------

Json cmd_entity(const CommandContext& ctx, const std::filesystem::path& responses_path,
                const std::filesystem::path& gazetteer_path) {
    const locmetrics::Gazetteer gazetteer = locmetrics::Gazetteer::from_file(gazetteer_path);

    std::vector<std::pair<std::string, std::string>> responses;
    for (const auto& row : read_jsonl(responses_path)) {
        if (is_header_row(row)) continue;
        responses.emplace_back(require_string_field(row, "id", "responses"),
                               require_string_field(row, "text", "responses"));
    }
    if (responses.empty()) throw EmptyBatch("no responses in " + responses_path.string());

    std::vector<Json> entity_rows{header_line(ctx, "entities")};
    std::vector<std::string> texts;
    for (const auto& [id, text] : responses) {
        texts.push_back(text);
        for (const auto& e : gazetteer.recognize(text)) {
            entity_rows.push_back(Json{{"response_id", id},
                                       {"surface", e.surface},
                                       {"class", locmetrics::to_string(e.cls)},
                                       {"arabic", e.is_arabic},
                                       {"byte_offset", e.byte_offset}});
        }
    }
    write_jsonl(ctx.out_dir / "entities.jsonl", entity_rows);

    auto proportion_json = [&](locmetrics::EntityClass cls) {
        const locmetrics::ProportionResult r =
            locmetrics::entity_proportion(texts, gazetteer, cls);
        Json j{{"arabic_count", r.arabic_count},
               {"total_count", r.total_count},
               {"rendered", r.rendered}};
        if (r.percent) j["percent"] = *r.percent;
        else j["percent"] = nullptr;
        return j;
    };
    Json report{{"_meta", artifact_meta(ctx.config, ctx.seed)},
                {"responses", responses.size()},
                {"person", proportion_json(locmetrics::EntityClass::person)},
                {"location", proportion_json(locmetrics::EntityClass::location)}};
    write_report(ctx, "entity_report.json", report);
    return report;
}

}  // namespace alnf::cli
