#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alnf/commands.hpp"
#include "alnf/config.hpp"
#include "alnf/errors.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Key=value configuration file");
    cmd->add_option("--seed", opts.seed, "64-bit seed; all command randomness derives from it");
    cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
}

alnf::cli::CommandContext make_context(const CommonOpts& opts) {
    alnf::cli::CommandContext ctx;
    if (!opts.config_path.empty()) ctx.config = alnf::KvConfig::from_file(opts.config_path);
    ctx.seed = opts.seed;
    ctx.out_dir = opts.out_dir;
    std::filesystem::create_directories(ctx.out_dir);
    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RLAIF preference labeling, reward training, PPO tuning, and the paired "
                 "evaluation harness",
                 "alnf"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(alnf::kToolVersion));

    CommonOpts opts;

    std::string instructions, responses;
    auto* label = app.add_subcommand("label", "Order-switched pairwise preference labeling");
    add_common(label, opts);
    label->add_option("--instructions", instructions, "JSONL: {id, instruction}")->required();
    label->add_option("--responses", responses, "JSONL: {id, response_a, response_b}")->required();

    std::string pairs;
    auto* train_rm = app.add_subcommand("train-rm", "Train the pairwise reward model");
    add_common(train_rm, opts);
    train_rm->add_option("--pairs", pairs, "JSONL preference pairs (format header line)")
        ->required();

    std::string policy_ckpt, rm_ckpt, prompts;
    auto* ppo = app.add_subcommand("ppo", "PPO fine-tuning against a reward model");
    add_common(ppo, opts);
    ppo->add_option("--policy", policy_ckpt, "Policy checkpoint (ALNF1)")->required();
    ppo->add_option("--rm", rm_ckpt, "Reward-model checkpoint (ALNF1)")->required();
    ppo->add_option("--prompts", prompts, "JSONL: {id, tokens}")->required();

    std::string questions, model_outputs, baseline_outputs;
    auto* judge_eval = app.add_subcommand("judge-eval", "Pairwise judge scoring over N runs");
    add_common(judge_eval, opts);
    judge_eval->add_option("--questions", questions, "JSONL: {id, question}")->required();
    judge_eval->add_option("--model", model_outputs, "JSONL: {id, output}")->required();
    judge_eval->add_option("--baseline", baseline_outputs, "JSONL: {id, output}")->required();

    std::string items, generations;
    auto* acva = app.add_subcommand("acva", "Yes/no benchmark F1 scoring");
    add_common(acva, opts);
    acva->add_option("--items", items, "JSONL: {id, topic, text, gold}")->required();
    acva->add_option("--generations", generations, "JSONL: {id, output}")->required();

    std::string mc_items, mc_generations;
    auto* mc = app.add_subcommand("mc", "Multiple-choice accuracy scoring");
    add_common(mc, opts);
    mc->add_option("--items", mc_items, "JSONL: {id, category, question, options, gold}")
        ->required();
    mc->add_option("--generations", mc_generations, "JSONL: {id, output}")->required();

    std::vector<std::string> ballot_files;
    auto* human_agg = app.add_subcommand("human-agg", "Pool annotator win/tie/lose ballots");
    add_common(human_agg, opts);
    human_agg->add_option("--ballots", ballot_files, "JSONL ballot files: {annotator, verdicts}")
        ->required()
        ->expected(-1);

    std::string entity_responses, gazetteer;
    auto* entity = app.add_subcommand("entity", "Arabic-entity proportion metric");
    add_common(entity, opts);
    entity->add_option("--responses", entity_responses, "JSONL: {id, text}")->required();
    entity->add_option("--gazetteer", gazetteer, "TSV: surface<TAB>class<TAB>arabic|other")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const alnf::cli::CommandContext ctx = make_context(opts);
        nlohmann::json report;
        if (label->parsed()) {
            report = alnf::cli::cmd_label(ctx, instructions, responses);
        } else if (train_rm->parsed()) {
            report = alnf::cli::cmd_train_rm(ctx, pairs);
        } else if (ppo->parsed()) {
            report = alnf::cli::cmd_ppo(ctx, policy_ckpt, rm_ckpt, prompts);
        } else if (judge_eval->parsed()) {
            report = alnf::cli::cmd_judge_eval(ctx, questions, model_outputs, baseline_outputs);
        } else if (acva->parsed()) {
            report = alnf::cli::cmd_acva(ctx, items, generations);
        } else if (mc->parsed()) {
            report = alnf::cli::cmd_mc(ctx, mc_items, mc_generations);
        } else if (human_agg->parsed()) {
            std::vector<std::filesystem::path> paths(ballot_files.begin(), ballot_files.end());
            report = alnf::cli::cmd_human_agg(ctx, paths);
        } else if (entity->parsed()) {
            report = alnf::cli::cmd_entity(ctx, entity_responses, gazetteer);
        }
        std::cout << report.dump(2) << "\n";
        return 0;
    } catch (const alnf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
