#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "alnf/config.hpp"
#include "alnf/judge_client.hpp"

namespace alnf::cli {

/// Shared command inputs: parsed config, command seed, output directory.
struct CommandContext {
    KvConfig config;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

/// Builds the judge client factory named by `judge.client` (mock | http).
client::ClientFactory make_client_factory(const KvConfig& cfg);

/// Preference labeling: two order-switched judge calls per item, verdict
/// parsing, the consistency filter, LabeledPair + stats artifacts.
nlohmann::json cmd_label(const CommandContext& ctx, const std::filesystem::path& instructions,
                         const std::filesystem::path& responses);

/// Reward-model training from a preference-pair file; writes the checkpoint
/// and the per-step loss curve.
nlohmann::json cmd_train_rm(const CommandContext& ctx, const std::filesystem::path& pairs);

/// PPO run emitting one metrics line per step plus the tuned checkpoint.
nlohmann::json cmd_ppo(const CommandContext& ctx, const std::filesystem::path& policy_ckpt,
                       const std::filesystem::path& rm_ckpt,
                       const std::filesystem::path& prompts);

/// Pairwise judge evaluation over N runs with order alternation; emits the
/// verdict file and the ratio report.
nlohmann::json cmd_judge_eval(const CommandContext& ctx, const std::filesystem::path& questions,
                              const std::filesystem::path& model_outputs,
                              const std::filesystem::path& baseline_outputs);

/// Yes/no benchmark scoring.
nlohmann::json cmd_acva(const CommandContext& ctx, const std::filesystem::path& items,
                        const std::filesystem::path& generations);

/// Multiple-choice benchmark scoring.
nlohmann::json cmd_mc(const CommandContext& ctx, const std::filesystem::path& items,
                      const std::filesystem::path& generations);

/// Win/tie/lose pooling across annotator ballot files.
nlohmann::json cmd_human_agg(const CommandContext& ctx,
                             const std::vector<std::filesystem::path>& ballot_files);

/// Entity-proportion metric over responses with a gazetteer recognizer.
nlohmann::json cmd_entity(const CommandContext& ctx, const std::filesystem::path& responses,
                          const std::filesystem::path& gazetteer);

}  // namespace alnf::cli
