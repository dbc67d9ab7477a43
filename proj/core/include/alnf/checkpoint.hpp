#pragma once

#include <cstdint>
#include <filesystem>

#include "alnf/reward.hpp"
#include "alnf/tinylm.hpp"

namespace alnf {

/// Binary model checkpoint.
///
/// Layout (all integers little-endian):
///   bytes 0-4   magic "ALNF1"
///   u8          model kind: 0 = policy, 1 = reward
///   u32         format version (currently 1)
///   u32         vocab size; i32 bos, eos, pad
///   u32         embed dim, hidden dim, context window, hidden layers
///   u64         config hash (0 when not produced by a command)
///   u64         parameter count
///   f64 x count parameters, little-endian, index order
void save_policy(const std::filesystem::path& path, const lm::PolicyModel& model,
                 std::uint64_t config_hash = 0);
void save_reward(const std::filesystem::path& path, const reward::RewardModel& model,
                 std::uint64_t config_hash = 0);

lm::PolicyModel load_policy(const std::filesystem::path& path);
reward::RewardModel load_reward(const std::filesystem::path& path);

}  // namespace alnf
