#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace alnf::bench {

// ---------------------------------------------------------------------------
// items
// ---------------------------------------------------------------------------

enum class YesNoLabel { yes, no };
enum class YesNoPrediction { yes, no, abstain };
enum class ChoiceKey { a, b, c, d };
enum class ChoicePrediction { a, b, c, d, abstain };
enum class BallotVerdict { win, tie, lose };

std::string to_string(YesNoLabel label);
YesNoLabel yes_no_label_from_string(const std::string& s);
std::string to_string(ChoiceKey key);
ChoiceKey choice_key_from_string(const std::string& s);
BallotVerdict ballot_verdict_from_string(const std::string& s);

struct AcvaItem {
    std::string id;
    std::string topic;
    std::string statement;
    YesNoLabel gold = YesNoLabel::yes;
};

struct McItem {
    std::string id;
    std::string category;
    std::string question;
    std::array<std::string, 4> options;  // keyed A-D
    ChoiceKey gold = ChoiceKey::a;
};

struct AnnotatorBallot {
    std::string annotator;
    std::vector<BallotVerdict> verdicts;  // one per item
};

// ---------------------------------------------------------------------------
// prompt templates (external text assets with {placeholder} markers)
// ---------------------------------------------------------------------------

enum class PromptMode { zero_shot, few_shot };

struct PromptTemplates {
    std::string acva_zero_shot;
    std::string acva_few_shot;
    std::string acva_exemplar;
    std::string mc_zero_shot;
    std::string mc_few_shot;
    std::string mc_exemplar;

    /// Loads the fixed template filenames from a directory and validates
    /// that each carries its required placeholders.
    static PromptTemplates load(const std::filesystem::path& dir);
};

/// Marker sets used both to render exemplar answers and to parse generations.
struct YesNoMarkers {
    std::vector<std::string> affirmative = {"نعم", "yes"};  // نعم
    std::vector<std::string> negative = {"لا", "no"};            // لا

    const std::string& canonical(YesNoLabel label) const {
        return label == YesNoLabel::yes ? affirmative.front() : negative.front();
    }
};

std::string build_acva_prompt(const PromptTemplates& templates, const AcvaItem& item,
                              std::span<const AcvaItem> exemplars, PromptMode mode,
                              const YesNoMarkers& markers = {});

std::string build_mc_prompt(const PromptTemplates& templates, const McItem& item,
                            std::span<const McItem> exemplars, PromptMode mode);

/// Data-generation request prompt for one topic.
std::string build_acva_generation_prompt(const std::string& topic);

// ---------------------------------------------------------------------------
// parsers
// ---------------------------------------------------------------------------

/// First marker occurrence wins; markers match only at word boundaries.
YesNoPrediction parse_yes_no(const std::string& generation, const YesNoMarkers& markers = {});

/// First standalone Latin A/B/C/D wins; none -> abstain.
ChoicePrediction parse_choice(const std::string& generation);

// ---------------------------------------------------------------------------
// scoring
// ---------------------------------------------------------------------------

struct AcvaReport {
    double overall_f1 = 0.0;  // unweighted mean of per-topic F1
    double micro_f1 = 0.0;    // pooled confusion counts, for transparency
    std::map<std::string, double> per_topic;
    std::vector<std::string> warnings;
};

/// Binary F1 per topic with "yes" as the positive class; abstain is never a
/// correct prediction. A topic with no positive items and no positive
/// predictions scores 1.0 (perfect agreement on the negative class).
AcvaReport acva_f1(std::span<const YesNoPrediction> predictions,
                   std::span<const YesNoLabel> gold, std::span<const std::string> topics);

/// Fraction correct; abstain counts as wrong.
double mc_accuracy(std::span<const ChoicePrediction> predictions,
                   std::span<const ChoiceKey> gold);

double pearson(std::span<const double> xs, std::span<const double> ys);
double spearman(std::span<const double> xs, std::span<const double> ys);

struct HumanAggregate {
    double win_pct = 0.0;
    double tie_pct = 0.0;
    double lose_pct = 0.0;
    double win_or_tie_pct = 0.0;
    std::size_t pooled_verdicts = 0;
};

/// Pools all (annotator, item) verdicts; percentages over the pooled count.
HumanAggregate human_aggregate(std::span<const AnnotatorBallot> ballots);

struct RewardInterval {
    double low = 0.0;   // -inf encoded by has_low = false
    double high = 0.0;  // +inf encoded by has_high = false
    bool has_low = false;
    bool has_high = false;
    std::size_t yes_count = 0;
    std::size_t no_count = 0;
    std::optional<double> ratio_pct;  // 100 * yes/no; empty when no == 0
};

struct ScoredStatement {
    YesNoLabel label = YesNoLabel::yes;
    double reward = 0.0;
};

/// Buckets are half-open [lo, hi) with unbounded ends:
/// (-inf, b0), [b0, b1), ..., [b_last, +inf).
std::vector<RewardInterval> reward_interval_ratio(std::span<const ScoredStatement> scored,
                                                  std::span<const double> boundaries);

/// Linear min-max map onto [0, 10]; a constant batch maps to all 5.0.
std::vector<double> normalize_scores(std::span<const double> rewards);

}  // namespace alnf::bench
