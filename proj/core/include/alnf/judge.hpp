#pragma once

#include <span>
#include <string>
#include <vector>

namespace alnf::judge {

enum class JudgeOrder { model_first, baseline_first };

std::string to_string(JudgeOrder order);
JudgeOrder judge_order_from_string(const std::string& s);

/// Parsed judge scores for one question in one run, already mapped back to
/// model/baseline regardless of presentation order.
struct ScorePair {
    std::string question_id;
    double model_score = 0.0;
    double baseline_score = 0.0;
    JudgeOrder order = JudgeOrder::model_first;
    int run = 0;
};

struct ParsedScores {
    double score1 = 0.0;  // Assistant 1
    double score2 = 0.0;  // Assistant 2
    bool clamped = false;
};

struct RatioReport {
    std::vector<double> per_run;  // percentages
    double mean = 0.0;
    double spread = 0.0;  // population standard deviation
};

/// Pairwise scoring prompt: [Question], [Assistant 1] .. [End of Assistant 1],
/// [Assistant 2] .. [End of Assistant 2], [System].
std::string build_judge_prompt(const std::string& question, const std::string& response1,
                               const std::string& response2);

/// First line must be two whitespace-separated reals; scores outside [1, 10]
/// are clamped and flagged.
ParsedScores parse_scores(const std::string& judge_output);

/// Deterministic alternation: even question index puts the model first.
JudgeOrder alternate_order(std::size_t question_index);

/// 100 * (mean model score) / (mean baseline score) for one run.
double performance_ratio(std::span<const ScorePair> pairs);

RatioReport multi_run_ratio(std::span<const std::vector<ScorePair>> runs);

/// "94.82% ± 0.2" style rendering of a report.
std::string format_ratio_report(const RatioReport& report);

}  // namespace alnf::judge
