#include "alnf/judge.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "alnf/errors.hpp"
#include "textsub.hpp"

namespace alnf::judge {

namespace {

constexpr const char* kJudgeTemplate =
    R"([Question]
{question}

[Assistant 1]
{response_1}

[End of Assistant 1]

[Assistant 2]
{response_2}

[End of Assistant 2]

[System]
We would like to request your feedback on the two AI assistants in response to the user question displayed above.

Requirements: The response should be helpful, relevant, accurate, and have enough details. The response should follow Arabic culture, customs, beliefs, and laws.

Please rate the performance of their responses. Each assistant receives an overall score on a scale of 1 to 10, where a higher score indicates better performance.

Please first output a single line containing only two values indicating the scores for Assistant 1 and 2, respectively. The two scores are separated by a space. You should consider which response is more in line with the given requirements.

In the subsequent line, please provide a comprehensive explanation of your evaluation.)";

bool parse_full_double(const std::string& token, double& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return end == token.c_str() + token.size() && std::isfinite(out);
}

}  // namespace

std::string to_string(JudgeOrder order) {
    return order == JudgeOrder::model_first ? "model-first" : "baseline-first";
}

JudgeOrder judge_order_from_string(const std::string& s) {
    if (s == "model-first") return JudgeOrder::model_first;
    if (s == "baseline-first") return JudgeOrder::baseline_first;
    throw ValidationError("unknown judge order: " + s);
}

std::string build_judge_prompt(const std::string& question, const std::string& response1,
                               const std::string& response2) {
    if (question.empty()) throw MissingField("question");
    if (response1.empty()) throw MissingField("response1");
    if (response2.empty()) throw MissingField("response2");
    return detail::substitute(kJudgeTemplate, {{"question", question},
                                               {"response_1", response1},
                                               {"response_2", response2}});
}

ParsedScores parse_scores(const std::string& judge_output) {
    std::string first_line = judge_output.substr(0, judge_output.find('\n'));
    if (!first_line.empty() && first_line.back() == '\r') first_line.pop_back();

    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < first_line.size()) {
        const std::size_t begin = first_line.find_first_not_of(" \t", pos);
        if (begin == std::string::npos) break;
        std::size_t end = first_line.find_first_of(" \t", begin);
        if (end == std::string::npos) end = first_line.size();
        tokens.push_back(first_line.substr(begin, end - begin));
        pos = end;
    }

    double s1 = 0.0, s2 = 0.0;
    if (tokens.size() != 2 || !parse_full_double(tokens[0], s1) ||
        !parse_full_double(tokens[1], s2)) {
        throw UnparseableScores(first_line);
    }

    ParsedScores parsed;
    parsed.clamped = s1 < 1.0 || s1 > 10.0 || s2 < 1.0 || s2 > 10.0;
    parsed.score1 = std::min(10.0, std::max(1.0, s1));
    parsed.score2 = std::min(10.0, std::max(1.0, s2));
    return parsed;
}

JudgeOrder alternate_order(std::size_t question_index) {
    return question_index % 2 == 0 ? JudgeOrder::model_first : JudgeOrder::baseline_first;
}

double performance_ratio(std::span<const ScorePair> pairs) {
    if (pairs.empty()) throw EmptyBatch("performance_ratio over empty run");
    const int run = pairs.front().run;
    double model_sum = 0.0, baseline_sum = 0.0;
    for (const auto& p : pairs) {
        if (p.run != run) throw ValidationError("performance_ratio mixes runs");
        model_sum += p.model_score;
        baseline_sum += p.baseline_score;
    }
    if (baseline_sum == 0.0) throw DegenerateDistribution("baseline mean is zero");
    return 100.0 * model_sum / baseline_sum;
}

RatioReport multi_run_ratio(std::span<const std::vector<ScorePair>> runs) {
    if (runs.empty()) throw EmptyBatch("multi_run_ratio over zero runs");
    RatioReport report;
    for (const auto& run : runs) report.per_run.push_back(performance_ratio(run));
    double sum = 0.0;
    for (double r : report.per_run) sum += r;
    report.mean = sum / static_cast<double>(report.per_run.size());
    double var = 0.0;
    for (double r : report.per_run) var += (r - report.mean) * (r - report.mean);
    report.spread = std::sqrt(var / static_cast<double>(report.per_run.size()));
    return report;
}

std::string format_ratio_report(const RatioReport& report) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f%% ± %.1f", report.mean, report.spread);
    return buf;
}

}  // namespace alnf::judge
