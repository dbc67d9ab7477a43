#include "alnf/prefpipe.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "alnf/bench.hpp"
#include "alnf/errors.hpp"
#include "textsub.hpp"

namespace alnf::prefpipe {

namespace {

// Pairwise labeling prompt; placeholders substituted verbatim.
constexpr const char* kLabelingTemplate =
    R"([Instruction]
{instruction}

[Response1]
{response_1}

[Response2]
{response_2}

[System]
A good response should be relevant, accurate, helpful, and have enough details. Also, it should follow Arabic culture, customs, beliefs, and laws.
Which is better, Response1 or Response2?
Do not explain your answer, just output Response1 or Response2.)";

std::string ascii_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

PresentationOrder order_from_string(const std::string& s) {
    if (s == "original") return PresentationOrder::original;
    if (s == "swapped") return PresentationOrder::swapped;
    throw ValidationError("unknown presentation order: " + s);
}

std::string to_string(PresentationOrder order) {
    return order == PresentationOrder::original ? "original" : "swapped";
}

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::response1: return "Response1";
        case Verdict::response2: return "Response2";
        default: return "Unparseable";
    }
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "Response1") return Verdict::response1;
    if (s == "Response2") return Verdict::response2;
    if (s == "Unparseable") return Verdict::unparseable;
    throw ValidationError("unknown verdict: " + s);
}

std::string build_labeling_prompt(const std::string& instruction, const std::string& response1,
                                  const std::string& response2) {
    if (instruction.empty()) throw MissingField("instruction");
    if (response1.empty()) throw MissingField("response1");
    if (response2.empty()) throw MissingField("response2");
    return detail::substitute(kLabelingTemplate, {{"instruction", instruction},
                                                  {"response_1", response1},
                                                  {"response_2", response2}});
}

Verdict parse_verdict(const std::string& judge_output) {
    const char* ws = " \t\r\n";
    const std::size_t begin = judge_output.find_first_not_of(ws);
    if (begin == std::string::npos) return Verdict::unparseable;
    std::size_t end = judge_output.find_first_of(ws, begin);
    if (end == std::string::npos) end = judge_output.size();
    const std::string token = ascii_lower(judge_output.substr(begin, end - begin));
    if (token == "response1") return Verdict::response1;
    if (token == "response2") return Verdict::response2;
    return Verdict::unparseable;
}

FilterResult order_switch_filter(std::span<const PairItem> items,
                                 std::span<const LabelingRun> run_original,
                                 std::span<const LabelingRun> run_swapped) {
    std::map<std::string, const PairItem*> by_id;
    for (const auto& item : items) {
        if (!by_id.emplace(item.id, &item).second) throw DuplicateItem(item.id);
    }
    auto index_runs = [](std::span<const LabelingRun> runs, PresentationOrder expected) {
        std::map<std::string, Verdict> m;
        for (const auto& run : runs) {
            if (run.order != expected)
                throw ValidationError("labeling run " + run.id + " has order " +
                                      to_string(run.order) + ", expected " + to_string(expected));
            if (!m.emplace(run.id, run.verdict).second) throw DuplicateItem(run.id);
        }
        return m;
    };
    const auto original = index_runs(run_original, PresentationOrder::original);
    const auto swapped = index_runs(run_swapped, PresentationOrder::swapped);

    std::vector<std::string> missing;
    for (const auto& [id, v] : original) {
        (void)v;
        if (!swapped.count(id)) missing.push_back(id);
    }
    for (const auto& [id, v] : swapped) {
        (void)v;
        if (!original.count(id)) missing.push_back(id);
    }
    for (const auto& [id, v] : original) {
        (void)v;
        if (swapped.count(id) && !by_id.count(id)) missing.push_back(id);
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        throw MissingCounterpart(std::move(missing));
    }

    FilterResult result;
    result.stats.total = original.size();
    for (const auto& run : run_original) {
        const Verdict vo = run.verdict;
        const Verdict vs = swapped.at(run.id);
        if (vo == Verdict::unparseable || vs == Verdict::unparseable) {
            ++result.stats.unparseable_dropped;
            continue;
        }
        if (vo == vs) {
            // Same slot in both orders: the judge tracked position, not content.
            ++result.stats.position_biased;
            continue;
        }
        const PairItem& item = *by_id.at(run.id);
        LabeledPair pair;
        pair.id = item.id;
        pair.instruction = item.instruction;
        pair.response_a = item.response_a;
        pair.response_b = item.response_b;
        pair.chosen = vo == Verdict::response1 ? Chosen::a : Chosen::b;
        pair.provenance = Provenance::judge_consistent;
        result.kept.push_back(std::move(pair));
        ++result.stats.kept;
    }
    return result;
}

double position_bias_rate(std::span<const LabelingRun> runs) {
    std::size_t parseable = 0, first = 0;
    for (const auto& run : runs) {
        if (run.verdict == Verdict::unparseable) continue;
        ++parseable;
        if (run.verdict == Verdict::response1) ++first;
    }
    if (parseable == 0) throw EmptyBatch("no parseable verdicts");
    return static_cast<double>(first) / static_cast<double>(parseable);
}

double agreement_correlation(std::span<const Chosen> judge_choices,
                             std::span<const Chosen> human_choices) {
    if (judge_choices.empty() || human_choices.empty())
        throw EmptyBatch("agreement_correlation over empty lists");
    if (judge_choices.size() != human_choices.size())
        throw ShapeMismatch("choice lists differ in length");
    if (judge_choices.size() == 1) throw DegenerateDistribution("single-item choice lists");
    std::vector<double> xs(judge_choices.size()), ys(human_choices.size());
    for (std::size_t i = 0; i < judge_choices.size(); ++i) {
        xs[i] = judge_choices[i] == Chosen::a ? 1.0 : -1.0;
        ys[i] = human_choices[i] == Chosen::a ? 1.0 : -1.0;
    }
    return bench::pearson(xs, ys);
}

}  // namespace alnf::prefpipe
