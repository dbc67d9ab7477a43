#pragma once

#include <span>
#include <string>
#include <vector>

namespace alnf::prefpipe {

enum class PresentationOrder { original, swapped };
enum class Verdict { response1, response2, unparseable };
enum class Chosen { a, b };
enum class Provenance { judge_consistent, human };

PresentationOrder order_from_string(const std::string& s);
std::string to_string(PresentationOrder order);
std::string to_string(Verdict verdict);
Verdict verdict_from_string(const std::string& s);

/// One judge call for one item in one presentation order.
struct LabelingRun {
    std::string id;
    PresentationOrder order = PresentationOrder::original;
    Verdict verdict = Verdict::unparseable;
};

/// The pair content the runs refer to, keyed by id.
struct PairItem {
    std::string id;
    std::string instruction;
    std::string response_a;
    std::string response_b;
};

struct LabeledPair {
    std::string id;
    std::string instruction;
    std::string response_a;
    std::string response_b;
    Chosen chosen = Chosen::a;
    Provenance provenance = Provenance::judge_consistent;
};

/// Fills the labeling prompt template: [Instruction], [Response1],
/// [Response2], [System] sections in order. Inputs are substituted verbatim.
std::string build_labeling_prompt(const std::string& instruction, const std::string& response1,
                                  const std::string& response2);

/// First whitespace-delimited token of the trimmed, case-folded output must
/// equal "response1" or "response2"; anything else is unparseable.
Verdict parse_verdict(const std::string& judge_output);

struct FilterStats {
    std::size_t total = 0;
    std::size_t kept = 0;
    std::size_t position_biased = 0;     // parseable but slot-consistent
    std::size_t unparseable_dropped = 0;  // at least one unparseable verdict
};

struct FilterResult {
    std::vector<LabeledPair> kept;
    FilterStats stats;
};

/// Keeps an item iff both verdicts are parseable and denote the same
/// underlying response (Response1 original == Response2 swapped).
FilterResult order_switch_filter(std::span<const PairItem> items,
                                 std::span<const LabelingRun> run_original,
                                 std::span<const LabelingRun> run_swapped);

/// Fraction of parseable verdicts equal to Response1.
double position_bias_rate(std::span<const LabelingRun> runs);

/// Pearson correlation of two {A,B} choice lists encoded A -> +1, B -> -1.
double agreement_correlation(std::span<const Chosen> judge_choices,
                             std::span<const Chosen> human_choices);

}  // namespace alnf::prefpipe
