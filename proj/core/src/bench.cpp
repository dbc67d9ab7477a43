#include "alnf/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "alnf/errors.hpp"
#include "alnf/jsonl.hpp"
#include "textsub.hpp"

namespace alnf::bench {

// ---------------------------------------------------------------------------
// enum plumbing
// ---------------------------------------------------------------------------

std::string to_string(YesNoLabel label) { return label == YesNoLabel::yes ? "yes" : "no"; }

YesNoLabel yes_no_label_from_string(const std::string& s) {
    if (s == "yes") return YesNoLabel::yes;
    if (s == "no") return YesNoLabel::no;
    throw ValidationError("unknown yes/no label: " + s);
}

std::string to_string(ChoiceKey key) {
    switch (key) {
        case ChoiceKey::a: return "A";
        case ChoiceKey::b: return "B";
        case ChoiceKey::c: return "C";
        default: return "D";
    }
}

ChoiceKey choice_key_from_string(const std::string& s) {
    if (s == "A") return ChoiceKey::a;
    if (s == "B") return ChoiceKey::b;
    if (s == "C") return ChoiceKey::c;
    if (s == "D") return ChoiceKey::d;
    throw ValidationError("unknown choice key: " + s);
}

BallotVerdict ballot_verdict_from_string(const std::string& s) {
    if (s == "win") return BallotVerdict::win;
    if (s == "tie") return BallotVerdict::tie;
    if (s == "lose") return BallotVerdict::lose;
    throw ValidationError("unknown ballot verdict: " + s);
}

// ---------------------------------------------------------------------------
// templates
// ---------------------------------------------------------------------------

namespace {

std::string load_template(const std::filesystem::path& dir, const char* name,
                          std::initializer_list<const char*> placeholders) {
    std::string text = read_text_file(dir / name);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    for (const char* ph : placeholders) {
        if (text.find(ph) == std::string::npos)
            throw ConfigError(std::string(name) + " is missing placeholder " + ph);
    }
    return text;
}

constexpr const char* kGenerationTemplate =
    "I am collecting some supervised fine-tuning (sft) data about Arabic culture. It is about "
    "the knowledge of Arabic culture and manners. The data is some questions in the Arabic "
    "language with an id in the form of {'id': '1','label':'xx' 'query':'xx'}. I will give you "
    "a topic in Arabic culture. The 'id' is the index of the data. 'label' is the topic I give "
    "you. 'query' is some question statement about Arabic culture under that topic. The Data "
    "should be of no repetition with a balanced proportion of true and false. Now please "
    "generate 200 sft data in json in Arabic with the format under the topic of {topic}";

}  // namespace

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
    PromptTemplates t;
    t.acva_zero_shot = load_template(dir, "acva_zero_shot.txt", {"{question}"});
    t.acva_few_shot =
        load_template(dir, "acva_few_shot.txt", {"{category}", "{exemplars}", "{question}"});
    t.acva_exemplar = load_template(dir, "acva_exemplar_block.txt", {"{question}", "{answer}"});
    t.mc_zero_shot = load_template(
        dir, "mc_zero_shot.txt",
        {"{category}", "{question}", "{option_a}", "{option_b}", "{option_c}", "{option_d}"});
    t.mc_few_shot = load_template(dir, "mc_few_shot.txt",
                                  {"{category}", "{exemplars}", "{question}", "{option_a}",
                                   "{option_b}", "{option_c}", "{option_d}"});
    t.mc_exemplar = load_template(dir, "mc_exemplar_block.txt",
                                  {"{question}", "{option_a}", "{option_b}", "{option_c}",
                                   "{option_d}", "{answer}"});
    return t;
}

std::string build_acva_prompt(const PromptTemplates& templates, const AcvaItem& item,
                              std::span<const AcvaItem> exemplars, PromptMode mode,
                              const YesNoMarkers& markers) {
    if (item.statement.empty()) throw MissingField("statement");
    if (mode == PromptMode::zero_shot) {
        return detail::substitute(templates.acva_zero_shot, {{"question", item.statement}});
    }
    if (exemplars.empty()) throw MissingExemplars();
    if (item.topic.empty()) throw MissingField("topic");
    std::string blocks;
    for (const auto& ex : exemplars) {
        if (ex.statement.empty()) throw MissingField("exemplar statement");
        blocks += detail::substitute(templates.acva_exemplar,
                                     {{"question", ex.statement},
                                      {"answer", markers.canonical(ex.gold)}});
        blocks += "\n\n";
    }
    return detail::substitute(templates.acva_few_shot, {{"category", item.topic},
                                                        {"exemplars", blocks},
                                                        {"question", item.statement}});
}

std::string build_mc_prompt(const PromptTemplates& templates, const McItem& item,
                            std::span<const McItem> exemplars, PromptMode mode) {
    if (item.question.empty()) throw MissingField("question");
    for (const auto& opt : item.options) {
        if (opt.empty()) throw MissingField("option");
    }
    std::map<std::string, std::string> subs = {{"question", item.question},
                                               {"option_a", item.options[0]},
                                               {"option_b", item.options[1]},
                                               {"option_c", item.options[2]},
                                               {"option_d", item.options[3]}};
    if (mode == PromptMode::zero_shot) {
        if (item.category.empty()) throw MissingField("category");
        subs["category"] = item.category;
        return detail::substitute(templates.mc_zero_shot, subs);
    }
    if (exemplars.empty()) throw MissingExemplars();
    if (item.category.empty()) throw MissingField("category");
    std::string blocks;
    for (const auto& ex : exemplars) {
        if (ex.question.empty()) throw MissingField("exemplar question");
        blocks += detail::substitute(templates.mc_exemplar,
                                     {{"question", ex.question},
                                      {"option_a", ex.options[0]},
                                      {"option_b", ex.options[1]},
                                      {"option_c", ex.options[2]},
                                      {"option_d", ex.options[3]},
                                      {"answer", to_string(ex.gold)}});
        blocks += "\n\n";
    }
    subs["category"] = item.category;
    subs["exemplars"] = blocks;
    return detail::substitute(templates.mc_few_shot, subs);
}

std::string build_acva_generation_prompt(const std::string& topic) {
    if (topic.empty()) throw MissingField("topic");
    return detail::substitute(kGenerationTemplate, {{"topic", topic}});
}

// ---------------------------------------------------------------------------
// parsers
// ---------------------------------------------------------------------------

namespace {

struct CodePoint {
    std::uint32_t cp = 0;
    std::size_t len = 1;
};

CodePoint decode_utf8(const std::string& s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    auto cont = [&](std::size_t k) -> std::uint32_t {
        if (i + k >= s.size()) return 0;
        return static_cast<unsigned char>(s[i + k]) & 0x3fu;
    };
    if ((b0 & 0xe0) == 0xc0 && i + 1 < s.size())
        return {(static_cast<std::uint32_t>(b0 & 0x1f) << 6) | cont(1), 2};
    if ((b0 & 0xf0) == 0xe0 && i + 2 < s.size())
        return {(static_cast<std::uint32_t>(b0 & 0x0f) << 12) | (cont(1) << 6) | cont(2), 3};
    if ((b0 & 0xf8) == 0xf0 && i + 3 < s.size())
        return {(static_cast<std::uint32_t>(b0 & 0x07) << 18) | (cont(1) << 12) | (cont(2) << 6) |
                    cont(3),
                4};
    return {b0, 1};  // invalid byte, treat as-is
}

CodePoint decode_utf8_before(const std::string& s, std::size_t i) {
    std::size_t start = i;
    while (start > 0 && (static_cast<unsigned char>(s[start - 1]) & 0xc0) == 0x80) --start;
    if (start == 0 && i == 0) return {0, 0};
    start = start > 0 ? start - 1 : 0;
    return decode_utf8(s, start);
}

bool is_arabic_letterlike(std::uint32_t cp) {
    // Letters and digits; excludes Arabic punctuation and the harakat
    // diacritics, which attach to a word without extending it.
    return (cp >= 0x0621 && cp <= 0x063a) || (cp >= 0x0640 && cp <= 0x064a) ||
           (cp >= 0x0660 && cp <= 0x0669) || (cp >= 0x066e && cp <= 0x066f) ||
           (cp >= 0x0671 && cp <= 0x06d3) || cp == 0x06d5;
}

bool is_word_codepoint(std::uint32_t cp) {
    if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) != 0;
    return is_arabic_letterlike(cp);
}

bool boundary_before(const std::string& s, std::size_t pos) {
    if (pos == 0) return true;
    return !is_word_codepoint(decode_utf8_before(s, pos).cp);
}

bool boundary_after(const std::string& s, std::size_t pos) {
    if (pos >= s.size()) return true;
    return !is_word_codepoint(decode_utf8(s, pos).cp);
}

std::string ascii_fold(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return s;
}

/// Earliest word-bounded occurrence of any marker; longer match wins ties.
std::size_t find_marker(const std::string& folded, const std::vector<std::string>& markers,
                        std::size_t* match_len) {
    std::size_t best = std::string::npos;
    std::size_t best_len = 0;
    for (const auto& raw : markers) {
        const std::string m = ascii_fold(raw);
        std::size_t from = 0;
        while (true) {
            const std::size_t at = folded.find(m, from);
            if (at == std::string::npos) break;
            if (boundary_before(folded, at) && boundary_after(folded, at + m.size())) {
                if (at < best || (at == best && m.size() > best_len)) {
                    best = at;
                    best_len = m.size();
                }
                break;
            }
            from = at + 1;
        }
    }
    if (match_len) *match_len = best_len;
    return best;
}

}  // namespace

YesNoPrediction parse_yes_no(const std::string& generation, const YesNoMarkers& markers) {
    const std::string folded = ascii_fold(generation);
    std::size_t yes_len = 0, no_len = 0;
    const std::size_t yes_at = find_marker(folded, markers.affirmative, &yes_len);
    const std::size_t no_at = find_marker(folded, markers.negative, &no_len);
    if (yes_at == std::string::npos && no_at == std::string::npos)
        return YesNoPrediction::abstain;
    if (no_at == std::string::npos) return YesNoPrediction::yes;
    if (yes_at == std::string::npos) return YesNoPrediction::no;
    if (yes_at == no_at) return yes_len >= no_len ? YesNoPrediction::yes : YesNoPrediction::no;
    return yes_at < no_at ? YesNoPrediction::yes : YesNoPrediction::no;
}

ChoicePrediction parse_choice(const std::string& generation) {
    for (std::size_t i = 0; i < generation.size(); ++i) {
        const char c = generation[i];
        if (c < 'A' || c > 'D') continue;
        const bool prev_ok =
            i == 0 || !std::isalnum(static_cast<unsigned char>(generation[i - 1]));
        const bool next_ok = i + 1 >= generation.size() ||
                             !std::isalnum(static_cast<unsigned char>(generation[i + 1]));
        if (!prev_ok || !next_ok) continue;
        switch (c) {
            case 'A': return ChoicePrediction::a;
            case 'B': return ChoicePrediction::b;
            case 'C': return ChoicePrediction::c;
            default: return ChoicePrediction::d;
        }
    }
    return ChoicePrediction::abstain;
}

// ---------------------------------------------------------------------------
// scoring
// ---------------------------------------------------------------------------

namespace {

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    void add(YesNoPrediction pred, YesNoLabel gold) {
        // Abstain is wrong for both classes: it lands in the error cell of
        // whichever class the gold belongs to.
        if (gold == YesNoLabel::yes) {
            if (pred == YesNoPrediction::yes) ++tp;
            else ++fn;
        } else {
            if (pred == YesNoPrediction::no) ++tn;
            else ++fp;
        }
    }

    // 2TP / (2TP + FP + FN); an empty positive side on both axes counts as
    // perfect agreement on the negative class.
    double f1(bool* degenerate = nullptr) const {
        const std::size_t denom = 2 * tp + fp + fn;
        if (degenerate) *degenerate = denom == 0;
        if (denom == 0) return 1.0;
        return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
};

}  // namespace

AcvaReport acva_f1(std::span<const YesNoPrediction> predictions,
                   std::span<const YesNoLabel> gold, std::span<const std::string> topics) {
    if (predictions.empty()) throw EmptyBatch("acva_f1 over empty predictions");
    if (predictions.size() != gold.size() || predictions.size() != topics.size())
        throw ShapeMismatch("acva_f1 inputs differ in length");

    std::map<std::string, Confusion> per_topic;
    Confusion pooled;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        per_topic[topics[i]].add(predictions[i], gold[i]);
        pooled.add(predictions[i], gold[i]);
    }

    AcvaReport report;
    double sum = 0.0;
    for (const auto& [topic, confusion] : per_topic) {
        bool degenerate = false;
        const double f1 = confusion.f1(&degenerate);
        if (degenerate)
            report.warnings.push_back("topic \"" + topic +
                                      "\" has no yes items and no yes predictions; F1 = 1.0");
        report.per_topic[topic] = f1;
        sum += f1;
    }
    report.overall_f1 = sum / static_cast<double>(per_topic.size());
    report.micro_f1 = pooled.f1();
    return report;
}

double mc_accuracy(std::span<const ChoicePrediction> predictions,
                   std::span<const ChoiceKey> gold) {
    if (predictions.empty()) throw EmptyBatch("mc_accuracy over empty predictions");
    if (predictions.size() != gold.size())
        throw ShapeMismatch("mc_accuracy inputs differ in length");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool match = (predictions[i] == ChoicePrediction::a && gold[i] == ChoiceKey::a) ||
                           (predictions[i] == ChoicePrediction::b && gold[i] == ChoiceKey::b) ||
                           (predictions[i] == ChoicePrediction::c && gold[i] == ChoiceKey::c) ||
                           (predictions[i] == ChoicePrediction::d && gold[i] == ChoiceKey::d);
        if (match) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ShapeMismatch("pearson inputs differ in length");
    if (xs.size() < 2) throw ValidationError("pearson needs at least 2 points");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateDistribution("pearson input has zero variance");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size(), 0.0);
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ShapeMismatch("spearman inputs differ in length");
    if (xs.size() < 2) throw ValidationError("spearman needs at least 2 points");
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    return pearson(rx, ry);
}

HumanAggregate human_aggregate(std::span<const AnnotatorBallot> ballots) {
    if (ballots.empty()) throw EmptyBatch("human_aggregate over zero ballots");
    const std::size_t items = ballots.front().verdicts.size();
    std::size_t win = 0, tie = 0, lose = 0;
    for (const auto& ballot : ballots) {
        if (ballot.verdicts.size() != items)
            throw ShapeMismatch("annotator " + ballot.annotator + " scored " +
                                std::to_string(ballot.verdicts.size()) + " items, expected " +
                                std::to_string(items));
        for (BallotVerdict v : ballot.verdicts) {
            switch (v) {
                case BallotVerdict::win: ++win; break;
                case BallotVerdict::tie: ++tie; break;
                case BallotVerdict::lose: ++lose; break;
            }
        }
    }
    const std::size_t total = win + tie + lose;
    if (total == 0) throw EmptyBatch("ballots contain no verdicts");
    HumanAggregate agg;
    agg.pooled_verdicts = total;
    agg.win_pct = 100.0 * static_cast<double>(win) / static_cast<double>(total);
    agg.tie_pct = 100.0 * static_cast<double>(tie) / static_cast<double>(total);
    agg.lose_pct = 100.0 * static_cast<double>(lose) / static_cast<double>(total);
    agg.win_or_tie_pct = agg.win_pct + agg.tie_pct;
    return agg;
}

std::vector<RewardInterval> reward_interval_ratio(std::span<const ScoredStatement> scored,
                                                  std::span<const double> boundaries) {
    if (boundaries.empty()) throw ValidationError("at least one interval boundary required");
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        if (!(boundaries[i - 1] < boundaries[i]))
            throw ValidationError("interval boundaries must be strictly increasing");
    }

    std::vector<RewardInterval> intervals(boundaries.size() + 1);
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        if (k > 0) {
            intervals[k].low = boundaries[k - 1];
            intervals[k].has_low = true;
        }
        if (k < boundaries.size()) {
            intervals[k].high = boundaries[k];
            intervals[k].has_high = true;
        }
    }

    for (const auto& s : scored) {
        std::size_t k = boundaries.size();
        for (std::size_t b = 0; b < boundaries.size(); ++b) {
            if (s.reward < boundaries[b]) {
                k = b;
                break;
            }
        }
        if (s.label == YesNoLabel::yes) ++intervals[k].yes_count;
        else ++intervals[k].no_count;
    }

    for (auto& iv : intervals) {
        if (iv.no_count > 0) {
            iv.ratio_pct =
                100.0 * static_cast<double>(iv.yes_count) / static_cast<double>(iv.no_count);
        }
    }
    return intervals;
}

std::vector<double> normalize_scores(std::span<const double> rewards) {
    if (rewards.empty()) throw EmptyBatch("normalize_scores over empty batch");
    const auto [mn_it, mx_it] = std::minmax_element(rewards.begin(), rewards.end());
    const double mn = *mn_it, mx = *mx_it;
    std::vector<double> out(rewards.size());
    if (mn == mx) {
        std::fill(out.begin(), out.end(), 5.0);
        return out;
    }
    const double scale = 10.0 / (mx - mn);
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mn) * scale;
    return out;
}

}  // namespace alnf::bench
